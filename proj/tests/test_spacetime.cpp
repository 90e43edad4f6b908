#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsurgery/spacetime.hpp"

using namespace qsurgery;

namespace {

DeformedCode two_patch_deformed(std::size_t d_r) {
    CssCode s2 = make_surface(2);
    CssCode comp = make_composite(s2, s2, 1);
    AlphaPair ap = make_injection_alphas(1, 1, 1);
    GlueCode base = build_graph_glue(comp, ap, GluePolicy::path);
    return assemble_deformed(comp, ap, base, d_r);
}

void require_all(const Report& rep) {
    for (const auto& item : rep.items) {
        CAPTURE(item.name);
        CAPTURE(item.detail);
        CHECK(item.pass);
    }
}

} // namespace

TEST_CASE("spacetime shapes for the thickened two-patch instance") {
    DeformedCode dc = two_patch_deformed(2);
    std::size_t n = 10, nb = 20, rbx = 7, rbz = 12;
    REQUIRE(dc.n() == n);
    REQUIRE(dc.n_bar() == nb);
    REQUIRE(dc.deformed.h_x.rows() == rbx);
    REQUIRE(dc.deformed.h_z.rows() == rbz);

    SpacetimeCode sc = build_spacetime(dc, 2);
    std::size_t x_cols = 3 * nb + 2 * rbx;
    std::size_t z_cols = 2 * n + nb + 2 * rbz;
    CHECK(sc.h_st_x.rows() == 3 * rbx);
    CHECK(sc.h_st_x.cols() == x_cols);
    CHECK(sc.h_st_z.rows() == 2 * 4 + rbz);
    CHECK(sc.h_st_z.cols() == z_cols);
    CHECK(sc.j_st_x.rows() == 1);
    CHECK(sc.j_st_mz.rows() == 1);
    CHECK(sc.x_layout.size() == x_cols);
    CHECK(sc.z_layout.size() == z_cols);

    // Layout spot checks: first column of each region.
    CHECK(sc.x_layout[0].kind == ColumnKind::data);
    CHECK(sc.x_layout[0].round == 0);
    CHECK(sc.x_layout[3 * nb].kind == ColumnKind::outcome);
    CHECK(sc.x_layout[3 * nb].round == 1);
    CHECK(sc.z_layout[n].round == 1);
    CHECK(sc.z_layout[n].index == 0);
    CHECK(sc.z_layout[n + nb].round == 2); // final data epoch, base qubits only
    CHECK(sc.z_layout[2 * n + nb].kind == ColumnKind::outcome);

    require_all(verify_spacetime_consistency(sc, dc, 400, 11));
}

TEST_CASE("spacetime consistency across instances and d_t") {
    for (std::size_t d_r : {1u, 2u}) {
        DeformedCode dc = two_patch_deformed(d_r);
        for (std::size_t d_t : {2u, 3u, 4u}) {
            CAPTURE(d_r);
            CAPTURE(d_t);
            SpacetimeCode sc = build_spacetime(dc, d_t);
            require_all(verify_spacetime_consistency(sc, dc, 200, 3));
        }
    }
}

TEST_CASE("spacetime consistency when every logical is measured") {
    CssCode tri;
    tri.h_x = BitMatrix::from_rows({{1, 1, 0}, {0, 1, 1}, {1, 0, 1}});
    tri.h_z = BitMatrix(0, 3);
    tri.j_z = BitMatrix::from_rows({{1, 1, 1}});
    tri.j_x = BitMatrix::from_rows({{1, 0, 0}});
    AlphaPair ap = derive_alpha_pair(BitMatrix::identity(1));
    GlueCode g = build_graph_glue(tri, ap, GluePolicy::shared_x_check);
    DeformedCode dc = assemble_deformed(tri, ap, g, 2);

    SpacetimeCode sc = build_spacetime(dc, 3);
    CHECK(sc.j_st_x.rows() == 0);
    CHECK(sc.j_st_z.rows() == 0);
    CHECK(sc.j_st_mz.rows() == 1);
    require_all(verify_spacetime_consistency(sc, dc, 200, 5));

    BitVector zero(sc.z_layout.size());
    FlipRecord rec = logical_flips(sc, zero, PauliBasis::x);
    CHECK(!rec.detected);
    CHECK(rec.unmeasured.size() == 0);
    CHECK(!rec.measured.any());
    CHECK(!rec.outcomes.any());
}

TEST_CASE("spacetime consistency at full scale") {
    CssCode bb = make_bivariate_bicycle(3, 3, {{0, 0}, {0, 1}, {1, 0}}, {{0, 0}, {0, 1}, {2, 1}});
    for (std::size_t r = 0; r < bb.k(); ++r)
        bb.j_z.set_row(r, reduce_logical_weight(bb.j_z.row(r), bb.h_z));
    // Lead with a pair whose reduced supports are disjoint.
    std::size_t pick_a = bb.k(), pick_b = bb.k();
    for (std::size_t a = 0; a < bb.k() && pick_a == bb.k(); ++a)
        for (std::size_t b = a + 1; b < bb.k(); ++b) {
            BitVector meet = bb.j_z.row(a);
            meet ^= bb.j_z.row(b);
            if (meet.weight() == bb.j_z.row(a).weight() + bb.j_z.row(b).weight()) {
                pick_a = a;
                pick_b = b;
                break;
            }
        }
    REQUIRE(pick_a < bb.k());
    BitMatrix jz(bb.k(), bb.n()), jx(bb.k(), bb.n());
    std::vector<std::size_t> perm{pick_a, pick_b};
    for (std::size_t r = 0; r < bb.k(); ++r)
        if (r != pick_a && r != pick_b) perm.push_back(r);
    for (std::size_t r = 0; r < bb.k(); ++r) {
        jz.set_row(r, bb.j_z.row(perm[r]));
        jx.set_row(r, bb.j_x.row(perm[r]));
    }
    bb.j_z = jz;
    bb.j_x = jx;

    CssCode comp = make_composite(bb, make_surface(2), 2);
    AlphaPair ap = make_injection_alphas(4, 1, 2);
    GlueCode base = build_graph_glue(comp, ap, GluePolicy::path);
    DeformedCode dc = assemble_deformed(comp, ap, base, 2);
    SpacetimeCode sc = build_spacetime(dc, 2);
    require_all(verify_spacetime_consistency(sc, dc, 100, 17));
}

TEST_CASE("d_t below two is rejected") {
    DeformedCode dc = two_patch_deformed(1);
    CHECK_THROWS_AS(build_spacetime(dc, 1), std::invalid_argument);
    CHECK_THROWS_AS(build_spacetime(dc, 0), std::invalid_argument);
}

TEST_CASE("logical flips of simple errors") {
    DeformedCode dc = two_patch_deformed(2);
    SpacetimeCode sc = build_spacetime(dc, 2);

    // A single Z error in epoch 0 on a qubit covered by an X check is detected.
    BitVector ez(sc.x_layout.size());
    ez.set(0, true);
    REQUIRE(dc.deformed.h_x.col(0).any());
    FlipRecord rec = logical_flips(sc, ez, PauliBasis::z);
    CHECK(rec.detected);

    // A kernel-basis element fires no checks.
    BitMatrix kb = kernel_basis(sc.h_st_x);
    REQUIRE(kb.rows() > 0);
    CHECK(!logical_flips(sc, kb.row(0), PauliBasis::z).detected);

    // Length mismatches are rejected.
    CHECK_THROWS_AS(logical_flips(sc, BitVector(3), PauliBasis::z), std::invalid_argument);
    CHECK_THROWS_AS(logical_flips(sc, BitVector(3), PauliBasis::x), std::invalid_argument);
}

TEST_CASE("first-round outcome errors flip extractions per the seam window") {
    DeformedCode dc = two_patch_deformed(2);
    SpacetimeCode sc = build_spacetime(dc, 2);
    std::size_t n = dc.n(), nb = dc.n_bar();
    std::size_t r_z = dc.base.h_z.rows(), rbz = dc.deformed.h_z.rows();
    std::size_t out0 = 2 * n + nb;
    BitMatrix y = dc.alphas.alpha.mul(dc.base.j_z).mul(dc.glue.r);

    for (std::size_t j = 0; j < rbz; ++j) {
        BitVector ex(sc.z_layout.size());
        ex.set(out0 + j, true);
        FlipRecord rec = logical_flips(sc, ex, PauliBasis::x);
        for (std::size_t row = 0; row < y.rows(); ++row) {
            bool expect = j >= r_z && y.get(row, j - r_z);
            CHECK(rec.outcomes.get(row) == expect);
        }
        // Second-round outcome errors never flip extractions.
        BitVector ex2(sc.z_layout.size());
        ex2.set(out0 + rbz + j, true);
        CHECK(!logical_flips(sc, ex2, PauliBasis::x).outcomes.any());
    }
}

TEST_CASE("outcome extraction from one round of deformed Z checks") {
    DeformedCode dc = two_patch_deformed(2);
    std::size_t r_z = dc.base.h_z.rows(), n_g = dc.glue.n_g();
    BitVector mu(r_z + n_g);
    CHECK(!extract_logical_outcomes(dc, mu).any());

    BitMatrix y = dc.alphas.alpha.mul(dc.base.j_z).mul(dc.glue.r);
    for (std::size_t v = 0; v < n_g; ++v) {
        BitVector one(r_z + n_g);
        one.set(r_z + v, true);
        BitVector out = extract_logical_outcomes(dc, one);
        for (std::size_t row = 0; row < y.rows(); ++row)
            CHECK(out.get(row) == y.get(row, v));
    }
    // Base-check bits sit outside the extraction window.
    BitVector base_bit(r_z + n_g);
    base_bit.set(0, true);
    CHECK(!extract_logical_outcomes(dc, base_bit).any());

    CHECK_THROWS_AS(extract_logical_outcomes(dc, BitVector(r_z)), std::invalid_argument);
}

TEST_CASE("mutated spacetime matrices are caught") {
    DeformedCode dc = two_patch_deformed(2);
    SpacetimeCode sc = build_spacetime(dc, 2);

    SpacetimeCode bad = sc;
    bad.h_st_x.flip(0, 0);
    CHECK(!verify_spacetime_consistency(bad, dc, 50, 1).all_pass());

    SpacetimeCode bad2 = sc;
    bad2.j_st_z.flip(0, 0);
    CHECK(!verify_spacetime_consistency(bad2, dc, 400, 1).all_pass());

    SpacetimeCode bad3 = sc;
    bad3.j_st_oc.flip(0, bad3.j_st_oc.cols() - 1);
    CHECK(!verify_spacetime_consistency(bad3, dc, 50, 1).all_pass());
}
