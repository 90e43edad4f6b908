#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsurgery/distance.hpp"

#include <random>

using namespace qsurgery;

namespace {

/// Oracle: scan all 2^n error vectors.
DistanceResult naive_distance(const BitMatrix& h, const BitMatrix& j, const BitVector& psi,
                              std::size_t cap) {
    std::size_t n = h.cols();
    REQUIRE(n <= 20);
    std::size_t best = n + 1;
    for (std::uint64_t mask = 0; mask < (1ull << n); ++mask) {
        BitVector e(n);
        for (std::size_t i = 0; i < n; ++i) e.set(i, (mask >> i) & 1);
        if (h.mul_vec(e).any()) continue;
        if (!(j.mul_vec(e) == psi)) continue;
        best = std::min(best, e.size() ? e.weight() : 0);
    }
    if (best == n + 1) return {DistanceKind::infinite, 0};
    if (best > cap) return {DistanceKind::above_cap, 0};
    return {DistanceKind::found, best};
}

BitMatrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double density) {
    BitMatrix m(r, c);
    std::bernoulli_distribution bit(density);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t k = 0; k < c; ++k)
            if (bit(rng)) m.set(i, k, true);
    return m;
}

DeformedCode two_patch_deformed(std::size_t d_r) {
    CssCode s2 = make_surface(2);
    CssCode comp = make_composite(s2, s2, 1);
    AlphaPair ap = make_injection_alphas(1, 1, 1);
    GlueCode base = build_graph_glue(comp, ap, GluePolicy::path);
    return assemble_deformed(comp, ap, base, d_r);
}

CssCode bare_qubit() {
    CssCode c;
    c.h_x = BitMatrix(0, 1);
    c.h_z = BitMatrix(0, 1);
    c.j_x = BitMatrix::from_rows({{1}});
    c.j_z = BitMatrix::from_rows({{1}});
    return c;
}

} // namespace

TEST_CASE("error-wise distance on pinned instances") {
    BitMatrix h = BitMatrix::from_rows({{1, 1, 0}, {0, 1, 1}});
    BitMatrix j = BitMatrix::from_rows({{1, 1, 1}});
    CHECK(error_wise_distance({h, j, BitVector::from_bits({1}), 3}).weight == 3);
    CHECK(error_wise_distance({h, j, BitVector::from_bits({0}), 3}).weight == 0);

    // Inconsistent system: kernel of the identity is trivial.
    BitMatrix h2 = BitMatrix::identity(2);
    BitMatrix j2 = BitMatrix::from_rows({{1, 1}});
    CHECK(error_wise_distance({h2, j2, BitVector::from_bits({1}), 2}).kind ==
          DistanceKind::infinite);

    // Repetition code: the logical needs distance-many flips.
    BitMatrix h5 = make_repetition_chain(5);
    BitMatrix j5(1, 5);
    for (std::size_t i = 0; i < 5; ++i) j5.set(0, i, true);
    CHECK(error_wise_distance({h5, j5, BitVector::from_bits({1}), 5}).weight == 5);
    CHECK(error_wise_distance({h5, j5, BitVector::from_bits({1}), 3}).kind ==
          DistanceKind::above_cap);
}

TEST_CASE("error-wise distance matches the exhaustive oracle") {
    std::mt19937_64 rng(424242);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 6 + rng() % 7;
        BitMatrix h = random_matrix(rng, 2 + rng() % 3, n, 0.4);
        BitMatrix j = random_matrix(rng, 1 + rng() % 2, n, 0.5);
        BitVector psi(j.rows());
        for (std::size_t r = 0; r < j.rows(); ++r) psi.set(r, rng() & 1);
        std::size_t cap = 1 + rng() % n;
        DistanceResult fast = error_wise_distance({h, j, psi, cap});
        DistanceResult slow = naive_distance(h, j, psi, cap);
        CAPTURE(trial);
        CHECK(fast.kind == slow.kind);
        if (fast.kind == DistanceKind::found) CHECK(fast.weight == slow.weight);
    }
}

TEST_CASE("code distance agrees with the per-target minimum") {
    CssCode s3 = make_surface(3);
    std::size_t cap = s3.n();
    auto profile = distance_profile(s3.h_z, s3.j_z, cap);
    std::size_t best = cap + 1;
    for (std::size_t mask = 1; mask < profile.size(); ++mask) {
        REQUIRE(profile[mask].kind == DistanceKind::found);
        best = std::min(best, profile[mask].weight);
    }
    DistanceResult dx = exact_code_distance(s3, PauliBasis::x, cap);
    CHECK(best == dx.weight);
}

TEST_CASE("distance profile of a composite code respects block distances") {
    // One distance-2 register patch and one distance-2 noisy patch, measured
    // jointly: flipping the paired X logical costs 2; idle rows cost 2.
    CssCode comp = make_composite(make_surface(2), make_surface(2), 1);
    AlphaPair ap = make_injection_alphas(1, 1, 1);
    BitMatrix apjx = ap.alpha_perp.mul(comp.j_x);
    auto profile = distance_profile(comp.h_x, apjx, comp.n());
    CHECK(profile.size() == 2);
    CHECK(profile[0].weight == 0);
    CHECK(profile[1].weight >= 2);

    BitMatrix aprjz = ap.alpha_perp_r.mul(comp.j_z);
    auto zprof = distance_profile(comp.h_z, aprjz, comp.n());
    CHECK(zprof[1].weight >= 2);

    CHECK_THROWS_AS(distance_profile(BitMatrix(1, 20), BitMatrix(17, 20), 3),
                    std::invalid_argument);
}

TEST_CASE("triangle property of flip composition") {
    std::mt19937_64 rng(777);
    for (int trial = 0; trial < 10; ++trial) {
        std::size_t n = 8;
        BitMatrix h = random_matrix(rng, 3, n, 0.4);
        BitMatrix j = random_matrix(rng, 2, n, 0.5);
        auto profile = distance_profile(h, j, n);
        for (std::size_t a = 0; a < 4; ++a)
            for (std::size_t b = 0; b < 4; ++b) {
                if (profile[a].kind != DistanceKind::found ||
                    profile[b].kind != DistanceKind::found)
                    continue;
                if (profile[a ^ b].kind == DistanceKind::found)
                    CHECK(profile[a ^ b].weight <= profile[a].weight + profile[b].weight);
                else
                    CHECK(profile[a ^ b].kind != DistanceKind::infinite);
            }
    }
}

TEST_CASE("combining logical rows commutes with distance") {
    std::mt19937_64 rng(909);
    // Identity combination: trivial equality.
    BitMatrix h = random_matrix(rng, 2, 6, 0.4);
    BitMatrix j = random_matrix(rng, 2, 6, 0.5);
    CHECK(lemma1_verify(h, j, BitMatrix::identity(2), 6).all_pass());

    // Random instances with a genuine row combination.
    BitMatrix phi = BitMatrix::from_rows({{1, 1}});
    for (int trial = 0; trial < 25; ++trial) {
        BitMatrix h2 = random_matrix(rng, 2 + rng() % 2, 6, 0.4);
        BitMatrix j2 = random_matrix(rng, 2, 6, 0.5);
        CAPTURE(trial);
        CHECK(lemma1_verify(h2, j2, phi, 6).all_pass());
    }

    // Empty preimage: both sides infinite.
    BitMatrix phi0(1, 2);
    Report rep = lemma1_verify(h, j, phi0, 6);
    CHECK(rep.all_pass());

    // Random wider combinations.
    for (int trial = 0; trial < 10; ++trial) {
        BitMatrix h3 = random_matrix(rng, 3, 7, 0.35);
        BitMatrix j3 = random_matrix(rng, 3, 7, 0.5);
        BitMatrix phi3 = random_matrix(rng, 2, 3, 0.5);
        CAPTURE(trial);
        CHECK(lemma1_verify(h3, j3, phi3, 7).all_pass());
    }
}

TEST_CASE("theorem audit passes on the two-patch instance") {
    DeformedCode dc = two_patch_deformed(2);
    SpacetimeCode sc = build_spacetime(dc, 2);
    Theorem1Audit audit = theorem1_audit(sc, dc, 6);
    for (const auto& item : audit.report.items) {
        CAPTURE(item.name);
        CAPTURE(item.detail);
        CHECK(item.pass);
    }
    CHECK(audit.all_proven());
    CHECK(audit.entries.size() == 2 * 6); // six families, one logical row each
}

TEST_CASE("theorem audit with a bare physical noisy qubit") {
    CssCode comp = make_composite(make_surface(2), bare_qubit(), 1);
    AlphaPair ap = make_injection_alphas(1, 1, 1);
    GlueCode base = build_graph_glue(comp, ap, GluePolicy::path);
    DeformedCode dc = assemble_deformed(comp, ap, base, 2);
    SpacetimeCode sc = build_spacetime(dc, 2);
    Theorem1Audit audit = theorem1_audit(sc, dc, 6);
    for (const auto& item : audit.report.items) {
        CAPTURE(item.name);
        CAPTURE(item.detail);
        CHECK(item.pass);
    }
    CHECK(audit.all_proven());

    // The measured pair costs only one physical error to flip: d_noi = 1.
    for (const auto& e : audit.entries)
        if (e.inequality == "spacetime X logicals vs min(original, d_R)" && e.psi == 1)
            CHECK(e.rhs.weight == 1);
}

TEST_CASE("theorem audit flags a corrupted right-hand side") {
    DeformedCode dc = two_patch_deformed(2);
    SpacetimeCode sc = build_spacetime(dc, 2);
    DeformedCode lie = dc;
    // Make the measured operator equal to the unmeasured partner, so the
    // claimed measured-logical distance becomes infinite while the spacetime
    // side stays finite.
    lie.base.j_z.set_row(0, lie.base.j_z.row(1));
    Theorem1Audit audit = theorem1_audit(sc, lie, 6);
    CHECK(!audit.report.all_pass());
}

TEST_CASE("theorem audit guards its enumeration budget") {
    DeformedCode dc = two_patch_deformed(2);
    SpacetimeCode sc = build_spacetime(dc, 2);
    CHECK_THROWS_AS(theorem1_audit(sc, dc, 4, 10), std::invalid_argument);
}

TEST_CASE("theorem audit covers the fully measured case") {
    CssCode tri;
    tri.h_x = BitMatrix::from_rows({{1, 1, 0}, {0, 1, 1}, {1, 0, 1}});
    tri.h_z = BitMatrix(0, 3);
    tri.j_z = BitMatrix::from_rows({{1, 1, 1}});
    tri.j_x = BitMatrix::from_rows({{1, 0, 0}});
    AlphaPair ap = derive_alpha_pair(BitMatrix::identity(1));
    GlueCode g = build_graph_glue(tri, ap, GluePolicy::shared_x_check);
    DeformedCode dc = assemble_deformed(tri, ap, g, 2);
    SpacetimeCode sc = build_spacetime(dc, 2);
    Theorem1Audit audit = theorem1_audit(sc, dc, 6);
    CHECK(audit.report.all_pass());
    CHECK(audit.all_proven());
}
