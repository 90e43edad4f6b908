#include "qsurgery/spacetime.hpp"

#include <random>
#include <stdexcept>
#include <string>

namespace qsurgery {

namespace {

BitMatrix ones_row(std::size_t n) {
    BitMatrix m(1, n);
    for (std::size_t i = 0; i < n; ++i) m.set(0, i, true);
    return m;
}

BitMatrix basis_row(std::size_t n, std::size_t j) {
    BitMatrix m(1, n);
    m.set(0, j, true);
    return m;
}

BitMatrix hcat(std::initializer_list<BitMatrix> blocks) {
    BitMatrix out;
    bool first = true;
    for (const auto& b : blocks) {
        if (first) {
            out = b;
            first = false;
        } else {
            out = hstack(out, b);
        }
    }
    return out;
}

} // namespace

SpacetimeCode build_spacetime(const DeformedCode& dc, std::size_t d_t) {
    if (d_t < 2) throw std::invalid_argument("build_spacetime: d_t must be >= 2");
    dc.deformed.ensure_valid("build_spacetime");

    const CssCode& bar = dc.deformed;
    const CssCode& base = dc.base;
    std::size_t n = base.n(), nb = bar.n(), r_g = nb - n;
    std::size_t rbx = bar.h_x.rows(), rbz = bar.h_z.rows();
    std::size_t r_z = base.h_z.rows();
    std::size_t q = dc.alphas.q(), ku = dc.alphas.k() - q;

    BitMatrix chain = make_repetition_chain(d_t); // (d_t-1) x d_t
    BitMatrix e_first = basis_row(d_t, 0);
    BitMatrix e_last = basis_row(d_t, d_t - 1);
    BitMatrix ones = ones_row(d_t - 1);
    BitMatrix id_rbx = BitMatrix::identity(rbx);
    BitMatrix id_rbz = BitMatrix::identity(rbz);
    BitMatrix gamma1 = hstack(BitMatrix::identity(r_z), BitMatrix(r_z, rbz - r_z));

    SpacetimeCode sc;
    sc.d_t = d_t;

    // Checks against Z errors: every first/last-round X outcome is verifiable
    // because the bracketing states are X-stabilizer eigenstates.
    sc.h_st_x = vstack(
        vstack(hcat({bar.h_x, BitMatrix(rbx, (d_t - 1) * nb), BitMatrix(rbx, nb),
                     kron(e_first, id_rbx)}),
               hcat({BitMatrix((d_t - 1) * rbx, nb), kron(BitMatrix::identity(d_t - 1), bar.h_x),
                     BitMatrix((d_t - 1) * rbx, nb), kron(chain, id_rbx)})),
        hcat({BitMatrix(rbx, nb), BitMatrix(rbx, (d_t - 1) * nb), bar.h_x,
              kron(e_last, id_rbx)}));

    // Checks against X errors: only base-code Z outcomes are verifiable at the
    // boundary rounds, and boundary epochs expose only base data qubits.
    sc.h_st_z = vstack(
        vstack(hcat({base.h_z, BitMatrix(r_z, (d_t - 1) * nb), BitMatrix(r_z, n),
                     kron(e_first, gamma1)}),
               hcat({BitMatrix((d_t - 1) * rbz, n), kron(BitMatrix::identity(d_t - 1), bar.h_z),
                     BitMatrix((d_t - 1) * rbz, n), kron(chain, id_rbz)})),
        hcat({BitMatrix(r_z, n), BitMatrix(r_z, (d_t - 1) * nb), base.h_z,
              kron(e_last, gamma1)}));

    BitMatrix aprjz = dc.alphas.alpha_perp_r.mul(base.j_z); // (k-q) x n
    BitMatrix ajz = dc.alphas.alpha.mul(base.j_z);          // q x n
    BitMatrix ajz_eta = hstack(ajz, BitMatrix(q, r_g));     // q x nb
    BitMatrix y_g2 = hstack(BitMatrix(q, r_z), ajz.mul(dc.glue.r)); // q x rbz

    sc.j_st_x = hcat({bar.j_x, kron(ones, bar.j_x), bar.j_x, BitMatrix(ku, d_t * rbx)});
    sc.j_st_z = hcat({aprjz, kron(ones, bar.j_z), aprjz, BitMatrix(ku, d_t * rbz)});
    sc.j_st_mz = hcat({ajz, kron(ones, ajz_eta), ajz, BitMatrix(q, d_t * rbz)});
    sc.j_st_oc =
        hcat({ajz, BitMatrix(q, (d_t - 1) * nb), BitMatrix(q, n), kron(e_first, y_g2)});

    for (std::size_t t = 0; t <= d_t; ++t)
        for (std::size_t i = 0; i < nb; ++i)
            sc.x_layout.push_back({ColumnKind::data, t, i});
    for (std::size_t t = 1; t <= d_t; ++t)
        for (std::size_t j = 0; j < rbx; ++j)
            sc.x_layout.push_back({ColumnKind::outcome, t, j});

    for (std::size_t i = 0; i < n; ++i) sc.z_layout.push_back({ColumnKind::data, 0, i});
    for (std::size_t t = 1; t < d_t; ++t)
        for (std::size_t i = 0; i < nb; ++i)
            sc.z_layout.push_back({ColumnKind::data, t, i});
    for (std::size_t i = 0; i < n; ++i) sc.z_layout.push_back({ColumnKind::data, d_t, i});
    for (std::size_t t = 1; t <= d_t; ++t)
        for (std::size_t j = 0; j < rbz; ++j)
            sc.z_layout.push_back({ColumnKind::outcome, t, j});

    if (sc.x_layout.size() != sc.h_st_x.cols() || sc.z_layout.size() != sc.h_st_z.cols())
        throw std::logic_error("build_spacetime: layout does not cover the columns");
    return sc;
}

FlipRecord logical_flips(const SpacetimeCode& sc, const BitVector& e, PauliBasis basis) {
    FlipRecord rec;
    if (basis == PauliBasis::z) {
        if (e.size() != sc.x_layout.size())
            throw std::invalid_argument("logical_flips: Z-error length must match x_layout");
        rec.detected = sc.h_st_x.mul_vec(e).any();
        rec.unmeasured = sc.j_st_x.mul_vec(e);
    } else {
        if (e.size() != sc.z_layout.size())
            throw std::invalid_argument("logical_flips: X-error length must match z_layout");
        rec.detected = sc.h_st_z.mul_vec(e).any();
        rec.unmeasured = sc.j_st_z.mul_vec(e);
        rec.measured = sc.j_st_mz.mul_vec(e);
        rec.outcomes = sc.j_st_oc.mul_vec(e);
    }
    return rec;
}

BitMatrix outcome_extractor(const DeformedCode& dc) {
    return dc.alphas.alpha.mul(dc.base.j_z).mul(dc.glue.r); // q x n_G
}

BitVector extract_logical_outcomes(const DeformedCode& dc, const BitVector& mu) {
    std::size_t r_z = dc.base.h_z.rows(), n_g = dc.glue.n_g();
    if (mu.size() != r_z + n_g)
        throw std::invalid_argument("extract_logical_outcomes: mu length must be r_Z + n_G");
    BitVector seam(n_g);
    for (std::size_t i = 0; i < n_g; ++i) seam.set(i, mu.get(r_z + i));
    return outcome_extractor(dc).mul_vec(seam);
}

namespace {

struct Layout {
    std::size_t n_data_first, n_data_mid, n_data_last, n_checks, d_t;
    std::size_t data_cols() const {
        return n_data_first + (d_t - 1) * n_data_mid + n_data_last;
    }
    std::size_t cols() const { return data_cols() + d_t * n_checks; }
    std::size_t outcome_col(std::size_t round, std::size_t j) const {
        return data_cols() + (round - 1) * n_checks + j;
    }
};

/// Sum of the per-epoch data blocks of a spacetime error, with boundary
/// epochs zero-padded on the seam coordinates when they are narrower.
BitVector effective_error(const BitVector& e, const Layout& lay) {
    std::size_t width = lay.n_data_mid;
    BitVector acc(width);
    std::size_t off = 0;
    for (std::size_t i = 0; i < lay.n_data_first; ++i)
        if (e.get(off + i)) acc.flip(i);
    off += lay.n_data_first;
    for (std::size_t t = 1; t < lay.d_t; ++t, off += lay.n_data_mid)
        for (std::size_t i = 0; i < width; ++i)
            if (e.get(off + i)) acc.flip(i);
    for (std::size_t i = 0; i < lay.n_data_last; ++i)
        if (e.get(off + i)) acc.flip(i);
    return acc;
}

BitVector head(const BitVector& v, std::size_t n) {
    BitVector h(n);
    for (std::size_t i = 0; i < n; ++i) h.set(i, v.get(i));
    return h;
}

} // namespace

Report verify_spacetime_consistency(const SpacetimeCode& sc, const DeformedCode& dc,
                                    std::size_t samples, std::uint64_t seed) {
    Report rep;
    auto add = [&rep](std::string name, bool pass, std::string detail = "") {
        rep.items.push_back({std::move(name), pass, std::move(detail)});
    };

    const CssCode& bar = dc.deformed;
    const CssCode& base = dc.base;
    std::size_t n = base.n(), nb = bar.n();
    std::size_t rbx = bar.h_x.rows(), rbz = bar.h_z.rows();
    std::size_t r_z = base.h_z.rows();
    std::size_t q = dc.alphas.q(), ku = dc.alphas.k() - q;
    std::size_t d_t = sc.d_t;
    Layout lx{nb, nb, nb, rbx, d_t};
    Layout lz{n, nb, n, rbz, d_t};

    add("x layout sizes",
        sc.x_layout.size() == lx.cols() && sc.h_st_x.cols() == lx.cols() &&
            sc.j_st_x.cols() == lx.cols() && sc.h_st_x.rows() == (d_t + 1) * rbx,
        std::to_string(lx.cols()) + " columns");
    add("z layout sizes",
        sc.z_layout.size() == lz.cols() && sc.h_st_z.cols() == lz.cols() &&
            sc.j_st_z.cols() == lz.cols() && sc.j_st_mz.cols() == lz.cols() &&
            sc.j_st_oc.cols() == lz.cols() &&
            sc.h_st_z.rows() == 2 * r_z + (d_t - 1) * rbz,
        std::to_string(lz.cols()) + " columns");
    add("generator row counts",
        sc.j_st_x.rows() == ku && sc.j_st_z.rows() == ku && sc.j_st_mz.rows() == q &&
            sc.j_st_oc.rows() == q,
        "");

    {
        // First/last round verification plus outcome comparisons telescope.
        BitMatrix chain = make_repetition_chain(d_t);
        BitMatrix sum = ones_row(d_t - 1).mul(chain);
        sum.flip(0, 0);
        sum.flip(0, d_t - 1);
        add("repetition boundary identity", sum.is_zero(), "");
    }

    {
        // The seam-outcome combination that extracts the measured operators
        // must reduce to the operators themselves on data qubits.
        BitMatrix ajz = dc.alphas.alpha.mul(base.j_z);
        BitMatrix y_g2 = hstack(BitMatrix(q, r_z), ajz.mul(dc.glue.r));
        add("seam extraction identity",
            y_g2.mul(bar.h_z) == hstack(ajz, BitMatrix(q, nb - n)), "");
    }

    {
        // Independent entrywise reconstruction of the X-side check matrix.
        BitMatrix ex((d_t + 1) * rbx, lx.cols());
        for (std::size_t j = 0; j < rbx; ++j) {
            for (std::size_t c = 0; c < nb; ++c) {
                if (bar.h_x.get(j, c)) {
                    ex.set(j, c, true);                               // before round 1
                    ex.set(d_t * rbx + j, d_t * nb + c, true);        // after round d_t
                    for (std::size_t t = 1; t < d_t; ++t)
                        ex.set(t * rbx + j, t * nb + c, true);        // between rounds
                }
            }
            ex.set(j, lx.outcome_col(1, j), true);
            ex.set(d_t * rbx + j, lx.outcome_col(d_t, j), true);
            for (std::size_t t = 1; t < d_t; ++t) {
                ex.set(t * rbx + j, lx.outcome_col(t, j), true);
                ex.set(t * rbx + j, lx.outcome_col(t + 1, j), true);
            }
        }
        add("x block structure", ex == sc.h_st_x, "");
    }

    {
        // Independent entrywise reconstruction of the Z-side check matrix.
        BitMatrix ez(2 * r_z + (d_t - 1) * rbz, lz.cols());
        std::size_t last_rows = r_z + (d_t - 1) * rbz;
        for (std::size_t j = 0; j < r_z; ++j) {
            for (std::size_t c = 0; c < n; ++c)
                if (base.h_z.get(j, c)) {
                    ez.set(j, c, true);
                    ez.set(last_rows + j, n + (d_t - 1) * nb + c, true);
                }
            ez.set(j, lz.outcome_col(1, j), true);
            ez.set(last_rows + j, lz.outcome_col(d_t, j), true);
        }
        for (std::size_t t = 1; t < d_t; ++t)
            for (std::size_t j = 0; j < rbz; ++j) {
                std::size_t row = r_z + (t - 1) * rbz + j;
                for (std::size_t c = 0; c < nb; ++c)
                    if (bar.h_z.get(j, c)) ez.set(row, n + (t - 1) * nb + c, true);
                ez.set(row, lz.outcome_col(t, j), true);
                ez.set(row, lz.outcome_col(t + 1, j), true);
            }
        add("z block structure", ez == sc.h_st_z, "");
    }

    {
        // Entrywise reconstruction of the four generator matrices.
        BitMatrix aprjz = dc.alphas.alpha_perp_r.mul(base.j_z);
        BitMatrix ajz = dc.alphas.alpha.mul(base.j_z);
        BitMatrix y = ajz.mul(dc.glue.r);
        BitMatrix jx(ku, lx.cols()), jz(ku, lz.cols()), jmz(q, lz.cols()), joc(q, lz.cols());
        for (std::size_t t = 0; t <= d_t; ++t)
            for (std::size_t r = 0; r < ku; ++r)
                for (std::size_t c = 0; c < nb; ++c)
                    if (bar.j_x.get(r, c)) jx.set(r, t * nb + c, true);
        auto z_data_col = [&](std::size_t t, std::size_t c) {
            return t == 0 ? c : n + (t - 1) * nb + c;
        };
        for (std::size_t t = 0; t <= d_t; ++t) {
            bool boundary = (t == 0 || t == d_t);
            for (std::size_t r = 0; r < ku; ++r)
                for (std::size_t c = 0; c < (boundary ? n : nb); ++c)
                    if (boundary ? aprjz.get(r, c) : bar.j_z.get(r, c))
                        jz.set(r, z_data_col(t, c), true);
            for (std::size_t r = 0; r < q; ++r)
                for (std::size_t c = 0; c < n; ++c)
                    if (ajz.get(r, c)) jmz.set(r, z_data_col(t, c), true);
        }
        for (std::size_t r = 0; r < q; ++r) {
            for (std::size_t c = 0; c < n; ++c)
                if (ajz.get(r, c)) joc.set(r, c, true);
            for (std::size_t v = 0; v < y.cols(); ++v)
                if (y.get(r, v)) joc.set(r, lz.outcome_col(1, r_z + v), true);
        }
        add("generator block structure",
            jx == sc.j_st_x && jz == sc.j_st_z && jmz == sc.j_st_mz && joc == sc.j_st_oc, "");
    }

    std::mt19937_64 rng(seed);
    auto random_kernel_element = [&rng](const BitMatrix& basis, std::size_t cols) {
        BitVector e(cols);
        for (std::size_t b = 0; b < basis.rows(); ++b)
            if (rng() & 1) e ^= basis.row(b);
        return e;
    };

    {
        // Z errors that fire no check act on logicals exactly like their
        // per-epoch sum does on the deformed code.
        BitMatrix kb = kernel_basis(sc.h_st_x);
        bool ok = true;
        for (std::size_t s = 0; s < samples && ok; ++s) {
            BitVector e = random_kernel_element(kb, lx.cols());
            BitVector ueff = effective_error(e, lx);
            ok = !bar.h_x.mul_vec(ueff).any() &&
                 bar.j_x.mul_vec(ueff) == sc.j_st_x.mul_vec(e);
        }
        add("z-error effective reduction", ok, std::to_string(samples) + " kernel samples");
    }

    {
        // Same for X errors, including the measured-operator generators.
        BitMatrix kb = kernel_basis(sc.h_st_z);
        BitMatrix aprjz = dc.alphas.alpha_perp_r.mul(base.j_z);
        BitMatrix ajz = dc.alphas.alpha.mul(base.j_z);
        bool ok = true;
        for (std::size_t s = 0; s < samples && ok; ++s) {
            BitVector e = random_kernel_element(kb, lz.cols());
            BitVector ueff = head(effective_error(e, lz), n);
            ok = !base.h_z.mul_vec(ueff).any() &&
                 aprjz.mul_vec(ueff) == sc.j_st_z.mul_vec(e) &&
                 ajz.mul_vec(ueff) == sc.j_st_mz.mul_vec(e);
        }
        add("x-error effective reduction", ok, std::to_string(samples) + " kernel samples");
    }

    {
        // Exhaustive sweep of undetected X errors below the time distance:
        // each must leave an error-free round whose prefix sum explains the
        // extracted outcomes.
        BitMatrix ajz = dc.alphas.alpha.mul(base.j_z);
        std::size_t cols = lz.cols();
        std::size_t max_w = d_t - 1;
        std::uint64_t budget = 1ull << 24, total = 0;
        for (std::size_t w = 1; w <= max_w; ++w) {
            std::uint64_t c = 1;
            for (std::size_t i = 0; i < w && c <= budget; ++i)
                c = c * (cols - i) / (i + 1);
            total += c;
            if (total > budget) {
                max_w = w - 1;
                break;
            }
        }
        std::vector<BitVector> colv;
        colv.reserve(cols);
        for (std::size_t c = 0; c < cols; ++c) colv.push_back(sc.h_st_z.col(c));
        bool ok = true;
        std::size_t kernel_hits = 0;
        std::vector<std::size_t> idx;
        for (std::size_t w = 1; w <= max_w && ok; ++w) {
            idx.assign(w, 0);
            for (std::size_t i = 0; i < w; ++i) idx[i] = i;
            while (true) {
                BitVector syn(sc.h_st_z.rows());
                for (std::size_t i : idx) syn ^= colv[i];
                if (!syn.any()) {
                    ++kernel_hits;
                    BitVector e(cols);
                    for (std::size_t i : idx) e.set(i, true);
                    // Locate a measurement round free of outcome errors.
                    std::size_t free_round = 0;
                    for (std::size_t t = 1; t <= d_t && free_round == 0; ++t) {
                        bool clean = true;
                        for (std::size_t i : idx)
                            if (sc.z_layout[i].kind == ColumnKind::outcome &&
                                sc.z_layout[i].round == t)
                                clean = false;
                        if (clean) free_round = t;
                    }
                    if (free_round == 0) {
                        ok = false; // cannot happen for weight < d_t
                        break;
                    }
                    // Data errors strictly before the error-free round.
                    BitVector ueff(n);
                    for (std::size_t i : idx) {
                        const SpacetimeColumn& sc_col = sc.z_layout[i];
                        if (sc_col.kind == ColumnKind::data && sc_col.round < free_round &&
                            sc_col.index < n)
                            ueff.flip(sc_col.index);
                    }
                    if (base.h_z.mul_vec(ueff).any() ||
                        ajz.mul_vec(ueff) != sc.j_st_oc.mul_vec(e)) {
                        ok = false;
                        break;
                    }
                }
                // next combination
                std::size_t i = w;
                while (i > 0 && idx[i - 1] == cols - w + i - 1) --i;
                if (i == 0) break;
                ++idx[i - 1];
                for (std::size_t j2 = i; j2 < w; ++j2) idx[j2] = idx[j2 - 1] + 1;
            }
        }
        add("outcome effective reduction",
            ok, "exhaustive to weight " + std::to_string(max_w) + ", " +
                    std::to_string(kernel_hits) + " undetected errors");
    }

    return rep;
}

} // namespace qsurgery
