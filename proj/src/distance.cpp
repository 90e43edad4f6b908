#include "qsurgery/distance.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace qsurgery {

namespace {

/// Minimum weight over the coset e0 + rowspace(kernel). Every kernel basis
/// row from the echelon reduction owns a distinct free column and e0 is zero
/// on all free columns, so an element combining w basis rows has weight >= w;
/// enumerating by w and stopping at the incumbent weight is therefore exact.
std::size_t coset_min_weight(const BitVector& e0, const BitMatrix& kernel, std::size_t cap) {
    std::size_t best = e0.weight();
    std::size_t m = kernel.rows();
    std::vector<BitVector> stack_xor;
    std::vector<std::size_t> idx;
    for (std::size_t w = 1; w <= cap && w < best && w <= m; ++w) {
        idx.assign(w, 0);
        stack_xor.assign(w + 1, e0);
        std::size_t depth = 0;
        while (true) {
            if (depth == w) {
                best = std::min(best, stack_xor[w].weight());
                if (best <= w) return best; // cannot improve at this or deeper w
            }
            if (depth == w || idx[depth] == m) {
                if (depth == 0) break;
                --depth;
                ++idx[depth];
                continue;
            }
            stack_xor[depth + 1] = stack_xor[depth];
            stack_xor[depth + 1] ^= kernel.row(idx[depth]);
            std::size_t next = idx[depth] + 1;
            ++depth;
            if (depth < w) idx[depth] = next;
        }
    }
    return best;
}

} // namespace

DistanceResult error_wise_distance(const DistanceQuery& q) {
    if (q.psi.size() != q.j.rows())
        throw std::invalid_argument("error_wise_distance: psi length must equal j rows");
    if (q.h.cols() != q.j.cols())
        throw std::invalid_argument("error_wise_distance: h and j widths differ");

    BitMatrix a = vstack(q.h, q.j);
    BitVector target(a.rows());
    for (std::size_t r = 0; r < q.psi.size(); ++r)
        target.set(q.h.rows() + r, q.psi.get(r));

    BitMatrix b(a.rows(), 1);
    for (std::size_t r = 0; r < a.rows(); ++r) b.set(r, 0, target.get(r));
    auto e0t = solve_right(a, b);
    if (!e0t) return {DistanceKind::infinite, 0};

    BitVector e0 = e0t->col(0);
    BitMatrix kernel = kernel_basis(a);
    std::size_t w = coset_min_weight(e0, kernel, q.cap);
    if (w <= q.cap) return {DistanceKind::found, w};
    return {DistanceKind::above_cap, 0};
}

std::vector<DistanceResult> distance_profile(const BitMatrix& h, const BitMatrix& j,
                                             std::size_t cap) {
    if (j.rows() > 16)
        throw std::invalid_argument("distance_profile: more than 16 logical rows");
    std::vector<DistanceResult> out;
    out.reserve(1ull << j.rows());
    for (std::uint64_t mask = 0; mask < (1ull << j.rows()); ++mask) {
        BitVector psi(j.rows());
        for (std::size_t r = 0; r < j.rows(); ++r) psi.set(r, (mask >> r) & 1);
        out.push_back(error_wise_distance({h, j, psi, cap}));
    }
    return out;
}

namespace {

std::string kind_str(const DistanceResult& r) {
    switch (r.kind) {
    case DistanceKind::found: return std::to_string(r.weight);
    case DistanceKind::above_cap: return "above-cap";
    case DistanceKind::infinite: return "infinite";
    }
    return "?";
}

} // namespace

Report lemma1_verify(const BitMatrix& h, const BitMatrix& j, const BitMatrix& phi,
                     std::size_t cap) {
    if (phi.cols() != j.rows())
        throw std::invalid_argument("lemma1_verify: phi columns must equal j rows");
    if (j.rows() > 16 || phi.rows() > 16)
        throw std::invalid_argument("lemma1_verify: more than 16 logical rows");

    BitMatrix pj = phi.mul(j);
    std::vector<DistanceResult> fine = distance_profile(h, j, cap);

    Report rep;
    for (std::uint64_t mask = 0; mask < (1ull << phi.rows()); ++mask) {
        BitVector psi(phi.rows());
        for (std::size_t r = 0; r < phi.rows(); ++r) psi.set(r, (mask >> r) & 1);
        DistanceResult lhs = error_wise_distance({h, pj, psi, cap});

        // Minimum over the preimage of psi under phi.
        DistanceResult rhs{DistanceKind::infinite, 0};
        bool rhs_above = false;
        for (std::uint64_t sub = 0; sub < (1ull << j.rows()); ++sub) {
            BitVector star(j.rows());
            for (std::size_t r = 0; r < j.rows(); ++r) star.set(r, (sub >> r) & 1);
            if (!(phi.mul_vec(star) == psi)) continue;
            const DistanceResult& d = fine[sub];
            if (d.kind == DistanceKind::found &&
                (rhs.kind != DistanceKind::found || d.weight < rhs.weight))
                rhs = d;
            if (d.kind == DistanceKind::above_cap) rhs_above = true;
        }
        if (rhs.kind != DistanceKind::found && rhs_above) rhs = {DistanceKind::above_cap, 0};

        bool pass;
        if (lhs.kind == DistanceKind::found && rhs.kind == DistanceKind::found)
            pass = lhs.weight == rhs.weight;
        else if (rhs.kind == DistanceKind::above_cap)
            // An above-cap preimage entry can only hide weights > cap, so the
            // sides agree iff the combined side is also beyond the cap.
            pass = lhs.kind == DistanceKind::above_cap;
        else
            pass = lhs.kind == rhs.kind;
        rep.items.push_back({"psi=" + std::to_string(mask), pass,
                             "lhs " + kind_str(lhs) + ", rhs " + kind_str(rhs)});
    }
    return rep;
}

namespace {

struct FamilyTally {
    std::size_t proven = 0, unresolved = 0, violated = 0;
};

/// Audits lhs >= min(rhs, trunc) for one psi, where trunc = 0 means no
/// truncation. Distances above the cap are treated as "> cap".
AuditEntry audit_one(const std::string& name, std::uint64_t mask, const BitMatrix& h_lhs,
                     const BitMatrix& j_lhs, const BitMatrix& h_rhs, const BitMatrix& j_rhs,
                     std::size_t trunc, std::size_t cap) {
    AuditEntry e;
    e.inequality = name;
    e.psi = mask;
    BitVector psi(j_lhs.rows());
    for (std::size_t r = 0; r < psi.size(); ++r) psi.set(r, (mask >> r) & 1);
    e.lhs = error_wise_distance({h_lhs, j_lhs, psi, cap});
    e.rhs = error_wise_distance({h_rhs, j_rhs, psi, cap});

    // Resolve the right-hand side min{rhs, trunc}.
    bool bound_known = true;
    if (e.rhs.kind == DistanceKind::found)
        e.bound = trunc ? std::min(e.rhs.weight, trunc) : e.rhs.weight;
    else if (e.rhs.kind == DistanceKind::infinite && trunc)
        e.bound = trunc;
    else if (e.rhs.kind == DistanceKind::infinite)
        e.bound = 0; // infinite rhs without truncation: see below
    else if (trunc && trunc <= cap)
        e.bound = trunc; // rhs > cap >= trunc, so the min resolves to trunc
    else
        bound_known = false;

    if (e.rhs.kind == DistanceKind::infinite && !trunc) {
        // Bound is infinite: lhs must be infinite too. An above-cap lhs is
        // unresolved rather than disproved.
        e.proven = e.lhs.kind == DistanceKind::infinite;
        e.violated = e.lhs.kind == DistanceKind::found;
        return e;
    }
    if (!bound_known) {
        // rhs beyond cap: lhs >= bound provable only if lhs is also beyond cap.
        e.proven = e.lhs.kind != DistanceKind::found;
        e.violated = false;
        return e;
    }
    if (e.lhs.kind == DistanceKind::found) {
        e.proven = e.lhs.weight >= e.bound;
        e.violated = !e.proven;
    } else {
        e.proven = true; // lhs infinite or > cap >= any bound resolved within cap
        e.violated = false;
    }
    return e;
}

} // namespace

Theorem1Audit theorem1_audit(const SpacetimeCode& sc, const DeformedCode& dc, std::size_t cap,
                             std::size_t column_budget) {
    if (sc.x_layout.size() > column_budget || sc.z_layout.size() > column_budget)
        throw std::invalid_argument("theorem1_audit: spacetime instance exceeds column budget");
    std::size_t ku = dc.alphas.k() - dc.alphas.q(), q = dc.alphas.q();
    if (ku > 16 || q > 16)
        throw std::invalid_argument("theorem1_audit: more than 16 logical rows");

    const CssCode& base = dc.base;
    BitMatrix apjx = dc.alphas.alpha_perp.mul(base.j_x);
    BitMatrix aprjz = dc.alphas.alpha_perp_r.mul(base.j_z);
    BitMatrix ajz = dc.alphas.alpha.mul(base.j_z);

    Theorem1Audit audit;
    auto run_family = [&](const std::string& name, const BitMatrix& h_lhs,
                          const BitMatrix& j_lhs, const BitMatrix& h_rhs,
                          const BitMatrix& j_rhs, std::size_t trunc) {
        FamilyTally tally;
        for (std::uint64_t mask = 0; mask < (1ull << j_lhs.rows()); ++mask) {
            AuditEntry e =
                audit_one(name, mask, h_lhs, j_lhs, h_rhs, j_rhs, trunc, cap);
            if (e.violated)
                ++tally.violated;
            else if (e.proven)
                ++tally.proven;
            else
                ++tally.unresolved;
            audit.entries.push_back(std::move(e));
        }
        audit.report.items.push_back(
            {name, tally.violated == 0,
             std::to_string(tally.proven) + " proven, " + std::to_string(tally.unresolved) +
                 " unresolved, " + std::to_string(tally.violated) + " violated"});
    };

    run_family("spacetime X logicals vs min(original, d_R)", sc.h_st_x, sc.j_st_x, base.h_x,
               apjx, dc.d_r);
    run_family("spacetime Z logicals vs original", sc.h_st_z, sc.j_st_z, base.h_z, aprjz, 0);
    run_family("spacetime measured logicals vs original", sc.h_st_z, sc.j_st_mz, base.h_z,
               ajz, 0);
    run_family("spacetime outcomes vs min(original, d_T)", sc.h_st_z, sc.j_st_oc, base.h_z,
               ajz, sc.d_t);
    run_family("deformed X logicals vs min(original, d_R)", dc.deformed.h_x, dc.deformed.j_x,
               base.h_x, apjx, dc.d_r);
    run_family("deformed Z logicals vs original", dc.deformed.h_z, dc.deformed.j_z, base.h_z,
               aprjz, 0);
    return audit;
}

} // namespace qsurgery
