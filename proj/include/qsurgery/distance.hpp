#pragma once

#include "qsurgery/spacetime.hpp"

#include <cstdint>
#include <vector>

namespace qsurgery {

/// Minimum weight of an error e with h·eᵀ = 0 and j·eᵀ = ψᵀ.
struct DistanceQuery {
    BitMatrix h;
    BitMatrix j;
    BitVector psi;
    std::size_t cap = 0; ///< search is exact for weights <= cap
};

/// Exact up to the cap: weight-ordered branch-and-bound over the solution
/// coset after reducing the stacked system to echelon form. `infinite` means
/// the system h·eᵀ = 0, j·eᵀ = ψᵀ has no solution at all.
DistanceResult error_wise_distance(const DistanceQuery& q);

/// error_wise_distance for every target vector, indexed by ψ read as an
/// integer (bit r of the index = row r of j). Guarded to j.rows() <= 16.
std::vector<DistanceResult> distance_profile(const BitMatrix& h, const BitMatrix& j,
                                             std::size_t cap);

/// Checks, for every ψ, that combining logical rows commutes with the
/// distance: d(h, φ·j, ψ) equals the minimum of d(h, j, ψ★) over all ψ★ with
/// φ·ψ★ᵀ = ψᵀ. Both sides are computed by exhaustive search up to the cap.
Report lemma1_verify(const BitMatrix& h, const BitMatrix& j, const BitMatrix& phi,
                     std::size_t cap);

/// One audited inequality instance: lhs >= bound must hold, where bound is
/// the right-hand side after any min{·, d_R/d_T} truncation.
struct AuditEntry {
    std::string inequality; ///< which bound family this belongs to
    std::uint64_t psi = 0;  ///< target flips, encoded as an integer
    DistanceResult lhs;     ///< spacetime-side (or deformed-side) distance
    DistanceResult rhs;     ///< original-code-side distance
    std::size_t bound = 0;  ///< resolved right-hand side, when provable
    bool proven = false;    ///< inequality established within the cap
    bool violated = false;  ///< inequality disproved (hard failure)
};

struct Theorem1Audit {
    Report report; ///< one summary item per inequality family
    std::vector<AuditEntry> entries;
    bool all_proven() const {
        for (const auto& e : entries)
            if (!e.proven) return false;
        return true;
    }
};

/// Audits the four spacetime distance lower bounds and the two deformed-code
/// bounds they rest on, exhaustively over all targets ψ, with distances exact
/// up to `cap`. Refuses spacetime instances wider than `column_budget`.
Theorem1Audit theorem1_audit(const SpacetimeCode& sc, const DeformedCode& dc, std::size_t cap,
                             std::size_t column_budget = 10000);

} // namespace qsurgery
