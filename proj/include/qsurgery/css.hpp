#pragma once

#include "qsurgery/bitmatrix.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace qsurgery {

/// CSS code presented by X/Z check matrices plus paired logical
/// representatives: J_X J_Z^T = identity(k), all other products vanish.
struct CssCode {
    BitMatrix h_x, h_z;
    BitMatrix j_x, j_z;

    std::size_t n() const { return h_x.cols(); }
    std::size_t k() const { return j_x.rows(); }

    /// Empty result means the presentation is consistent; otherwise one
    /// human-readable line per violated condition.
    std::vector<std::string> validate() const;
    /// Throws std::runtime_error listing the violations, if any.
    void ensure_valid(const std::string& context = "css code") const;
};

/// Chain (repetition) parity matrix: (d-1) x d, rows {e_i + e_{i+1}}.
BitMatrix make_repetition_chain(std::size_t d);

/// Unrotated planar surface code of odd-cycle distance d:
/// n = d^2 + (d-1)^2, k = 1. Logical Z runs along the top boundary,
/// logical X along the left boundary.
CssCode make_surface(std::size_t d);

/// Monomial x^a y^b of the bivariate-bicycle group algebra.
struct BBTerm {
    std::size_t a = 0, b = 0;
};

/// Bivariate-bicycle code on Z_l x Z_m with H_X = (A|B), H_Z = (B^T|A^T),
/// A and B sums of the given monomials. n = 2 l m.
CssCode make_bivariate_bicycle(std::size_t l, std::size_t m,
                               const std::vector<BBTerm>& a_terms,
                               const std::vector<BBTerm>& b_terms);

/// Direct sum of a register code and q copies of a noisy code. Logical
/// ordering: register logicals first, then each noisy block's in turn.
CssCode make_composite(const CssCode& reg, const CssCode& noisy, std::size_t q);

/// Derive paired logical representatives for given check matrices.
/// Deterministic; the result satisfies J_X J_Z^T = identity.
std::pair<BitMatrix, BitMatrix> derive_logicals(const BitMatrix& h_x, const BitMatrix& h_z);

enum class DistanceKind { found, above_cap, infinite };

struct DistanceResult {
    DistanceKind kind = DistanceKind::infinite;
    std::size_t weight = 0; // valid when kind == found

    bool operator==(const DistanceResult&) const = default;
};

enum class PauliBasis { x, z };

/// Exact minimum weight of a nontrivial logical operator of the given type
/// (basis x: v with H_Z v^T = 0 and J_Z v^T != 0), searched up to `cap`.
DistanceResult exact_code_distance(const CssCode& code, PauliBasis basis, std::size_t cap);

/// Minimum-weight representative of the logical class `row` of `j` modulo
/// the row space of `stab`, by exhaustive coset search (2^rank(stab) must
/// stay under the guard) with deterministic tie-breaking.
BitVector reduce_logical_weight(const BitVector& logical, const BitMatrix& stab,
                                std::size_t guard_log2 = 22);

} // namespace qsurgery
