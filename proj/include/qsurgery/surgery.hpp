#pragma once

#include "qsurgery/css.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qsurgery {

/// Selection of logical Z operators to measure jointly, plus the bases that
/// describe what survives the measurement:
///  - alpha (q x k): measured combinations, L_j = (alpha J_Z)_j;
///  - alpha_perp ((k-q) x k): X-side survivors, orthogonal to alpha;
///  - alpha_perp_r ((k-q) x k): Z-side survivors, alpha_perp * alpha_perp_r^T
///    = identity and independent of the measured combinations.
struct AlphaPair {
    BitMatrix alpha;
    BitMatrix alpha_perp;
    BitMatrix alpha_perp_r;

    std::size_t q() const { return alpha.rows(); }
    std::size_t k() const { return alpha.cols(); }

    std::vector<std::string> validate() const;
    void ensure_valid(const std::string& context = "alpha pair") const;
};

/// Complete a measurement selection into a full AlphaPair deterministically.
AlphaPair derive_alpha_pair(const BitMatrix& alpha);

/// Canonical pairing for composite codes: measured row j couples register
/// logical j with the first logical of noisy block j, the X-side survivor
/// for slot j is the static pair X_j x_j, and the Z-side survivor is the
/// bare register operator Z_j. Idle logicals follow, unchanged.
AlphaPair make_injection_alphas(std::size_t k_reg, std::size_t k_noi, std::size_t q);

enum class GluePolicy { path, shared_x_check };

/// Gluing data for a joint logical-Z measurement. Vertices carry one ancilla
/// Z-check each (s maps them one-hot onto data qubits), edges carry one
/// ancilla qubit each (h_g is the edge-vertex incidence), and h_m spans the
/// cycle space of the graph. t, r and beta witness the surgery conditions.
struct GlueCode {
    BitMatrix s;    // n_G x n
    BitMatrix h_g;  // r_G x n_G
    BitMatrix h_m;  // r_M x r_G
    BitMatrix t;    // r_X x r_G
    BitMatrix r;    // n x n_G
    BitMatrix beta; // (k-q) x r_G
    std::vector<std::size_t> vertex_op; // measured-operator index per vertex
    std::size_t d_r = 1;                // thickness this sticker was built at

    std::size_t n_g() const { return s.rows(); }
    std::size_t r_g() const { return h_g.rows(); }
    std::size_t r_m() const { return h_m.rows(); }
};

/// Build the base (thickness-1) glue for measuring alpha J_Z. Supports of the
/// measured operators must be pairwise disjoint. `path` strings each
/// operator's qubits in index order; `shared_x_check` connects qubits that
/// share an X check (cycles allowed, spanned by h_m).
GlueCode build_graph_glue(const CssCode& code, const AlphaPair& alphas,
                          GluePolicy policy = GluePolicy::path);

/// Thicken a base sticker to distance d_r (layered product with a length-d_r
/// chain). t, r, beta are re-solved against the thickened matrices.
GlueCode thicken_sticker(const CssCode& code, const AlphaPair& alphas,
                         const GlueCode& base, std::size_t d_r);

/// Original code, measurement selection, sticker and the resulting deformed
/// code. Deformed qubit layout: data [0, n), ancilla [n, n + r_G).
struct DeformedCode {
    CssCode base;
    AlphaPair alphas;
    GlueCode glue;
    std::size_t d_r = 1;
    CssCode deformed;

    std::size_t n() const { return base.n(); }
    std::size_t n_bar() const { return deformed.n(); }
};

/// Assemble the deformed code from a base glue, thickening it to d_r.
DeformedCode assemble_deformed(const CssCode& code, const AlphaPair& alphas,
                               const GlueCode& base_glue, std::size_t d_r);

struct CheckItem {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Report {
    std::vector<CheckItem> items;
    bool all_pass() const {
        for (const auto& i : items) if (!i.pass) return false;
        return true;
    }
};

/// Re-derive every surgery condition on an assembled deformed code.
Report verify_surgery_conditions(const DeformedCode& dc);

struct BoundedPairResult {
    bool bounded = false;
    BitVector witness; // offending closed edge set when !bounded
    std::string detail;
};

/// Decide whether (h_g, h_m) is (d_r, s)-bounded: every h_m-closed edge set v
/// with |v| < d_r must be the boundary of a vertex set u with |u s| <= |v|.
/// Exhaustive; throws when the enumeration would exceed `budget` candidates.
BoundedPairResult check_bounded_pair(const BitMatrix& h_g, const BitMatrix& h_m,
                                     const BitMatrix& s, std::size_t d_r,
                                     std::uint64_t budget = (1ull << 24));

} // namespace qsurgery
