#pragma once

#include "qsurgery/surgery.hpp"

#include <cstdint>
#include <vector>

namespace qsurgery {

/// What a spacetime fault-coordinate column refers to.
enum class ColumnKind {
    data,    ///< Pauli error on a qubit during one epoch between measurement rounds.
    outcome, ///< flip of one parity-check measurement outcome.
};

struct SpacetimeColumn {
    ColumnKind kind = ColumnKind::data;
    /// Data columns: epoch 0..d_t (0 = before the first deformed round, d_t =
    /// after the last). Outcome columns: measurement round 1..d_t.
    std::size_t round = 0;
    /// Data columns: qubit index in the deformed layout (base data first,
    /// then seam ancillas). Outcome columns: check row index in the deformed
    /// check matrix of the matching basis.
    std::size_t index = 0;
};

/// Closed-form check/generator matrices for a d_t-round window of deformed
/// parity-check measurements, bracketed by ideal stabilizer eigenstates.
///
/// The h_st_x family (h_st_x, j_st_x) acts on Z-error coordinates described
/// by x_layout; the h_st_z family (h_st_z, j_st_z, j_st_mz, j_st_oc) acts on
/// X-error coordinates described by z_layout. X errors on seam ancillas in
/// the first and last epoch are excluded: the ancillas are prepared and read
/// out in the X basis, so such errors act trivially there.
struct SpacetimeCode {
    BitMatrix h_st_x;  ///< checks violated by Z errors
    BitMatrix h_st_z;  ///< checks violated by X errors
    BitMatrix j_st_x;  ///< unmeasured X logical propagation (k-q rows)
    BitMatrix j_st_z;  ///< unmeasured Z logical propagation (k-q rows)
    BitMatrix j_st_mz; ///< measured Z logical propagation (q rows)
    BitMatrix j_st_oc; ///< measured-outcome extraction (q rows)
    std::size_t d_t = 0;
    std::vector<SpacetimeColumn> x_layout; ///< columns of the h_st_x family
    std::vector<SpacetimeColumn> z_layout; ///< columns of the h_st_z family
};

/// Assembles the six spacetime matrices for d_t >= 2 deformed rounds.
SpacetimeCode build_spacetime(const DeformedCode& dc, std::size_t d_t);

/// Effect of one spacetime error vector on checks and logical operators.
/// For a Z error (basis = PauliBasis::z) only `unmeasured` is populated; for
/// an X error the measured/outcome rows apply as well.
struct FlipRecord {
    bool detected = false; ///< some spacetime check fires
    BitVector unmeasured;  ///< k-q flips (j_st_x or j_st_z rows)
    BitVector measured;    ///< q flips of measured Z logicals (X errors only)
    BitVector outcomes;    ///< q flips of extracted outcomes (X errors only)
};

/// `basis` names the Pauli type of the error `e`; its length must match the
/// corresponding layout (x_layout for Z errors, z_layout for X errors).
FlipRecord logical_flips(const SpacetimeCode& sc, const BitVector& e, PauliBasis basis);

/// The q x n_G combination of seam Z-check outcomes that reproduces the
/// measured logical eigenvalues (one row per measured operator; each row
/// selects the vertex checks of that operator's glue component).
BitMatrix outcome_extractor(const DeformedCode& dc);

/// Reads the q measured-operator eigenvalues out of one round of deformed
/// Z-check outcomes `mu` (length r_Z + n_G, base checks first).
BitVector extract_logical_outcomes(const DeformedCode& dc, const BitVector& mu);

/// Cross-checks the assembled matrices against independently reconstructed
/// block structure, the repetition-chain boundary identity, the seam
/// extraction identity, and the effective-error reduction on random check
/// kernel samples plus an exhaustive low-weight sweep of outcome errors.
Report verify_spacetime_consistency(const SpacetimeCode& sc, const DeformedCode& dc,
                                    std::size_t samples = 1000, std::uint64_t seed = 7);

} // namespace qsurgery
