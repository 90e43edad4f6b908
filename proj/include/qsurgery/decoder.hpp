#pragma once

#include "qsurgery/bitmatrix.hpp"
#include "qsurgery/noise.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsurgery {

/// One side's decoding instance: a sparse detector-by-fault parity matrix,
/// per-fault flip priors, and the syndrome to explain. Columns come from a
/// DetectorModel projected onto one detector side (X errors light z-side
/// detectors and vice versa), with hidden (control) channels excluded and
/// identical projected signatures merged.
struct DecodeProblem {
    std::size_t num_checks = 0;
    std::size_t num_observables = 0;
    /// Per fault: the problem-check ids it flips (ascending) and the
    /// problem-observable ids it flips (ascending).
    std::vector<std::vector<std::uint32_t>> fault_checks;
    std::vector<std::vector<std::uint32_t>> fault_obs;
    std::vector<double> prior; // in (0, 0.5]
    /// Mapping back to the circuit: problem check i is circuit detector
    /// detector_ids[i]; problem observable j is circuit observable
    /// observable_ids[j].
    std::vector<std::uint32_t> detector_ids;
    std::vector<std::uint32_t> observable_ids;
    /// Current syndrome (num_checks bits); decode_shots rewrites it per shot.
    BitVector syndrome;

    std::size_t num_faults() const { return prior.size(); }
};

/// Projects a detector model onto one side. Hidden channels never enter the
/// decoding matrix (they emulate state randomness, not noise); columns whose
/// projection carries neither a detector nor an observable are dropped;
/// columns with identical projections merge by exclusive probability.
DecodeProblem make_decode_problem(const DetectorModel& dm, PauliBasis side);

struct BpResult {
    /// Posterior log-likelihood ratios log(P(no flip)/P(flip)); negative
    /// means the fault is more likely flipped than not.
    std::vector<double> posterior;
    BitVector hard;
    bool converged = false;
    std::size_t iterations = 0;
};

/// Min-sum belief propagation with multiplicative scaling of check-to-
/// variable messages. Exits early once the hard decision reproduces
/// problem.syndrome (a zero syndrome converges before any iteration).
BpResult bp_min_sum(const DecodeProblem& problem, std::size_t max_iter = 1000,
                    double scale = 0.9);

/// Raised when the syndrome is outside the column space, i.e. no selection
/// of faults can explain it. Callers treat the shot as a decode failure.
struct SingularSelection : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Ordered-statistics post-processing over BP soft outputs: faults sorted
/// most-likely-flipped first (tie-break by index), a greedy column
/// elimination picks the information set, and the combination sweep tries
/// the zero pattern, every weight-1 pattern over the non-pivot set, and all
/// weight-2 patterns within its `order` least reliable entries, keeping the
/// minimum total cost sum(log((1-p)/p)) over flipped faults. order = 0
/// reduces to plain re-encoding of the information set.
BitVector osd_cs(const DecodeProblem& problem, const std::vector<double>& posterior,
                 std::size_t order = 5);

struct DecodeOptions {
    std::size_t max_iter = 1000;
    double scale = 0.9;
    std::size_t osd_order = 5;
};

/// BP first; the BP hard decision when it converged, OSD-CS otherwise.
BitVector decode_syndrome(const DecodeProblem& problem, const DecodeOptions& opts = {});

struct ObservableStats {
    std::uint32_t observable = 0; // circuit observable id
    std::string name;
    std::size_t shots = 0;
    std::size_t failures = 0;
    double p_l = 0.0;
    double sigma = 0.0;
};

/// Per-shot logical-error record for every circuit observable covered by a
/// decode side, plus the per-observable failure aggregates.
struct DecodeReport {
    std::size_t shots = 0;
    std::size_t num_observables = 0; // circuit observable count
    std::vector<std::uint64_t> err;  // shot-major packed predicted^true bits
    std::vector<std::uint8_t> covered; // circuit observable was decoded
    std::vector<ObservableStats> stats;
    std::size_t obs_words() const { return (num_observables + 63) / 64; }
    bool err_bit(std::size_t shot, std::size_t obs) const {
        return (err[shot * obs_words() + obs / 64] >> (obs % 64)) & 1u;
    }
};

/// Decodes every shot of a sampled batch on both detector sides and scores
/// each observable: error bit = predicted flip XOR true flip.
DecodeReport decode_shots(const DetectorModel& dm, const ShotBatch& batch,
                          const DecodeOptions& opts = {});

} // namespace qsurgery
