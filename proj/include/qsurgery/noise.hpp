#pragma once

#include "qsurgery/circuit.hpp"

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace qsurgery {

/// Uniform circuit-level noise strength. Placement rules: every preparation
/// is followed by a single-qubit depolarizing channel of strength p, every
/// cx by a two-qubit one, every idle timestep costs a single-qubit channel,
/// and every measurement record (final virtual readouts included) flips
/// with probability 2p/3.
struct NoiseModel {
    double p = 0.0;
};

enum class ChannelKind : std::uint8_t { prep_flip, depol1, depol2, meas_flip, pauli_string };

/// One noise site. `step` is the timestep whose operations the fault
/// follows. Per-step qubit disjointness makes that placement exact.
struct Channel {
    ChannelKind kind = ChannelKind::depol1;
    double p = 0.0; // model strength (literal probability for pauli_string)
    std::size_t step = 0;
    std::uint32_t a = 0, b = 0;          // qubits involved
    std::uint32_t meas = 0;              // record index for meas_flip
    PauliBasis prep_basis = PauliBasis::z; // for prep_flip
    bool hidden = false;                 // excluded from decode problems
    BitVector xs, zs;                    // support for pauli_string
};

struct NoisyCircuit {
    Circuit circuit;
    NoiseModel model;
    std::vector<Channel> channels;
};

/// Attach the standard channels to every operation of `c`, in step/op order.
NoisyCircuit apply_noise(const Circuit& c, const NoiseModel& model);

/// Append an extra Pauli channel (controls and diagnostics). Hidden channels
/// are sampled like any other but are left out of decoding inputs.
void add_pauli_channel(NoisyCircuit& nc, std::size_t step, const BitVector& xs,
                       const BitVector& zs, double p, bool hidden);

/// Exact decomposition of a depolarizing channel of strength p into
/// independent binary Pauli faults: each of the 3 (resp. 15) non-identity
/// Paulis anticommutes with half of the others' eigenoperators, giving
/// per-Pauli flip probability a with (1-2a)^2 = 1-4p/3 for one qubit and
/// (1-2a)^8 = 1-16p/15 for two.
inline double depol1_binary(double p) { return 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * p / 3.0)); }
inline double depol2_binary(double p) {
    return 0.5 * (1.0 - std::pow(1.0 - 16.0 * p / 15.0, 0.125));
}
/// Independent-OR of two binary fault probabilities.
inline double prob_xor(double p1, double p2) { return p1 + p2 - 2.0 * p1 * p2; }

/// One independent binary fault: a Pauli injected after `step(channel)`, or
/// a classical record flip when flip_meas is set.
struct ElementaryFault {
    std::uint32_t channel = 0;
    double p = 0.0;
    BitVector xs, zs; // sized num_qubits; empty support for record flips
    std::uint32_t flip_meas = UINT32_MAX;
};

std::vector<ElementaryFault> elementary_faults(const NoisyCircuit& nc);

/// Merged fault column: the set of detectors/observables flipped by an
/// equivalence class of elementary faults, with the combined probability.
struct FaultColumn {
    std::vector<std::uint32_t> detectors;   // ascending
    std::vector<std::uint32_t> observables; // ascending
    double p = 0.0;
    bool hidden = false;
};

struct DetectorModel {
    std::size_t num_detectors = 0;
    std::size_t num_observables = 0;
    std::vector<PauliBasis> detector_side;
    std::vector<PauliBasis> observable_side;
    std::vector<std::string> observable_names;
    std::vector<FaultColumn> columns;
    std::vector<ElementaryFault> elementary;
    /// Per elementary fault, its merged column (UINT32_MAX: no effect).
    std::vector<std::uint32_t> elementary_column;
};

/// Propagate every elementary fault through the circuit (64 Pauli frames per
/// pass) and merge faults with identical detector/observable signatures.
DetectorModel derive_detector_model(const NoisyCircuit& nc);

struct SampleOptions {
    bool record_faults = false; // keep per-shot fired column ids
};

/// Bit-packed sampled shots, shot-major. Bit d of words
/// det[shot * det_words + d/64] is detector d of that shot.
struct ShotBatch {
    std::size_t shots = 0;
    std::size_t num_detectors = 0, num_observables = 0;
    std::size_t det_words = 0, obs_words = 0;
    std::vector<std::uint64_t> det;
    std::vector<std::uint64_t> obs;
    std::vector<std::vector<std::uint32_t>> fault_columns;

    bool det_bit(std::size_t shot, std::size_t d) const {
        return (det[shot * det_words + d / 64] >> (d % 64)) & 1;
    }
    bool obs_bit(std::size_t shot, std::size_t o) const {
        return (obs[shot * obs_words + o / 64] >> (o % 64)) & 1;
    }
};

/// Sample `shots` independent shots. Each (seed, shot, probability-class)
/// triple seeds its own counter-based stream, so results are independent of
/// shot partitioning across workers and reproducible bit-for-bit.
ShotBatch sample_model(const DetectorModel& dm, std::size_t shots, std::uint64_t seed,
                       const SampleOptions& opts = {});

} // namespace qsurgery
