#pragma once

#include "qsurgery/spacetime.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qsurgery {

/// Clifford operations used by the parity-measurement circuits. Virtual
/// measurements are a simulation device: they read a data qubit at the very
/// end of a circuit without collapsing it, so that one sampled noise
/// realization yields both the X- and Z-basis transversal readouts. Every
/// physically realizable restriction (one readout basis) is a marginal of
/// the sampled distribution.
enum class OpKind : std::uint8_t { prep, cx, meas, meas_virtual, idle };

struct Operation {
    OpKind kind = OpKind::idle;
    PauliBasis basis = PauliBasis::z; // prep/meas basis
    std::uint32_t a = 0;              // qubit, or control for cx
    std::uint32_t b = 0;              // target for cx; for meas, 1 marks a
                                      // deactivating readout (qubit retired)

    bool operator==(const Operation&) const = default;
};

struct Timestep {
    std::vector<Operation> ops;

    bool operator==(const Timestep&) const = default;
};

/// XOR of measurement records that is deterministic in every noiseless run.
struct Detector {
    PauliBasis side = PauliBasis::z;  // Pauli type of the compared checks
    std::vector<std::uint32_t> meas;  // record indices

    bool operator==(const Detector&) const = default;
};

/// XOR of measurement records tracking one logical quantity. `side` names
/// the Pauli type of the tracked operator: side z observables are flipped by
/// X errors, side x observables by Z errors.
struct Observable {
    std::string name;
    PauliBasis side = PauliBasis::z;
    std::vector<std::uint32_t> meas;

    bool operator==(const Observable&) const = default;
};

struct Circuit {
    std::uint32_t num_qubits = 0;
    std::vector<Timestep> steps;
    std::vector<Detector> detectors;
    std::vector<Observable> observables;
    // Per measurement record, in global record order:
    std::vector<std::uint32_t> meas_qubit;
    std::vector<PauliBasis> meas_basis;
    std::vector<std::uint8_t> meas_is_virtual;
    std::vector<std::uint32_t> meas_step;

    std::size_t num_measurements() const { return meas_qubit.size(); }

    bool operator==(const Circuit&) const = default;
};

/// Incremental circuit assembly. Tracks which qubits are live so that every
/// live qubit left untouched in a committed timestep receives an explicit
/// idle operation (the uniform idle-noise rule depends on this).
class CircuitBuilder {
public:
    explicit CircuitBuilder(std::uint32_t num_qubits);

    /// Marks a qubit live without an operation (externally prepared data).
    void activate(std::uint32_t q);

    void begin_step();
    void prep(std::uint32_t q, PauliBasis basis);
    void cx(std::uint32_t c, std::uint32_t t);
    std::uint32_t meas(std::uint32_t q, PauliBasis basis, bool deactivate = false);
    std::uint32_t meas_virtual(std::uint32_t q, PauliBasis basis);
    void end_step();

    std::uint32_t add_detector(PauliBasis side, std::vector<std::uint32_t> meas);
    std::size_t add_observable(std::string name, PauliBasis side,
                               std::vector<std::uint32_t> meas);

    /// Number of committed timesteps so far.
    std::size_t steps_committed() const { return c_.steps.size(); }

    Circuit take();

private:
    void touch(std::uint32_t q);

    Circuit c_;
    std::vector<std::uint8_t> active_, touched_;
    bool in_step_ = false;
};

/// One joint parity-measurement round: coupling layer (color) per Tanner
/// edge of the stacked (check_x over check_z) matrix. The number of layers
/// equals the maximum vertex degree, so a round costs depth + 2 timesteps.
struct ParitySchedule {
    struct Edge {
        PauliBasis side = PauliBasis::x;
        std::uint32_t row = 0;   // row within its side's matrix
        std::uint32_t col = 0;   // data column
        std::uint32_t color = 0; // coupling layer
    };
    std::size_t depth = 0;
    std::vector<Edge> edges;
};

/// Deterministic minimal edge coloring of the joint Tanner graph (bipartite:
/// checks on one side, data columns on the other), by alternating-path
/// recoloring over edges enumerated in (side, row, col) order.
ParitySchedule color_tanner_graph(const BitMatrix& check_x, const BitMatrix& check_z);

/// Measurement records produced by one appended parity round.
struct RoundRecords {
    std::vector<std::uint32_t> x; // per check_x row
    std::vector<std::uint32_t> z; // per check_z row
};

/// Appends one round: ancilla preparation, `depth` coupling layers, ancilla
/// readout. X-check ancillas are prepared/measured in the X basis and drive
/// cx(ancilla -> data); Z-check ancillas use the Z basis and cx(data ->
/// ancilla). x_anc/z_anc give the ancilla qubit id per check row.
RoundRecords append_parity_round(CircuitBuilder& b, const ParitySchedule& sched,
                                 const std::vector<std::uint32_t>& x_anc,
                                 const std::vector<std::uint32_t>& z_anc);

/// `rounds` repetitions of the parity round alone (data qubits live but not
/// prepared; no boundary handling): detectors compare consecutive rounds of
/// the same check. Qubit layout: data [0, n), X ancillas, then Z ancillas.
Circuit schedule_parity_circuit(const BitMatrix& check_x, const BitMatrix& check_z,
                                std::size_t rounds);

/// Memory experiment: data preparation in `prep` basis, `rounds` parity
/// rounds, and a final virtual dual-basis transversal readout. Detectors:
/// first-round verification of prep-side checks, consecutive-round
/// comparisons, and final-readout verification of both check types.
/// Observables: every j_z row ("Z[i]", side z) and every j_x row ("X[i]",
/// side x); only the prep-side family has a deterministic reference.
Circuit build_memory_circuit(const CssCode& code, std::size_t rounds,
                             PauliBasis prep = PauliBasis::z);

/// The joint-measurement experiment and the bookkeeping the event analysis
/// needs alongside the raw circuit.
struct InjectionExperiment {
    DeformedCode dc;
    Circuit circuit;
    std::size_t seam_prep_step = 0;    // step preparing seam qubits (q > 0)
    std::size_t seam_readout_step = 0; // step reading them out (q > 0)
    // Observable ids in circuit.observables:
    std::vector<std::size_t> obs_z;  // k-q rows of alpha_perp_r^T J_Z; first q are Z_j
    std::vector<std::size_t> obs_oc; // q extracted measured-operator outcomes
    std::vector<std::size_t> obs_x;  // k-q rows of alpha_perp J_X; first q are X_j x_j
    // Per deformed round, the vertex-check record indices (tests/controls).
    std::vector<std::vector<std::uint32_t>> vertex_meas;
};

/// Builds the full injection experiment: data preparation in `prep` basis,
/// d_t rounds of the composite code, seam preparation in the X basis, d_t
/// rounds of the deformed code, seam X readout, d_t more composite rounds,
/// final virtual dual-basis readout. alpha_reg (q x k_reg, full rank)
/// selects the register logicals to measure; each pairs with one noisy
/// block. q = 0 degenerates to the plain memory experiment over 3*d_t
/// rounds. Z-prep runs give deterministic Z[i]/oc[i] references (X[i]
/// random); X-prep runs the reverse.
InjectionExperiment build_injection_experiment(const CssCode& reg, const CssCode& noisy,
                                               std::size_t q, const BitMatrix& alpha_reg,
                                               std::size_t d_r, std::size_t d_t,
                                               PauliBasis prep = PauliBasis::z);

/// Spec-shaped convenience wrapper returning only the circuit.
Circuit build_injection_circuit(const CssCode& reg, const CssCode& noisy, std::size_t q,
                                const BitMatrix& alpha_reg, std::size_t d_r,
                                std::size_t d_t, PauliBasis prep = PauliBasis::z);

/// Structural invariants: per-timestep qubit disjointness, ops only on live
/// qubits, prepare/couple/measure pattern of every ancilla use, and
/// detector/observable record indices in range.
std::vector<std::string> check_circuit_invariants(const Circuit& c);

} // namespace qsurgery
