#pragma once

#include "qsurgery/circuit.hpp"

#include <cstdint>
#include <vector>

namespace qsurgery {

/// Affine GF(2) form c + sum of fresh random variables. Every projectively
/// random measurement mints one variable, so correlations between outcomes
/// survive exactly: an XOR of outcomes is deterministic iff its variable
/// part cancels.
struct SignForm {
    bool c = false;
    BitVector vars;

    bool deterministic() const { return !vars.any(); }
    SignForm& operator^=(const SignForm& o);
};

/// Stabilizer tableau over rows (-1)^form X^x Z^z (strict XZ order, no Y
/// normalization: multiplying A by B costs (-1)^|z_A & x_B|). Rows 0..n-1
/// are destabilizers, n..2n-1 stabilizers; signs are affine forms so that
/// measurement outcomes stay exact symbolic functions of the minted
/// randomness.
class SymbolicTableau {
public:
    /// Starts in |0...0>. var_capacity bounds the number of mintable
    /// variables (one per random measurement outcome).
    SymbolicTableau(std::size_t n, std::size_t var_capacity);

    std::size_t n() const { return n_; }
    std::size_t vars_used() const { return minted_; }
    std::size_t var_capacity() const { return cap_; }

    void h(std::size_t q);
    void cx(std::size_t c, std::size_t t);
    /// Conjugate the state by the Pauli error X^xs Z^zs.
    void apply_pauli(const BitVector& xs, const BitVector& zs);

    SignForm measure_z(std::size_t q);
    SignForm measure_x(std::size_t q);
    void prep_z(std::size_t q);
    void prep_x(std::size_t q);

    struct VirtualResult {
        bool in_group = false; // X^xs Z^zs is +-(stabilizer product)
        SignForm form;         // outcome form; fresh variable if !in_group
    };
    /// Non-collapsing readout of the Pauli X^xs Z^zs on the current state.
    VirtualResult measure_pauli_virtual(const BitVector& xs, const BitVector& zs);

private:
    void rowmult(std::size_t dst, std::size_t src); // row dst = row src * row dst
    void row_clear(std::size_t r);
    void row_copy(std::size_t dst, std::size_t src);
    bool parity_and(const std::uint64_t* a, const std::uint64_t* b) const;
    std::size_t mint();

    std::size_t n_ = 0, cap_ = 0, minted_ = 0;
    std::size_t wn_ = 0, wv_ = 0; // words per bit row / per var row
    std::vector<std::uint64_t> xs_, zs_, rv_;
    std::vector<std::uint8_t> rc_;
};

/// Pauli error X^xs Z^zs injected after the ops of step `after_step`.
struct PauliFault {
    std::size_t after_step = 0;
    BitVector xs, zs;
};

/// Exact symbolic value of every detector and observable over one noiseless
/// execution (with optional injected Pauli faults). Virtual readouts are
/// evaluated per detector/observable as joint Pauli products on the final
/// state, never per qubit, so their correlations are preserved.
struct ReferenceForms {
    std::vector<SignForm> detectors;
    std::vector<SignForm> observables;
};
ReferenceForms analyze_forms(const Circuit& c, const std::vector<PauliFault>& faults = {});

struct CircuitReference {
    std::vector<std::uint8_t> detector_deterministic;
    std::vector<std::uint8_t> detector_value; // const part of the form
    std::vector<std::uint8_t> observable_deterministic;
    std::vector<std::uint8_t> observable_value;
};
CircuitReference analyze_reference(const Circuit& c);

/// Structural invariants plus the symbolic gauge requirements: every
/// detector deterministic with reference value zero, and every side-z
/// observable deterministic zero (side-x references may be randomized by a
/// Z-basis preparation; their error-frame flips are still exact).
Report validate_circuit(const Circuit& c);

/// Detector/observable flips caused by one injected Pauli fault, computed
/// from two symbolic executions. Exact; independent of the frame simulator.
struct FaultSignature {
    BitVector detectors;
    BitVector observables;
};
FaultSignature fault_signature_tableau(const Circuit& c, const PauliFault& fault);

} // namespace qsurgery
