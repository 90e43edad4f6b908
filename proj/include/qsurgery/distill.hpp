#pragma once

#include "qsurgery/surgery.hpp" // Report

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

namespace qsurgery {

/// Mixed noise on the five input copies: each copy sees independent
/// depolarizing strength q with fraction (1-r), and with fraction r all five
/// share one global depolarizing event of the same strength.
struct NoiseMix {
    double q = 0.0; // depolarizing rate in [0, 1]
    double r = 0.0; // global-noise fraction in [0, 1]
};

/// The distillation target: Bloch vector (1,1,1)/sqrt(3).
Eigen::Matrix2cd magic_state();

/// rho = (1-r) C_1^x5 + r C_5 with C_m = (1-q) A^xm + q I/2^m (32 x 32).
Eigen::MatrixXcd build_input_state(const NoiseMix& mix);

/// Hermiticity, unit trace, and positive semidefiniteness within tol.
Report check_density_operator(const Eigen::MatrixXcd& rho, double tol = 1e-10);

/// Raised when the trivial-syndrome projection has numerically zero weight.
struct ZeroSuccess : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DistillResult {
    Eigen::Matrix2cd output; // one-qubit logical state after decoding
    double success_probability = 0.0;
};

/// Project the five-qubit input onto the trivial-syndrome subspace of the
/// five-qubit code, renormalize (success probability = pre-normalization
/// trace), and decode to one qubit. The logical frame is fixed so the ideal
/// input A^x5 maps exactly to A.
DistillResult distill_5to1(const Eigen::MatrixXcd& rho);

/// 1 - Tr(A d), clamped into [0, 1].
double output_error_rate(const Eigen::Matrix2cd& d);

struct SweepRow {
    double q = 0.0, r = 0.0;
    double success_prob = 0.0;
    double error_rate = 0.0;
};

struct SlopeFit {
    double r = 0.0;
    double slope = 0.0;      // d log(error) / d log(q) over the grid
    std::size_t points = 0;  // rows with q > 0 and error > 0 used in the fit
};

struct SweepResult {
    std::vector<SweepRow> rows; // q-major within each r, r in input order
    std::vector<SlopeFit> slopes;
};

/// Exact sweep over the (q, r) grid with per-r log-log slope fits.
SweepResult distill_sweep(const std::vector<double>& qs, const std::vector<double>& rs);

} // namespace qsurgery
