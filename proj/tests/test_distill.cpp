#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qsurgery/distill.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <cmath>
#include <complex>
#include <vector>

using namespace qsurgery;
using Eigen::Matrix2cd;
using Eigen::MatrixXcd;
using namespace std::complex_literals;

namespace {

Matrix2cd sigma(char p) {
    Matrix2cd m;
    switch (p) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -1i, 1i, 0; break;
    default: m << 1, 0, 0, -1; break;
    }
    return m;
}

MatrixXcd kron5(const std::string& s) {
    MatrixXcd m = sigma(s[0]);
    for (int i = 1; i < 5; ++i) m = Eigen::kroneckerProduct(m, sigma(s[i])).eval();
    return m;
}

/// Test-side rebuild of the trivial-syndrome projector.
MatrixXcd oracle_projector() {
    MatrixXcd p = MatrixXcd::Identity(32, 32);
    for (const std::string g : {"XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"})
        p = (0.5 * (p + kron5(g) * p)).eval();
    return p;
}

MatrixXcd ideal5() {
    MatrixXcd m = magic_state();
    for (int i = 1; i < 5; ++i) m = Eigen::kroneckerProduct(m, magic_state()).eval();
    return m;
}

void require_density(const MatrixXcd& rho, double tol = 1e-10) {
    for (const auto& item : check_density_operator(rho, tol).items) {
        CAPTURE(item.name);
        CAPTURE(item.detail);
        REQUIRE(item.pass);
    }
}

} // namespace

TEST_CASE("the target state is the pure one-qubit state on the diagonal axis") {
    const Matrix2cd a = magic_state();
    REQUIRE(std::abs(a.trace() - 1.0) < 1e-14);
    REQUIRE((a * a - a).cwiseAbs().maxCoeff() < 1e-14);
    const double s = 1.0 / std::sqrt(3.0);
    REQUIRE(std::abs((a * sigma('X')).trace().real() - s) < 1e-14);
    REQUIRE(std::abs((a * sigma('Y')).trace().real() - s) < 1e-14);
    REQUIRE(std::abs((a * sigma('Z')).trace().real() - s) < 1e-14);
}

TEST_CASE("input states match their closed forms") {
    // q = 0: the pure ideal product, independent of r.
    REQUIRE((build_input_state({0.0, 0.7}) - ideal5()).cwiseAbs().maxCoeff() < 1e-14);
    // q = 1, r = 0: fully mixed.
    REQUIRE((build_input_state({1.0, 0.0}) - MatrixXcd::Identity(32, 32) / 32.0)
                .cwiseAbs()
                .maxCoeff() < 1e-14);
    require_density(build_input_state({0.01, 0.5}));

    // Decomposition into local and global parts is exact.
    for (double q : {0.0, 0.02, 0.3})
        for (double r : {0.0, 0.4, 1.0}) {
            const MatrixXcd global =
                (1.0 - q) * ideal5() + q / 32.0 * MatrixXcd::Identity(32, 32);
            const MatrixXcd expect =
                (1.0 - r) * build_input_state({q, 0.0}) + r * global;
            REQUIRE((build_input_state({q, r}) - expect).cwiseAbs().maxCoeff() < 1e-14);
        }

    REQUIRE_THROWS_AS(build_input_state({-0.1, 0.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(build_input_state({0.0, 1.5}), std::invalid_argument);
}

TEST_CASE("the ideal input is a fixed point of the protocol") {
    const DistillResult res = distill_5to1(ideal5());
    REQUIRE(res.success_probability > 0.0);
    REQUIRE(res.success_probability <= 1.0 + 1e-12);
    REQUIRE(output_error_rate(res.output) < 1e-10);
    REQUIRE((res.output - magic_state()).cwiseAbs().maxCoeff() < 1e-10);
    require_density(res.output);

    // Success probability agrees with an independently built projector.
    const MatrixXcd p = oracle_projector();
    REQUIRE(std::abs((p * ideal5() * p).trace().real() - res.success_probability) <
            1e-12);
}

TEST_CASE("error rate measures overlap with the target") {
    REQUIRE(output_error_rate(magic_state()) == 0.0);
    REQUIRE(output_error_rate(Matrix2cd::Identity() * 0.5) == doctest::Approx(0.5));
    const double s = 1.0 / std::sqrt(3.0);
    const Matrix2cd orth =
        0.5 * (sigma('I') - s * (sigma('X') + sigma('Y') + sigma('Z')));
    REQUIRE(output_error_rate(orth) == doctest::Approx(1.0));
}

TEST_CASE("distillation output stays a valid state and matches the oracle") {
    const MatrixXcd p = oracle_projector();
    for (double q : {0.005, 0.05})
        for (double r : {0.0, 0.5, 1.0}) {
            const MatrixXcd rho = build_input_state({q, r});
            require_density(rho);
            const DistillResult res = distill_5to1(rho);
            require_density(res.output);
            CAPTURE(q);
            CAPTURE(r);
            REQUIRE(std::abs((p * rho * p).trace().real() - res.success_probability) <
                    1e-12);
        }
}

TEST_CASE("states with no trivial-syndrome weight are rejected") {
    // A single-qubit error moves the encoded ideal state to a nonzero
    // syndrome, so its trivial-syndrome weight vanishes exactly.
    const MatrixXcd p = oracle_projector();
    const MatrixXcd encoded = p * ideal5() * p / (p * ideal5() * p).trace().real();
    const MatrixXcd err = kron5("XIIII");
    REQUIRE_THROWS_AS(distill_5to1(err * encoded * err.adjoint()), ZeroSuccess);
}

TEST_CASE("sweeps reproduce the quadratic-to-linear suppression crossover") {
    std::vector<double> qs{0.0};
    for (int i = 0; i <= 8; ++i) qs.push_back(1e-3 * std::pow(10.0, i / 8.0));
    const std::vector<double> rs{0.0, 0.25, 0.5, 0.75, 1.0};
    const SweepResult sweep = distill_sweep(qs, rs);
    REQUIRE(sweep.rows.size() == qs.size() * rs.size());
    REQUIRE(sweep.slopes.size() == rs.size());

    // q = 0 rows are exact zeros; success probabilities are probabilities.
    for (const auto& row : sweep.rows) {
        if (row.q == 0.0) REQUIRE(row.error_rate < 1e-12);
        REQUIRE(row.success_prob > 0.0);
        REQUIRE(row.success_prob <= 1.0 + 1e-12);
    }

    // Purely local noise is suppressed quadratically, purely global noise
    // only linearly.
    REQUIRE(sweep.slopes.front().r == 0.0);
    REQUIRE(sweep.slopes.front().slope == doctest::Approx(2.0).epsilon(0.05));
    REQUIRE(sweep.slopes.back().r == 1.0);
    REQUIRE(sweep.slopes.back().slope == doctest::Approx(1.0).epsilon(0.1));

    // Error rates never improve as the global fraction grows at fixed q.
    for (std::size_t qi = 0; qi < qs.size(); ++qi)
        if (qs[qi] > 0.0)
            for (std::size_t ri = 1; ri < rs.size(); ++ri) {
                const auto& lo = sweep.rows[(ri - 1) * qs.size() + qi];
                const auto& hi = sweep.rows[ri * qs.size() + qi];
                REQUIRE(hi.error_rate >= lo.error_rate - 1e-12);
            }
}
