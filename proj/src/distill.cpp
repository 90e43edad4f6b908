#include "qsurgery/distill.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>

namespace qsurgery {

namespace {

using Eigen::Matrix2cd;
using Eigen::MatrixXcd;
using Eigen::Vector2cd;
using Eigen::VectorXcd;
using namespace std::complex_literals;

Matrix2cd pauli(char p) {
    Matrix2cd m;
    switch (p) {
    case 'I': m << 1, 0, 0, 1; break;
    case 'X': m << 0, 1, 1, 0; break;
    case 'Y': m << 0, -1i, 1i, 0; break;
    case 'Z': m << 1, 0, 0, -1; break;
    default: throw std::logic_error("pauli: bad label");
    }
    return m;
}

MatrixXcd pauli_string(const char (&s)[6]) {
    MatrixXcd m = pauli(s[0]);
    for (int i = 1; i < 5; ++i) m = Eigen::kroneckerProduct(m, pauli(s[i])).eval();
    return m;
}

/// Trivial-syndrome projector and frame-corrected decoding isometry of the
/// five-qubit code, built once. The code is generated by XZZXI and its
/// cyclic shifts; the logical frame is the single-qubit Clifford that sends
/// the decoded ideal input back to the magic state.
struct Protocol {
    MatrixXcd projector;  // 32 x 32
    MatrixXcd decode;     // 2 x 32, rows <0L|, <1L| with the frame applied
};

const Protocol& protocol() {
    static const Protocol proto = [] {
        const std::size_t dim = 32;
        MatrixXcd p = MatrixXcd::Identity(dim, dim);
        for (const auto& g : {"XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"}) {
            char s[6];
            std::copy(g, g + 6, s);
            p = (0.5 * (p + pauli_string(s) * p)).eval();
        }

        // Logical basis: |0L> from projecting |00000>, |1L> = XXXXX |0L>.
        VectorXcd zero_l = p.col(0);
        zero_l.normalize();
        const VectorXcd one_l = pauli_string("XXXXX") * zero_l;
        MatrixXcd w(2, dim);
        w.row(0) = zero_l.adjoint();
        w.row(1) = one_l.adjoint();

        // Fix the logical frame: enumerate the single-qubit Cliffords (as
        // words in H, S) and take the first whose application makes the
        // ideal input a fixed point of the whole protocol.
        Matrix2cd h;
        h << 1, 1, 1, -1;
        h /= std::sqrt(2.0);
        Matrix2cd s;
        s << 1, 0, 0, 1i;
        std::vector<Matrix2cd> cliffords{Matrix2cd::Identity()};
        auto canon = [](const Matrix2cd& u) {
            std::complex<double> lead = 0;
            for (int i = 0; i < 4 && std::abs(lead) < 1e-9; ++i) lead = u(i / 2, i % 2);
            Matrix2cd c = u * (std::abs(lead) / lead);
            std::ostringstream os;
            for (int i = 0; i < 4; ++i)
                os << std::llround(c(i / 2, i % 2).real() * 1e6) << ','
                   << std::llround(c(i / 2, i % 2).imag() * 1e6) << ';';
            return os.str();
        };
        std::vector<std::string> seen{canon(cliffords[0])};
        for (std::size_t i = 0; i < cliffords.size(); ++i)
            for (const Matrix2cd& g : {h, s}) {
                const Matrix2cd u = g * cliffords[i];
                const std::string key = canon(u);
                if (std::find(seen.begin(), seen.end(), key) == seen.end()) {
                    seen.push_back(key);
                    cliffords.push_back(u);
                }
            }

        MatrixXcd ideal = magic_state();
        for (int i = 1; i < 5; ++i)
            ideal = Eigen::kroneckerProduct(ideal, magic_state()).eval();
        const MatrixXcd proj = p * ideal * p;
        const Matrix2cd raw = (w * proj * w.adjoint()) / proj.trace().real();
        for (const Matrix2cd& u : cliffords) {
            const Matrix2cd fixed = u * raw * u.adjoint();
            if (std::abs(1.0 - (magic_state() * fixed).trace().real()) < 1e-9)
                return Protocol{p, u * w};
        }
        throw std::logic_error("distill: no Clifford frame fixes the ideal input");
    }();
    return proto;
}

} // namespace

Matrix2cd magic_state() {
    const double s = 1.0 / std::sqrt(3.0);
    return 0.5 * (pauli('I') + s * (pauli('X') + pauli('Y') + pauli('Z')));
}

MatrixXcd build_input_state(const NoiseMix& mix) {
    if (mix.q < 0.0 || mix.q > 1.0 || mix.r < 0.0 || mix.r > 1.0)
        throw std::invalid_argument("build_input_state: q and r must lie in [0, 1]");
    const Matrix2cd c1 =
        (1.0 - mix.q) * magic_state() + mix.q * 0.5 * Matrix2cd::Identity();
    MatrixXcd local = c1;
    MatrixXcd ideal = magic_state();
    for (int i = 1; i < 5; ++i) {
        local = Eigen::kroneckerProduct(local, c1).eval();
        ideal = Eigen::kroneckerProduct(ideal, magic_state()).eval();
    }
    const MatrixXcd c5 =
        (1.0 - mix.q) * ideal + mix.q / 32.0 * MatrixXcd::Identity(32, 32);
    return (1.0 - mix.r) * local + mix.r * c5;
}

Report check_density_operator(const MatrixXcd& rho, double tol) {
    Report rep;
    auto add = [&](const std::string& name, bool pass, double value) {
        std::ostringstream os;
        os << "deviation " << value;
        rep.items.push_back({name, pass, os.str()});
    };
    const double herm = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
    add("hermitian", herm <= tol, herm);
    const double tr = std::abs(rho.trace() - std::complex<double>(1.0));
    add("unit trace", tr <= tol, tr);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (rho + rho.adjoint()));
    const double min_eig = es.eigenvalues().minCoeff();
    add("positive semidefinite", min_eig >= -tol, min_eig);
    return rep;
}

DistillResult distill_5to1(const MatrixXcd& rho) {
    if (rho.rows() != 32 || rho.cols() != 32)
        throw std::invalid_argument("distill_5to1: expected a five-qubit state");
    const Protocol& pr = protocol();
    const MatrixXcd proj = pr.projector * rho * pr.projector;
    const double success = proj.trace().real();
    if (success < 1e-14)
        throw ZeroSuccess("distill_5to1: trivial-syndrome weight below 1e-14");
    DistillResult res;
    res.success_probability = success;
    res.output = (pr.decode * proj * pr.decode.adjoint()) / success;
    return res;
}

double output_error_rate(const Matrix2cd& d) {
    const double rate = 1.0 - (magic_state() * d).trace().real();
    return std::clamp(rate, 0.0, 1.0);
}

SweepResult distill_sweep(const std::vector<double>& qs, const std::vector<double>& rs) {
    SweepResult res;
    for (double r : rs) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t pts = 0;
        for (double q : qs) {
            const DistillResult d = distill_5to1(build_input_state({q, r}));
            const double err = output_error_rate(d.output);
            res.rows.push_back({q, r, d.success_probability, err});
            if (q > 0.0 && err > 0.0) {
                const double x = std::log(q), y = std::log(err);
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
                ++pts;
            }
        }
        SlopeFit fit;
        fit.r = r;
        fit.points = pts;
        fit.slope = pts >= 2 ? (pts * sxy - sx * sy) / (pts * sxx - sx * sx)
                             : std::numeric_limits<double>::quiet_NaN();
        res.slopes.push_back(fit);
    }
    return res;
}

} // namespace qsurgery
