#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rnla/core.hpp"
#include "rnla/rng.hpp"

namespace rnla {

struct PowerTrace {
    std::vector<double> estimates; // xi_0 .. xi_T, Rayleigh quotients
    long long matvecs = 0;
    RngStream seed;
    bool degenerate = false; // iterate norm underflowed (zero matrix)
};

namespace eig_detail {

inline PowerTrace power_method_core(const MatVecOracle& a, long long t_max, Vector x, RngStream seed) {
    PowerTrace out;
    out.seed = seed;
    out.estimates.reserve(static_cast<std::size_t>(t_max) + 1);
    for (long long t = 0; t <= t_max; ++t) {
        const double nrm = x.norm();
        if (nrm < 1e-300) {
            out.degenerate = true;
            out.estimates.assign(static_cast<std::size_t>(t_max) + 1, 0.0);
            return out;
        }
        const Vector q = x / nrm;
        x = a.apply(q);
        ++out.matvecs;
        out.estimates.push_back(q.dot(x));
    }
    return out;
}

} // namespace eig_detail

// Power iteration from a standard normal start; T+1 matvecs, estimates
// xi_t = q_t* A q_t for t = 0..T.
inline PowerTrace rand_power_method(const MatVecOracle& a, long long t_max, RngStream rng) {
    if (a.rows() != a.cols()) throw std::invalid_argument("rand_power_method: oracle must be square");
    if (t_max < 0) throw std::invalid_argument("rand_power_method: T must be >= 0");
    const RngStream seed = rng;
    const Vector x0 = standard_normal_vector(a.cols(), rng);
    return eig_detail::power_method_core(a, t_max, x0, seed);
}

// Test hook: run from a caller-supplied start vector.
inline PowerTrace power_method_from_start(const MatVecOracle& a, long long t_max, const Vector& x0) {
    if (a.rows() != a.cols()) throw std::invalid_argument("power_method_from_start: oracle must be square");
    if (x0.size() != a.cols()) throw std::invalid_argument("power_method_from_start: bad start dimension");
    return eig_detail::power_method_core(a, t_max, x0, RngStream{});
}

// err(xi) = (lambda1 - xi) / lambda1.
inline double relative_error(double xi, double lambda1) {
    if (!(lambda1 > 0.0)) throw std::invalid_argument("relative_error: lambda1 must be positive");
    return (lambda1 - xi) / lambda1;
}

// Expected-error bound with a spectral gap: sqrt(2n) (lambda2/lambda1)^t.
inline double gap_bound(Index n, double lambda1, double lambda2, long long t) {
    if (!(lambda1 > lambda2 && lambda2 >= 0.0))
        throw std::invalid_argument("gap_bound: need lambda1 > lambda2 >= 0");
    return std::sqrt(2.0 * static_cast<double>(n)) * std::pow(lambda2 / lambda1, static_cast<double>(t));
}

// Gap-free expected-error bound: (1 + log sqrt(2n) + log t) / t.
inline double gapless_bound(Index n, long long t) {
    if (t < 1) throw std::invalid_argument("gapless_bound: t must be >= 1");
    const double td = static_cast<double>(t);
    return (1.0 + std::log(std::sqrt(2.0 * static_cast<double>(n))) + std::log(td)) / td;
}

struct JointDiagResult {
    Matrix q;              // orthogonal
    double off_residual_a; // ||offdiag(Q* A Q)||_F
    double off_residual_b;
};

inline double offdiag_norm(const Matrix& m) {
    Matrix off = m;
    off.diagonal().setZero();
    return off.norm();
}

// Eigenbasis of a random combination C = g1 A + g2 B; diagonalizes a
// commuting pair with probability one.
inline JointDiagResult joint_diagonalize(const Matrix& a, const Matrix& b, RngStream rng) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
        throw std::invalid_argument("joint_diagonalize: matrices must be square and same size");
    const double scale_a = std::max(1.0, a.norm());
    const double scale_b = std::max(1.0, b.norm());
    if ((a - a.transpose()).norm() > 1e-10 * scale_a || (b - b.transpose()).norm() > 1e-10 * scale_b)
        throw std::invalid_argument("joint_diagonalize: inputs must be symmetric");

    const double g1 = standard_normal(rng);
    const double g2 = standard_normal(rng);
    const Matrix c = g1 * a + g2 * b;
    Eigen::SelfAdjointEigenSolver<Matrix> es(c);
    JointDiagResult out;
    out.q = es.eigenvectors();
    out.off_residual_a = offdiag_norm(out.q.transpose() * a * out.q);
    out.off_residual_b = offdiag_norm(out.q.transpose() * b * out.q);
    return out;
}

} // namespace rnla
