#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rnla/core.hpp"
#include "rnla/rng.hpp"

namespace rnla {

// Isotropic test-vector families: E[x x*] = I.
enum class TestVectorDist { signs, sphere, gaussian };

inline Vector draw_test_vector(Index n, TestVectorDist dist, RngStream& rng) {
    switch (dist) {
    case TestVectorDist::signs: {
        Vector x(n);
        for (Index i = 0; i < n; ++i) x(i) = random_sign(rng);
        return x;
    }
    case TestVectorDist::sphere: {
        // Normalized Gaussian scaled to radius sqrt(n).
        Vector x = standard_normal_vector(n, rng);
        const double nrm = x.norm();
        if (nrm == 0.0) return Vector::Zero(n);
        return std::sqrt(static_cast<double>(n)) * (x / nrm);
    }
    case TestVectorDist::gaussian:
        return standard_normal_vector(n, rng);
    }
    throw std::logic_error("draw_test_vector: unknown distribution");
}

struct TraceEstimate {
    double value = 0.0;             // mean of the per-sample estimates
    double variance_estimate = 0.0; // sample variance of the mean, >= 0
    bool variance_defined = false;  // requires s >= 2
    bool variance_clamped = false;  // negative due to cancellation, clamped
    bool converged = true;          // adaptive runs may exhaust their budget
    std::vector<double> per_sample; // Y_i = x_i* (A x_i)
    long long samples() const { return static_cast<long long>(per_sample.size()); }
};

namespace trace_detail {

inline void finalize(TraceEstimate& est) {
    const auto s = est.per_sample.size();
    if (s == 0) throw std::invalid_argument("trace estimate: no samples");
    double sum = 0.0;
    for (double y : est.per_sample) sum += y;
    est.value = sum / static_cast<double>(s);
    if (s >= 2) {
        double sq = 0.0;
        for (double y : est.per_sample) sq += (y - est.value) * (y - est.value);
        double v = sq / (static_cast<double>(s) * static_cast<double>(s - 1));
        est.variance_clamped = (v < 0.0);
        est.variance_estimate = std::max(v, 0.0);
        est.variance_defined = true;
    } else {
        est.variance_defined = false;
        est.variance_estimate = 0.0;
    }
}

} // namespace trace_detail

// Monte Carlo trace estimator: tr_hat = mean of Y_i = x_i*(A x_i), one
// matvec per sample.  Unbiased for tr(A) for any isotropic distribution.
inline TraceEstimate hutchinson(const MatVecOracle& a, long long s, TestVectorDist dist, RngStream rng) {
    if (a.rows() != a.cols()) throw std::invalid_argument("hutchinson: oracle must be square");
    if (s < 1) throw std::invalid_argument("hutchinson: s must be >= 1");
    TraceEstimate est;
    est.per_sample.reserve(static_cast<std::size_t>(s));
    for (long long i = 0; i < s; ++i) {
        RngStream rs = substream(rng, static_cast<std::uint64_t>(i));
        const Vector x = draw_test_vector(a.cols(), dist, rs);
        est.per_sample.push_back(x.dot(a.apply(x)));
    }
    trace_detail::finalize(est);
    return est;
}

// Draws until the variance estimate certifies relative error eps, checking
// after every sample from s = 2 on; flags instead of failing at the budget.
inline TraceEstimate adaptive_trace(const MatVecOracle& a, double eps, long long max_samples,
                                    TestVectorDist dist, RngStream rng) {
    if (a.rows() != a.cols()) throw std::invalid_argument("adaptive_trace: oracle must be square");
    if (!(eps > 0.0)) throw std::invalid_argument("adaptive_trace: eps must be positive");
    if (max_samples < 1) throw std::invalid_argument("adaptive_trace: max_samples must be >= 1");
    TraceEstimate est;
    est.converged = false;
    for (long long i = 0; i < max_samples; ++i) {
        RngStream rs = substream(rng, static_cast<std::uint64_t>(i));
        const Vector x = draw_test_vector(a.cols(), dist, rs);
        est.per_sample.push_back(x.dot(a.apply(x)));
        if (est.samples() >= 2) {
            trace_detail::finalize(est);
            const double target = eps * est.value;
            if (est.variance_estimate <= target * target) {
                est.converged = true;
                return est;
            }
        }
    }
    trace_detail::finalize(est);
    return est;
}

// tr(A) / ||A||_2 for symmetric psd A; 0 for the zero matrix.
inline double intdim(const Matrix& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("intdim: matrix must be square");
    if ((a - a.transpose()).norm() > 1e-10 * std::max(1.0, a.norm()))
        throw std::invalid_argument("intdim: matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
    const Vector& ev = es.eigenvalues(); // ascending
    const double lmax = ev(ev.size() - 1);
    if (ev(0) < -1e-10 * std::max(1.0, lmax))
        throw std::invalid_argument("intdim: matrix is not psd");
    if (lmax <= 0.0) return 0.0;
    return a.trace() / lmax;
}

// Samples for relative error eps at nontrivial Chebyshev failure
// probability: ceil(2 / (eps^2 * intdim)).
inline long long trace_samples_needed(double intrinsic_dim, double eps) {
    if (!(intrinsic_dim > 0.0)) throw std::invalid_argument("trace_samples_needed: intdim must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("trace_samples_needed: eps must be positive");
    const double s = 2.0 / (eps * eps * intrinsic_dim);
    return std::max<long long>(1, static_cast<long long>(std::ceil(s)));
}

// ||B||_F^2 = tr(B* B): Hutchinson on the Gram oracle, 2s matvecs.
inline TraceEstimate frobenius_sq_estimate(const MatVecOracle& b, long long s, TestVectorDist dist,
                                           RngStream rng) {
    if (s < 1) throw std::invalid_argument("frobenius_sq_estimate: s must be >= 1");
    MatVecOracle gram(
        b.cols(), b.cols(),
        [&b](const Vector& x) { return b.apply_adjoint(b.apply(x)); },
        [&b](const Vector& x) { return b.apply_adjoint(b.apply(x)); });
    TraceEstimate est;
    est.per_sample.reserve(static_cast<std::size_t>(s));
    for (long long i = 0; i < s; ++i) {
        RngStream rs = substream(rng, static_cast<std::uint64_t>(i));
        const Vector x = draw_test_vector(b.cols(), dist, rs);
        est.per_sample.push_back(x.dot(gram.apply(x)));
    }
    trace_detail::finalize(est);
    return est;
}

// ||B||_{S4}^4 = ||B*B||_F^2 from the sample variance of the Gram-matrix
// trace samples with standard normal test vectors: Var[x*(B*B)x] = 2||B*B||_F^2,
// so half the sample variance is unbiased for the Schatten-4 power.
inline double schatten4_estimate(const MatVecOracle& b, long long s, RngStream rng) {
    if (s < 2) throw std::invalid_argument("schatten4_estimate: s must be >= 2");
    std::vector<double> y;
    y.reserve(static_cast<std::size_t>(s));
    for (long long i = 0; i < s; ++i) {
        RngStream rs = substream(rng, static_cast<std::uint64_t>(i));
        const Vector x = standard_normal_vector(b.cols(), rs);
        const Vector bx = b.apply(x);
        y.push_back(bx.squaredNorm()); // x* (B*B) x
    }
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(s);
    double sq = 0.0;
    for (double v : y) sq += (v - mean) * (v - mean);
    const double sample_var = sq / static_cast<double>(s - 1);
    return 0.5 * sample_var;
}

} // namespace rnla
