#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/SVD>

#include "rnla/core.hpp"
#include "rnla/matrix_market.hpp"
#include "rnla/rng.hpp"

namespace rnla {

// A target B = sum_j B_j together with sampling probabilities p_j.
// summand_scaled(j) returns p_j^{-1} B_j, the one-draw estimator value.
struct SampleableDecomposition {
    Index m = 0, n = 0;
    std::vector<double> probs;
    std::function<Matrix(std::size_t)> summand_scaled;

    void validate() const {
        if (probs.empty()) throw std::invalid_argument("SampleableDecomposition: empty");
        double total = 0.0;
        for (double p : probs) {
            if (p < 0.0) throw std::invalid_argument("SampleableDecomposition: negative probability");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("SampleableDecomposition: probabilities must sum to 1");
    }

    std::vector<double> cumulative() const {
        std::vector<double> c(probs.size());
        double acc = 0.0;
        for (std::size_t j = 0; j < probs.size(); ++j) {
            acc += probs[j];
            c[j] = acc;
        }
        return c;
    }

    // One draw: (index, p_j^{-1} B_j).
    std::pair<std::size_t, Matrix> draw(RngStream& rng, const std::vector<double>& cum) const {
        const std::size_t j = discrete_from_cumulative(rng, cum);
        return {j, summand_scaled(j)};
    }
};

struct MCMatrixEstimate {
    Matrix matrix;
    long long samples = 0;
};

struct SparseMCEstimate {
    SparseCoo coo;
    long long samples = 0;
};

// B_hat_s = (1/s) sum of i.i.d. draws; unbiased for B.
inline MCMatrixEstimate mc_approximate(const SampleableDecomposition& d, long long s, RngStream rng) {
    if (s < 1) throw std::invalid_argument("mc_approximate: s must be >= 1");
    d.validate();
    const auto cum = d.cumulative();
    Matrix acc = Matrix::Zero(d.m, d.n);
    for (long long i = 0; i < s; ++i) {
        RngStream rs = substream(rng, static_cast<std::uint64_t>(i));
        acc += d.draw(rs, cum).second;
    }
    return {acc / static_cast<double>(s), s};
}

// Column-sampling decomposition of B = A A* with p_j proportional to the
// spectral norms ||a_j a_j*|| = ||a_j||^2.
inline SampleableDecomposition matmul_decomposition(const Matrix& a, bool uniform_probs = false) {
    const double fsq = a.squaredNorm();
    if (fsq == 0.0) throw std::invalid_argument("matmul_decomposition: zero matrix");
    SampleableDecomposition d;
    d.m = a.rows();
    d.n = a.rows();
    d.probs.resize(static_cast<std::size_t>(a.cols()));
    for (Index j = 0; j < a.cols(); ++j)
        d.probs[static_cast<std::size_t>(j)] =
            uniform_probs ? 1.0 / static_cast<double>(a.cols()) : a.col(j).squaredNorm() / fsq;
    auto am = std::make_shared<Matrix>(a);
    auto probs = d.probs;
    d.summand_scaled = [am, probs](std::size_t j) -> Matrix {
        const double p = probs[j];
        if (p == 0.0) return Matrix::Zero(am->rows(), am->rows());
        const Vector c = am->col(static_cast<Index>(j));
        return (c * c.transpose()) / p;
    };
    return d;
}

// Approximates B = A A* by sampling s rescaled column outer products.
// Output is symmetric psd with rank at most s.
inline MCMatrixEstimate approx_matmul(const Matrix& a, long long s, RngStream rng,
                                      bool uniform_probs = false) {
    auto est = mc_approximate(matmul_decomposition(a, uniform_probs), s, rng);
    est.matrix = 0.5 * (est.matrix + est.matrix.transpose()).eval();
    return est;
}

// Kundu-Drineas entrywise sampling probabilities.
inline Matrix sparsify_probabilities(const Matrix& b) {
    const double fsq = b.squaredNorm();
    const double l1 = b.cwiseAbs().sum();
    if (fsq == 0.0) throw std::invalid_argument("sparsify_probabilities: zero matrix");
    return 0.5 * (b.cwiseAbs2() / fsq + b.cwiseAbs() / l1);
}

// Sparse proxy with at most s nonzeros; duplicate draws merge by summing
// their scaled contributions.
inline SparseMCEstimate sparsify(const Matrix& b, long long s, RngStream rng) {
    if (s < 1) throw std::invalid_argument("sparsify: s must be >= 1");
    const Matrix p = sparsify_probabilities(b);

    std::vector<double> cum(static_cast<std::size_t>(p.size()));
    double acc = 0.0;
    for (Index k = 0; k < p.size(); ++k) {
        acc += p(k); // column-major linear index
        cum[static_cast<std::size_t>(k)] = acc;
    }

    std::map<std::pair<Index, Index>, double> merged;
    for (long long i = 0; i < s; ++i) {
        RngStream rs = substream(rng, static_cast<std::uint64_t>(i));
        const auto flat = static_cast<Index>(discrete_from_cumulative(rs, cum));
        const Index row = flat % b.rows();
        const Index col = flat / b.rows();
        merged[{row, col}] += b(row, col) / p(row, col) / static_cast<double>(s);
    }

    SparseMCEstimate est;
    est.samples = s;
    est.coo.rows = b.rows();
    est.coo.cols = b.cols();
    est.coo.entries.reserve(merged.size());
    for (const auto& [rc, v] : merged) est.coo.entries.push_back({rc.first, rc.second, v});
    return est;
}

inline double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

// Exact per-sample second moment v(Y) and uniform bound L(Y), by weighted
// summation over the finite index set.
inline std::pair<double, double> mc_stats(const SampleableDecomposition& d) {
    d.validate();
    Matrix eyy = Matrix::Zero(d.m, d.m);
    Matrix eyty = Matrix::Zero(d.n, d.n);
    double l = 0.0;
    for (std::size_t j = 0; j < d.probs.size(); ++j) {
        if (d.probs[j] == 0.0) continue;
        const Matrix y = d.summand_scaled(j);
        eyy += d.probs[j] * (y * y.transpose());
        eyty += d.probs[j] * (y.transpose() * y);
        l = std::max(l, spectral_norm(y));
    }
    const double v = std::max(spectral_norm(eyy), spectral_norm(eyty));
    return {v, l};
}

// Sample count for expected relative spectral error eps:
// ceil(4 max{v / (eps^2 ||B||^2), L / (eps ||B||)} log(m+n)).
inline long long matrix_samples_needed(double v, double l, double norm_b, double eps, Index m, Index n) {
    if (!(v > 0.0 && l > 0.0 && norm_b > 0.0)) throw std::invalid_argument("matrix_samples_needed: need positive v, L, ||B||");
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("matrix_samples_needed: need 0 < eps <= 1");
    const double term = std::max(v / (eps * eps * norm_b * norm_b), l / (eps * norm_b));
    return static_cast<long long>(std::ceil(4.0 * term * std::log(static_cast<double>(m + n))));
}

// Expected spectral-norm error bound at s samples:
// sqrt(2 v log(m+n) / s) + L log(m+n) / s.
inline double matrix_mc_error_bound(double v, double l, Index m, Index n, long long s) {
    const double logmn = std::log(static_cast<double>(m + n));
    return std::sqrt(2.0 * v * logmn / static_cast<double>(s)) + l * logmn / static_cast<double>(s);
}

} // namespace rnla
