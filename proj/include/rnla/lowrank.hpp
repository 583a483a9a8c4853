#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "rnla/core.hpp"
#include "rnla/rng.hpp"

namespace rnla {

// Orthonormal basis for the range of Y via column-pivoted QR with rank
// cutoff 1e-12 * ||Y||_F; may return fewer than Y.cols() columns.
inline Matrix orth(const Matrix& y) {
    if (y.size() == 0 || y.norm() == 0.0) return Matrix(y.rows(), 0);
    Eigen::ColPivHouseholderQR<Matrix> qr(y);
    const double cutoff = 1e-12 * y.norm();
    const Matrix r = qr.matrixR().template triangularView<Eigen::Upper>();
    Index rank = 0;
    const Index kmax = std::min(y.rows(), y.cols());
    for (Index i = 0; i < kmax; ++i)
        if (std::abs(r(i, i)) > cutoff) ++rank;
    Matrix q = qr.householderQ() * Matrix::Identity(y.rows(), rank);
    return q;
}

struct SvdFactors {
    Matrix u;
    Vector sigma;
    Matrix v;
};

struct LowRankApprox {
    Matrix q; // m x k orthonormal
    Matrix c; // k x n, approximation is Q C
    std::optional<SvdFactors> svd;

    Matrix dense() const { return q * c; }
    Index rank() const { return q.cols(); }
};

namespace lowrank_detail {

// Shared core of the randomized SVD and subspace iteration; the SVD is
// the T = 1 case, so one stream gives bitwise identical results there.
inline LowRankApprox subspace_core(const MatVecOracle& b, Index s, long long t_max, RngStream& rng,
                                   bool want_svd) {
    const Index m = b.rows();
    const Index n = b.cols();
    Matrix x = standard_normal_matrix(n, s, rng); // test matrix Omega

    Matrix q;
    for (long long t = 1; t <= t_max; ++t) {
        Matrix y(m, x.cols());
        for (Index j = 0; j < x.cols(); ++j) y.col(j) = b.apply(x.col(j));
        q = orth(y);
        x.resize(n, q.cols());
        for (Index j = 0; j < q.cols(); ++j) x.col(j) = b.apply_adjoint(q.col(j));
    }

    LowRankApprox out;
    out.q = q;
    out.c = x.transpose(); // Q* B
    if (want_svd && out.c.size() > 0) {
        Eigen::JacobiSVD<Matrix> svd(out.c, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.svd = SvdFactors{out.q * svd.matrixU(), svd.singularValues(), svd.matrixV()};
    }
    return out;
}

} // namespace lowrank_detail

// Rank-s approximation B_hat = Q Q* B with Gaussian test matrix;
// s matvecs with B and (for full-rank sketches) s with B*.
inline LowRankApprox randomized_svd(const MatVecOracle& b, Index s, RngStream rng,
                                    bool want_svd = false) {
    if (s < 1 || s > std::min(b.rows(), b.cols()))
        throw std::invalid_argument("randomized_svd: need 1 <= s <= min(m,n)");
    return lowrank_detail::subspace_core(b, s, 1, rng, want_svd);
}

// T rounds of orth(B X) / B* Q; T = 1 reproduces randomized_svd exactly.
inline LowRankApprox subspace_iteration(const MatVecOracle& b, Index s, long long t_max, RngStream rng,
                                        bool want_svd = false) {
    if (s < 1 || s > std::min(b.rows(), b.cols()))
        throw std::invalid_argument("subspace_iteration: need 1 <= s <= min(m,n)");
    if (t_max < 1) throw std::invalid_argument("subspace_iteration: T must be >= 1");
    return lowrank_detail::subspace_core(b, s, t_max, rng, want_svd);
}

// Expected Frobenius-error bound (1 + r/(s-r-1)) * tail_r for the
// randomized SVD; defined only for s >= r + 2.
inline double rsvd_error_bound(const SpectrumSpec& sigma, Index r, Index s) {
    if (s < r + 2) throw std::invalid_argument("rsvd_error_bound: need s >= r + 2");
    double tail = 0.0;
    for (Index i = r; i < sigma.size(); ++i) tail += sigma.values[static_cast<std::size_t>(i)] *
                                                     sigma.values[static_cast<std::size_t>(i)];
    return (1.0 + static_cast<double>(r) / static_cast<double>(s - r - 1)) * tail;
}

struct CholFactor {
    Matrix f;                  // n x k, approximation is F F*
    std::vector<Index> pivots; // selected columns, in order
    Vector residual_diag;      // diagonal of A - F F*, clamped at 0

    Matrix dense() const { return f * f.transpose(); }
};

// Partial Cholesky with pivots sampled in proportion to the residual
// diagonal.  Costs (k+1) n entry evaluations: the diagonal plus one column
// per accepted pivot.  With stop_eta set, halts once the residual trace
// drops below stop_eta * tr(A).
inline CholFactor rpcholesky(const EntryOracle& a, Index k, std::optional<double> stop_eta,
                             RngStream rng) {
    if (k < 1) throw std::invalid_argument("rpcholesky: k must be >= 1");
    const Index n = a.dim();
    Vector d = a.diag();
    const double trace_a = d.sum();
    if (d.minCoeff() < -1e-12 * std::max(1.0, trace_a))
        throw std::invalid_argument("rpcholesky: negative diagonal entry");

    CholFactor out;
    out.f = Matrix::Zero(n, k);
    std::vector<bool> excluded(static_cast<std::size_t>(n), false);
    std::vector<double> cum(static_cast<std::size_t>(n));

    Index t = 0;
    long long draw = 0;
    while (t < k) {
        double total = 0.0;
        for (Index j = 0; j < n; ++j) {
            total += excluded[static_cast<std::size_t>(j)] ? 0.0 : std::max(d(j), 0.0);
            cum[static_cast<std::size_t>(j)] = total;
        }
        if (total <= 0.0) break; // residual is numerically zero: done early

        RngStream rs = substream(rng, static_cast<std::uint64_t>(draw++));
        const Index piv = static_cast<Index>(discrete_from_cumulative(rs, cum));

        Vector col(n);
        for (Index j = 0; j < n; ++j) col(j) = a.entry(j, piv);
        if (t > 0) col -= out.f.leftCols(t) * out.f.row(piv).head(t).transpose();

        if (col(piv) <= 0.0) {
            // Numerically dead pivot: drop it from the distribution and redraw.
            excluded[static_cast<std::size_t>(piv)] = true;
            d(piv) = 0.0;
            continue;
        }

        out.f.col(t) = col / std::sqrt(col(piv));
        out.pivots.push_back(piv);
        d -= out.f.col(t).cwiseAbs2();
        d = d.cwiseMax(0.0);
        ++t;

        if (stop_eta && d.sum() < *stop_eta * trace_a) break;
    }

    out.f.conservativeResize(n, t);
    out.residual_diag = d;
    return out;
}

// Column Nystrom approximation A<S> = A(:,S) A(S,S)^+ A(S,:).
inline Matrix nystrom_from_pivots(const Matrix& a, const std::vector<Index>& pivots) {
    if (pivots.empty()) throw std::invalid_argument("nystrom_from_pivots: empty pivot set");
    for (std::size_t i = 0; i < pivots.size(); ++i)
        for (std::size_t j = i + 1; j < pivots.size(); ++j)
            if (pivots[i] == pivots[j]) throw std::invalid_argument("nystrom_from_pivots: duplicate pivot");

    const Index k = static_cast<Index>(pivots.size());
    Matrix w(a.rows(), k);
    Matrix g(k, k);
    for (Index j = 0; j < k; ++j) {
        w.col(j) = a.col(pivots[static_cast<std::size_t>(j)]);
        for (Index i = 0; i < k; ++i)
            g(i, j) = a(pivots[static_cast<std::size_t>(i)], pivots[static_cast<std::size_t>(j)]);
    }

    // Pseudoinverse of the (symmetric) core with relative cutoff.
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    const Vector& ev = es.eigenvalues();
    const double cutoff = 1e-12 * ev.cwiseAbs().maxCoeff();
    Vector inv = Vector::Zero(k);
    for (Index i = 0; i < k; ++i)
        if (std::abs(ev(i)) > cutoff) inv(i) = 1.0 / ev(i);
    const Matrix gpinv = es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();

    Matrix result = w * gpinv * w.transpose();
    return 0.5 * (result + result.transpose()).eval();
}

// Columns needed for (1+eps) trace-norm competitiveness against the best
// rank-r approximation: ceil(r/eps + r log(1/(eps eta))).
inline Index rpc_rank_needed(Index r, double eps, double eta) {
    if (r < 1) throw std::invalid_argument("rpc_rank_needed: r must be >= 1");
    if (!(eps > 0.0)) throw std::invalid_argument("rpc_rank_needed: eps must be positive");
    if (!(eta > 0.0 && eta < 1.0)) throw std::invalid_argument("rpc_rank_needed: need 0 < eta < 1");
    const double k = static_cast<double>(r) / eps + static_cast<double>(r) * std::log(1.0 / (eps * eta));
    return static_cast<Index>(std::ceil(k));
}

} // namespace rnla
