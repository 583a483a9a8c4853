#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "rnla/core.hpp"
#include "rnla/rng.hpp"
#include "rnla/sketch.hpp"
#include "rnla/lowrank.hpp"

namespace rnla {

// Overdetermined problem: minimize 0.5 ||A x - b||^2 with n >= d.
struct LsProblem {
    Matrix a;
    Vector b;

    LsProblem(Matrix a_, Vector b_) : a(std::move(a_)), b(std::move(b_)) {
        if (a.rows() != b.size()) throw std::invalid_argument("LsProblem: dimension mismatch");
        if (!a.allFinite() || !b.allFinite()) throw std::invalid_argument("LsProblem: non-finite data");
    }

    Vector solve_dense() const { return a.colPivHouseholderQr().solve(b); }
};

// kappa_dem = ||A||_F / sigma_min; between kappa and sqrt(d) kappa.
inline double demmel_cond(const Matrix& a) {
    Eigen::JacobiSVD<Matrix> svd(a);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (a.rows() < a.cols() || smin <= 1e-14 * sv(0))
        return std::numeric_limits<double>::infinity();
    return a.norm() / smin;
}

struct KaczmarzTrace {
    std::vector<double> probs;    // row-sampling distribution
    std::vector<Vector> iterates; // x_0 .. x_T
    std::vector<Index> selected;  // row chosen at each step
    const Vector& solution() const { return iterates.back(); }

    std::vector<double> errors_sq(const Vector& x_star) const {
        std::vector<double> e;
        e.reserve(iterates.size());
        for (const auto& x : iterates) e.push_back((x - x_star).squaredNorm());
        return e;
    }
};

// Projects onto one randomly chosen equation per step, rows sampled with
// probability ||a_i||^2 / ||A||_F^2; zero rows get probability zero.
inline KaczmarzTrace rand_kaczmarz(const LsProblem& p, const Vector& x0, long long t_max, RngStream rng) {
    const Index n = p.a.rows();
    if (x0.size() != p.a.cols()) throw std::invalid_argument("rand_kaczmarz: bad x0 dimension");
    if (t_max < 0) throw std::invalid_argument("rand_kaczmarz: T must be >= 0");
    const double fsq = p.a.squaredNorm();
    if (fsq == 0.0) throw std::invalid_argument("rand_kaczmarz: zero matrix");

    KaczmarzTrace out;
    out.probs.resize(static_cast<std::size_t>(n));
    std::vector<double> cum(static_cast<std::size_t>(n));
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
        out.probs[static_cast<std::size_t>(i)] = p.a.row(i).squaredNorm() / fsq;
        acc += out.probs[static_cast<std::size_t>(i)];
        cum[static_cast<std::size_t>(i)] = acc;
    }

    Vector x = x0;
    out.iterates.reserve(static_cast<std::size_t>(t_max) + 1);
    out.iterates.push_back(x);
    for (long long t = 0; t < t_max; ++t) {
        RngStream rs = substream(rng, static_cast<std::uint64_t>(t));
        const Index i = static_cast<Index>(discrete_from_cumulative(rs, cum));
        const auto row = p.a.row(i);
        x -= ((row.dot(x) - p.b(i)) / row.squaredNorm()) * row.transpose();
        out.iterates.push_back(x);
        out.selected.push_back(i);
    }
    return out;
}

struct SketchSolveResult {
    Vector x;
    double residual_norm = 0.0; // ||A x - b||
    bool rank_deficient = false;
};

// Sketch-and-solve: solve the embedded problem min ||Phi(A x - b)|| and
// accept its minimizer.  The embedding should cover range([A, b]).
inline SketchSolveResult sketch_solve_ls(const LsProblem& p, const Embedding& e) {
    if (e.n != p.a.rows()) throw std::invalid_argument("sketch_solve_ls: embedding ambient dim mismatch");
    const Matrix c = apply(e, p.a);
    const Vector d = apply(e, Vector(p.b));
    Eigen::ColPivHouseholderQR<Matrix> qr(c);
    SketchSolveResult out;
    out.rank_deficient = qr.rank() < p.a.cols();
    out.x = qr.solve(d);
    out.residual_norm = (p.a * out.x - p.b).norm();
    return out;
}

struct IterativeSketchTrace {
    std::vector<Vector> iterates;
    std::vector<double> residual_norms; // ||A x_t - b||
    bool aborted = false;               // divergence detector fired
    const Vector& solution() const { return iterates.back(); }
};

// Iterative sketching: x_{t+1} = x_t - (A* Phi* Phi A)^{-1} A*(A x_t - b),
// applied through the R factor of the sketched matrix, warm-started from
// the sketch-and-solve point.  The true solution is the fixed point.
inline IterativeSketchTrace iterative_sketch_ls(const LsProblem& p, const Embedding& e, long long iters) {
    if (e.n != p.a.rows()) throw std::invalid_argument("iterative_sketch_ls: embedding ambient dim mismatch");
    if (iters < 0) throw std::invalid_argument("iterative_sketch_ls: iters must be >= 0");
    const Index d = p.a.cols();
    const Matrix c = apply(e, p.a);
    Eigen::ColPivHouseholderQR<Matrix> qr(c);
    if (qr.rank() < d) throw std::invalid_argument("iterative_sketch_ls: sketched matrix is rank deficient");

    const Matrix r = qr.matrixR().topRows(d).template triangularView<Eigen::Upper>();
    const auto& perm = qr.colsPermutation();

    // (C*C)^{-1} g through the pivoted factorization C P = Q R.
    auto normal_solve = [&](const Vector& g) -> Vector {
        Vector y = perm.transpose() * g;
        y = r.template triangularView<Eigen::Upper>().transpose().solve(y);
        y = r.template triangularView<Eigen::Upper>().solve(y);
        return perm * y;
    };

    IterativeSketchTrace out;
    Vector x = qr.solve(apply(e, Vector(p.b))); // sketch-and-solve start
    out.iterates.push_back(x);
    out.residual_norms.push_back((p.a * x - p.b).norm());

    int rising = 0;
    for (long long t = 0; t < iters; ++t) {
        const Vector g = p.a.transpose() * (p.a * x - p.b);
        x -= normal_solve(g);
        out.iterates.push_back(x);
        out.residual_norms.push_back((p.a * x - p.b).norm());
        const auto k = out.residual_norms.size();
        rising = (out.residual_norms[k - 1] > out.residual_norms[k - 2]) ? rising + 1 : 0;
        if (rising >= 3) {
            out.aborted = true;
            break;
        }
    }
    return out;
}

struct WhitenResult {
    Matrix r;                  // d x d upper triangular factor of Phi A P
    std::vector<Index> perm;   // column permutation from the pivoted QR
    double eps = 0.0;          // measured distortion of E on range(A)
    double kappa_bound = 0.0;  // (1 + eps) / (1 - eps)

    // The whitened matrix B = (A P) R^{-1}, materialized.
    Matrix whitened(const Matrix& a) const {
        Matrix ap(a.rows(), a.cols());
        for (Index j = 0; j < a.cols(); ++j) ap.col(j) = a.col(perm[static_cast<std::size_t>(j)]);
        return r.template triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(ap);
    }
};

// Randomized Gram-Schmidt: QR of the sketched matrix yields a triangular
// factor whose inverse approximately orthogonalizes A.
inline WhitenResult whiten(const Matrix& a, const Embedding& e) {
    if (e.n != a.rows()) throw std::invalid_argument("whiten: embedding ambient dim mismatch");
    const Index d = a.cols();
    const Matrix c = apply(e, a);
    Eigen::ColPivHouseholderQR<Matrix> qr(c);
    if (qr.rank() < d) throw std::invalid_argument("whiten: sketched matrix is rank deficient");

    WhitenResult out;
    out.r = qr.matrixR().topRows(d).template triangularView<Eigen::Upper>();
    out.perm.resize(static_cast<std::size_t>(d));
    for (Index j = 0; j < d; ++j) out.perm[static_cast<std::size_t>(j)] = qr.colsPermutation().indices()(j);
    out.eps = distortion(e, orth(a));
    out.kappa_bound = (1.0 + out.eps) / (1.0 - out.eps);
    return out;
}

// Trailing k right singular vectors of the sketched matrix; competitive
// with the best k-dimensional null space of A.
inline Matrix approx_null_space(const Matrix& a, Index k, const Embedding& e) {
    if (e.n != a.rows()) throw std::invalid_argument("approx_null_space: embedding ambient dim mismatch");
    const Index d = a.cols();
    if (k < 1 || k > d) throw std::invalid_argument("approx_null_space: need 1 <= k <= d");
    const Matrix c = apply(e, a);
    Eigen::JacobiSVD<Matrix> svd(c, Eigen::ComputeFullV);
    return svd.matrixV().rightCols(k);
}

struct LsqrResult {
    Vector x;
    long long iterations = 0;
    bool converged = false;
    std::vector<double> residual_norms;
};

namespace lsqr_detail {

// Spectral-norm estimate of M by power iteration on M*M from a fixed
// deterministic start.
inline double operator_norm_estimate(const std::function<Vector(const Vector&)>& apply_m,
                                     const std::function<Vector(const Vector&)>& apply_mt,
                                     Index cols) {
    Vector v = Vector::Ones(cols);
    v(0) += 0.5; // break symmetry against alternating-sign eigenvectors
    v.normalize();
    double est = 0.0;
    for (int it = 0; it < 30; ++it) {
        Vector w = apply_mt(apply_m(v));
        const double nrm = w.norm();
        if (nrm == 0.0) return 0.0;
        est = std::sqrt(nrm);
        v = w / nrm;
    }
    return est;
}

} // namespace lsqr_detail

// Paige-Saunders LSQR on min ||M y - b|| with M given as a pair of
// operator applications.  Stops when the residual or the relative
// normal-equation residual ||M* r|| / (||M|| ||r||) reaches tol; the
// recurrence estimates are confirmed against explicitly computed
// quantities before declaring convergence.
inline LsqrResult lsqr(const std::function<Vector(const Vector&)>& apply_m,
                       const std::function<Vector(const Vector&)>& apply_mt, Index cols,
                       const Vector& b, double tol, long long maxit) {
    LsqrResult out;
    out.x = Vector::Zero(cols);

    double beta = b.norm();
    if (beta == 0.0) {
        out.converged = true;
        return out;
    }
    Vector u = b / beta;
    Vector v = apply_mt(u);
    double alpha = v.norm();
    if (alpha == 0.0) {
        out.converged = true; // b is orthogonal to range(M); x = 0 is optimal
        return out;
    }
    v /= alpha;
    Vector w = v;
    double phibar = beta;
    double rhobar = alpha;
    const double bnorm = beta;
    const double anorm = lsqr_detail::operator_norm_estimate(apply_m, apply_mt, cols);

    for (long long it = 1; it <= maxit; ++it) {
        u = apply_m(v) - alpha * u;
        beta = u.norm();
        if (beta > 0.0) u /= beta;

        v = apply_mt(u) - beta * v;
        alpha = v.norm();
        if (alpha > 0.0) v /= alpha;

        const double rho = std::hypot(rhobar, beta);
        const double cs = rhobar / rho;
        const double sn = beta / rho;
        const double theta = sn * alpha;
        rhobar = -cs * alpha;
        const double phi = cs * phibar;
        phibar = sn * phibar;

        out.x += (phi / rho) * w;
        w = v - (theta / rho) * w;
        out.iterations = it;

        const double rnorm = phibar;                          // ||M y - b||
        const double arnorm = phibar * alpha * std::abs(cs);  // ||M*(M y - b)||
        out.residual_norms.push_back(rnorm);
        if (rnorm <= tol * bnorm || arnorm <= tol * anorm * rnorm) {
            // Confirm with the true residual; recurrences can drift once
            // the iteration stagnates in floating point.
            const Vector r = apply_m(out.x) - b;
            const double true_rnorm = r.norm();
            const double true_arnorm = apply_mt(r).norm();
            if (true_rnorm <= tol * bnorm || true_arnorm <= tol * anorm * true_rnorm) {
                out.converged = true;
                break;
            }
        }
    }
    return out;
}

inline LsqrResult lsqr(const Matrix& a, const Vector& b, double tol, long long maxit) {
    return lsqr([&a](const Vector& y) { return Vector(a * y); },
                [&a](const Vector& z) { return Vector(a.transpose() * z); }, a.cols(), b, tol, maxit);
}

struct PreconditionedLsqrResult {
    Vector x;
    long long iterations = 0;
    bool converged = false;
    double eps = 0.0; // measured distortion used for the whitening bound
    std::vector<double> residual_norms;
};

// Sketch-and-precondition: whiten with the embedding's R factor and run
// LSQR on min ||(A P R^{-1}) y - b||, applying the preconditioner by
// triangular solves only.
inline PreconditionedLsqrResult sketch_precondition_lsqr(const LsProblem& p, const Embedding& e,
                                                         double tol, long long maxit) {
    const WhitenResult wh = whiten(p.a, e);
    const Index d = p.a.cols();

    Matrix ap(p.a.rows(), d);
    for (Index j = 0; j < d; ++j) ap.col(j) = p.a.col(wh.perm[static_cast<std::size_t>(j)]);

    auto apply_m = [&](const Vector& y) {
        const Vector t = wh.r.template triangularView<Eigen::Upper>().solve(y);
        return Vector(ap * t);
    };
    auto apply_mt = [&](const Vector& z) {
        const Vector t = ap.transpose() * z;
        return Vector(wh.r.template triangularView<Eigen::Upper>().transpose().solve(t));
    };

    const LsqrResult inner = lsqr(apply_m, apply_mt, d, p.b, tol, maxit);

    PreconditionedLsqrResult out;
    out.iterations = inner.iterations;
    out.converged = inner.converged;
    out.eps = wh.eps;
    out.residual_norms = inner.residual_norms;
    const Vector t = wh.r.template triangularView<Eigen::Upper>().solve(inner.x);
    out.x = Vector::Zero(d);
    for (Index j = 0; j < d; ++j) out.x(wh.perm[static_cast<std::size_t>(j)]) = t(j);
    return out;
}

} // namespace rnla
