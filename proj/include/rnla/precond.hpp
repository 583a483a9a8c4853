#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/SVD>

#include "rnla/core.hpp"
#include "rnla/lowrank.hpp"
#include "rnla/rng.hpp"

namespace rnla {

// Inverse of A_hat + mu I through the eigendecomposition A_hat = U diag(L) U*:
// apply(v) = U (L + mu)^{-1} U* v + mu^{-1} (v - U U* v), O(kn) per apply.
// k = 0 degenerates to the scalar preconditioner mu^{-1} I.
struct NystromPreconditioner {
    Matrix u;      // n x k orthonormal
    Vector lambda; // k nonnegative eigenvalues
    double mu = 0.0;

    Vector apply(const Vector& v) const {
        if (u.cols() == 0) return v / mu;
        const Vector utv = u.transpose() * v;
        const Vector scaled = utv.cwiseQuotient(lambda.array().operator+(mu).matrix());
        return u * scaled + (v - u * utv) / mu;
    }
};

// Builds the preconditioner from a randomly pivoted Cholesky factor of A:
// A_hat = F F*, eigendecomposed through the thin SVD of F.
inline NystromPreconditioner build_preconditioner(const EntryOracle& a, Index k, double mu,
                                                  RngStream rng) {
    if (!(mu > 0.0)) throw std::invalid_argument("build_preconditioner: mu must be positive");
    NystromPreconditioner p;
    p.mu = mu;
    if (k == 0) {
        p.u = Matrix(a.dim(), 0);
        p.lambda = Vector(0);
        return p;
    }
    const CholFactor chol = rpcholesky(a, k, std::nullopt, rng);
    if (chol.f.cols() == 0) {
        p.u = Matrix(a.dim(), 0);
        p.lambda = Vector(0);
        return p;
    }
    Eigen::JacobiSVD<Matrix> svd(chol.f, Eigen::ComputeThinU);
    p.u = svd.matrixU();
    p.lambda = svd.singularValues().cwiseAbs2();
    return p;
}

struct PcgResult {
    Vector x;
    long long iterations = 0;
    bool converged = false;
    std::vector<double> residual_norms; // ||b - (A + mu I) x|| / ||b||
};

// Preconditioned conjugate gradient on (A + mu I) x = b.  The recurrence
// residual drives the iteration; the true residual is recomputed every 25
// steps and on candidate convergence to guard against drift.
inline PcgResult pcg_solve(const std::function<Vector(const Vector&)>& apply_a, const Vector& b,
                           double mu, const NystromPreconditioner& p, double tol, long long maxit) {
    PcgResult out;
    const Index n = b.size();
    out.x = Vector::Zero(n);
    const double bnorm = b.norm();
    if (bnorm == 0.0) {
        out.converged = true;
        return out;
    }

    auto op = [&](const Vector& v) { return Vector(apply_a(v) + mu * v); };

    Vector r = b;
    Vector z = p.apply(r);
    Vector d = z;
    double rz = r.dot(z);

    for (long long it = 1; it <= maxit; ++it) {
        const Vector ad = op(d);
        const double dad = d.dot(ad);
        if (dad <= 0.0) break; // loss of positive definiteness: bail out
        const double alpha = rz / dad;
        out.x += alpha * d;
        r -= alpha * ad;
        if (it % 25 == 0) r = b - op(out.x);
        out.iterations = it;
        out.residual_norms.push_back(r.norm() / bnorm);
        if (r.norm() <= tol * bnorm) {
            r = b - op(out.x);
            out.residual_norms.back() = r.norm() / bnorm;
            if (r.norm() <= tol * bnorm) {
                out.converged = true;
                break;
            }
        }
        z = p.apply(r);
        const double rz_new = r.dot(z);
        d = z + (rz_new / rz) * d;
        rz = rz_new;
    }
    return out;
}

inline PcgResult pcg_solve(const Matrix& a, const Vector& b, double mu, const NystromPreconditioner& p,
                           double tol, long long maxit) {
    return pcg_solve([&a](const Vector& v) { return Vector(a * v); }, b, mu, p, tol, maxit);
}

inline PcgResult pcg_solve(const EntryOracle& a, const Vector& b, double mu,
                           const NystromPreconditioner& p, double tol, long long maxit) {
    return pcg_solve(
        [&a](const Vector& v) {
            const Index n = a.dim();
            Vector out(n);
            for (Index j = 0; j < n; ++j) {
                double acc = 0.0;
                for (Index k = 0; k < n; ++k) acc += a.entry(j, k) * v(k);
                out(j) = acc;
            }
            return out;
        },
        b, mu, p, tol, maxit);
}

} // namespace rnla
