#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include <Eigen/SVD>

#include "rnla/core.hpp"
#include "rnla/rng.hpp"

namespace rnla {

enum class EmbeddingKind { gaussian, srtt, sparse_sign };

// A sketching operator Phi in R^{s x n}.  Gaussian and sparse-sign data are
// regenerated on demand from the stored stream snapshot; the SRTT stores its
// row subset and sign diagonal explicitly.
struct Embedding {
    EmbeddingKind kind = EmbeddingKind::gaussian;
    Index s = 0;
    Index n = 0;
    RngStream seed;
    int zeta = 0;                  // sparse_sign: nonzeros per column
    std::vector<Index> row_sample; // srtt: s row indices, without replacement
    Vector sign_diagonal;          // srtt: +-1 entries, length n
};

namespace dct_detail {

// Unnormalized DCT-II: X_k = sum_j x_j cos(pi (2j+1) k / (2n)).
inline void dct2_direct(Vector& x) {
    const Index n = x.size();
    Vector out(n);
    for (Index k = 0; k < n; ++k) {
        double acc = 0.0;
        for (Index j = 0; j < n; ++j)
            acc += x(j) * std::cos(std::numbers::pi * (2.0 * j + 1.0) * k / (2.0 * n));
        out(k) = acc;
    }
    x = out;
}

// Lee's recursive split, O(n log n) for power-of-two lengths.  The two
// buffers alternate roles as input and scratch down the recursion.
inline void dct2_fast_pow2(double* x, double* tmp, Index n) {
    if (n == 1) return;
    const Index h = n / 2;
    for (Index i = 0; i < h; ++i) {
        const double a = x[i];
        const double b = x[n - 1 - i];
        tmp[i]     = a + b;
        tmp[h + i] = (a - b) / (2.0 * std::cos(std::numbers::pi * (2.0 * i + 1.0) / (2.0 * n)));
    }
    dct2_fast_pow2(tmp, x, h);
    dct2_fast_pow2(tmp + h, x, h);
    for (Index i = 0; i + 1 < h; ++i) {
        x[2 * i]     = tmp[i];
        x[2 * i + 1] = tmp[h + i] + tmp[h + i + 1];
    }
    x[n - 2] = tmp[h - 1];
    x[n - 1] = tmp[n - 1];
}

inline bool is_pow2(Index n) { return n > 0 && (n & (n - 1)) == 0; }

inline constexpr Index kFastPathMin = 512;

// Orthonormal DCT-II applied in place.
inline void dct2_orthonormal(Vector& x) {
    const Index n = x.size();
    if (n == 0) return;
    if (is_pow2(n) && n >= kFastPathMin) {
        std::vector<double> scratch(n);
        dct2_fast_pow2(x.data(), scratch.data(), n);
    } else {
        dct2_direct(x);
    }
    const double scale = std::sqrt(2.0 / n);
    x *= scale;
    x(0) /= std::numbers::sqrt2;
}

} // namespace dct_detail

// Explicit orthonormal DCT-II matrix; the dense reference for the transform.
inline Matrix dct2_matrix(Index n) {
    Matrix f(n, n);
    for (Index k = 0; k < n; ++k) {
        const double alpha = (k == 0) ? std::sqrt(1.0 / n) : std::sqrt(2.0 / n);
        for (Index j = 0; j < n; ++j)
            f(k, j) = alpha * std::cos(std::numbers::pi * (2.0 * j + 1.0) * k / (2.0 * n));
    }
    return f;
}

// Entries i.i.d. normal(0, 1/s), so E||Phi x||^2 = ||x||^2 for fixed x.
inline Embedding build_gaussian(Index s, Index n, RngStream rng) {
    if (s < 1 || n < 1) throw std::invalid_argument("build_gaussian: s and n must be >= 1");
    Embedding e;
    e.kind = EmbeddingKind::gaussian;
    e.s = s;
    e.n = n;
    e.seed = rng;
    return e;
}

// sqrt(n/s) R D F with R a uniform s-subset of rows of I_n (no replacement),
// D a random sign diagonal, F the orthonormal DCT-II.
inline Embedding build_srtt(Index s, Index n, RngStream rng) {
    if (s < 1 || n < 1) throw std::invalid_argument("build_srtt: s and n must be >= 1");
    if (s > n) throw std::invalid_argument("build_srtt: s must not exceed n");
    Embedding e;
    e.kind = EmbeddingKind::srtt;
    e.s = s;
    e.n = n;
    e.seed = rng;

    std::vector<Index> pool(n);
    for (Index i = 0; i < n; ++i) pool[i] = i;
    for (Index t = 0; t < s; ++t) {
        const Index r = t + static_cast<Index>(uniform_index(rng, n - t));
        std::swap(pool[t], pool[r]);
    }
    e.row_sample.assign(pool.begin(), pool.begin() + s);

    e.sign_diagonal.resize(n);
    for (Index i = 0; i < n; ++i) e.sign_diagonal(i) = random_sign(rng);
    return e;
}

// Columns i.i.d., each with exactly zeta nonzeros +-1/sqrt(zeta) at
// uniformly random distinct positions.
inline Embedding build_sparse_sign(Index s, Index n, int zeta, RngStream rng) {
    if (s < 1 || n < 1) throw std::invalid_argument("build_sparse_sign: s and n must be >= 1");
    if (zeta < 1 || zeta > s) throw std::invalid_argument("build_sparse_sign: need 1 <= zeta <= s");
    Embedding e;
    e.kind = EmbeddingKind::sparse_sign;
    e.s = s;
    e.n = n;
    e.zeta = zeta;
    e.seed = rng;
    return e;
}

inline Embedding build_sparse_sign(Index s, Index n, RngStream rng) {
    return build_sparse_sign(s, n, static_cast<int>(std::min<Index>(8, s)), rng);
}

namespace sketch_detail {

// Per-column nonzero pattern of the sparse-sign map: zeta positions by
// partial Fisher-Yates, then zeta signs, drawn in a fixed order.
inline void sparse_column(const Embedding& e, RngStream& rs, std::vector<Index>& pos, std::vector<double>& val) {
    const Index s = e.s;
    const int zeta = e.zeta;
    std::vector<Index> pool(s);
    for (Index i = 0; i < s; ++i) pool[i] = i;
    pos.resize(zeta);
    val.resize(zeta);
    for (int t = 0; t < zeta; ++t) {
        const Index r = t + static_cast<Index>(uniform_index(rs, s - t));
        std::swap(pool[t], pool[r]);
        pos[t] = pool[t];
    }
    const double mag = 1.0 / std::sqrt(static_cast<double>(zeta));
    for (int t = 0; t < zeta; ++t) val[t] = random_sign(rs) * mag;
}

} // namespace sketch_detail

// Materializes Phi * X.
inline Matrix apply(const Embedding& e, const Matrix& x) {
    if (x.rows() != e.n) throw std::invalid_argument("sketch apply: X must have n rows");
    switch (e.kind) {
    case EmbeddingKind::gaussian: {
        RngStream rs = e.seed;
        const Matrix phi = standard_normal_matrix(e.s, e.n, rs) / std::sqrt(static_cast<double>(e.s));
        return phi * x;
    }
    case EmbeddingKind::srtt: {
        Matrix out(e.s, x.cols());
        const double scale = std::sqrt(static_cast<double>(e.n) / static_cast<double>(e.s));
        for (Index j = 0; j < x.cols(); ++j) {
            Vector y = e.sign_diagonal.cwiseProduct(x.col(j));
            dct_detail::dct2_orthonormal(y);
            for (Index i = 0; i < e.s; ++i) out(i, j) = scale * y(e.row_sample[i]);
        }
        return out;
    }
    case EmbeddingKind::sparse_sign: {
        Matrix out = Matrix::Zero(e.s, x.cols());
        RngStream rs = e.seed;
        std::vector<Index> pos;
        std::vector<double> val;
        for (Index col = 0; col < e.n; ++col) {
            sketch_detail::sparse_column(e, rs, pos, val);
            for (int t = 0; t < e.zeta; ++t) out.row(pos[t]) += val[t] * x.row(col);
        }
        return out;
    }
    }
    throw std::logic_error("sketch apply: unknown embedding kind");
}

inline Vector apply(const Embedding& e, const Vector& x) {
    return Vector(apply(e, Matrix(x)));
}

// Dense materialization of the operator.
inline Matrix materialize(const Embedding& e) {
    return apply(e, Matrix(Matrix::Identity(e.n, e.n)));
}

// eps = max(sigma_max(Phi U) - 1, 1 - sigma_min(Phi U)) for an orthonormal
// basis U of the embedded subspace.
inline double distortion(const Embedding& e, const Matrix& u) {
    if (u.rows() != e.n) throw std::invalid_argument("distortion: U must have n rows");
    const double ortho_err = (u.transpose() * u - Matrix::Identity(u.cols(), u.cols())).norm();
    if (ortho_err > 1e-10)
        throw std::invalid_argument("distortion: U is not orthonormal");
    const Matrix c = apply(e, u);
    Eigen::JacobiSVD<Matrix> svd(c);
    const auto& sv = svd.singularValues();
    const double smax = sv(0);
    const double smin = sv(sv.size() - 1);
    return std::max(smax - 1.0, 1.0 - smin);
}

// Embedding dimension for subspace dimension d at distortion eps.
inline Index embedding_dim_for(Index d, double eps) {
    if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("embedding_dim_for: need 0 < eps <= 1");
    if (d < 1) throw std::invalid_argument("embedding_dim_for: d must be >= 1");
    return static_cast<Index>(std::ceil(static_cast<double>(d) / (eps * eps)));
}

} // namespace rnla
