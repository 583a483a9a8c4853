#pragma once

#include <Eigen/Dense>

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "rnla/rng.hpp"

namespace rnla {

using Matrix = Eigen::MatrixXd; // column-major
using Vector = Eigen::VectorXd;
using Index  = Eigen::Index;

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

// Nonincreasing list of nonnegative eigen/singular values.
struct SpectrumSpec {
    std::vector<double> values;

    SpectrumSpec() = default;
    SpectrumSpec(std::initializer_list<double> v) : values(v) { validate(); }
    explicit SpectrumSpec(std::vector<double> v) : values(std::move(v)) { validate(); }

    void validate() const {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (values[i] < 0.0)
                throw std::invalid_argument("SpectrumSpec: negative value");
            if (i > 0 && values[i] > values[i - 1])
                throw std::invalid_argument("SpectrumSpec: values must be nonincreasing");
        }
    }
    Index size() const { return static_cast<Index>(values.size()); }
};

// Access to a matrix through products x -> Ax and w -> A*w only.
// The call counter is shared through a pointer so oracle values can be
// copied while tests keep a single tally; increments are atomic.
class MatVecOracle {
public:
    using ApplyFn = std::function<Vector(const Vector&)>;

    MatVecOracle(Index rows, Index cols, ApplyFn apply, ApplyFn apply_adjoint)
        : rows_(rows), cols_(cols), apply_(std::move(apply)), adjoint_(std::move(apply_adjoint)),
          count_(std::make_shared<std::atomic<long long>>(0)) {}

    static MatVecOracle from_matrix(const Matrix& a) {
        // Copy the matrix into the closures so the oracle owns its data.
        auto m = std::make_shared<Matrix>(a);
        return MatVecOracle(
            m->rows(), m->cols(),
            [m](const Vector& v) { return Vector(*m * v); },
            [m](const Vector& w) { return Vector(m->transpose() * w); });
    }

    Index rows() const { return rows_; }
    Index cols() const { return cols_; }

    Vector apply(const Vector& v) const {
        if (v.size() != cols_) throw std::invalid_argument("MatVecOracle::apply: dimension mismatch");
        count_->fetch_add(1, std::memory_order_relaxed);
        return apply_(v);
    }
    Vector apply_adjoint(const Vector& w) const {
        if (w.size() != rows_) throw std::invalid_argument("MatVecOracle::apply_adjoint: dimension mismatch");
        count_->fetch_add(1, std::memory_order_relaxed);
        return adjoint_(w);
    }

    long long matvec_count() const { return count_->load(std::memory_order_relaxed); }
    void reset_count() const { count_->store(0, std::memory_order_relaxed); }

private:
    Index rows_, cols_;
    ApplyFn apply_, adjoint_;
    std::shared_ptr<std::atomic<long long>> count_;
};

// Pay-per-entry access to a symmetric psd matrix, the kernel-matrix cost
// model.  Every evaluated entry bumps the counter; diag() counts n.
class EntryOracle {
public:
    using EntryFn = std::function<double(Index, Index)>;

    EntryOracle(Index dim, EntryFn entry)
        : dim_(dim), entry_(std::move(entry)),
          count_(std::make_shared<std::atomic<long long>>(0)) {}

    static EntryOracle from_matrix(const Matrix& a) {
        if (a.rows() != a.cols()) throw std::invalid_argument("EntryOracle: matrix must be square");
        auto m = std::make_shared<Matrix>(a);
        return EntryOracle(m->rows(), [m](Index j, Index k) { return (*m)(j, k); });
    }

    Index dim() const { return dim_; }

    double entry(Index j, Index k) const {
        count_->fetch_add(1, std::memory_order_relaxed);
        return entry_(j, k);
    }

    Vector diag() const {
        Vector d(dim_);
        for (Index j = 0; j < dim_; ++j) d(j) = entry(j, j);
        return d;
    }

    Vector column(Index k) const {
        Vector c(dim_);
        for (Index j = 0; j < dim_; ++j) c(j) = entry(j, k);
        return c;
    }

    long long entry_eval_count() const { return count_->load(std::memory_order_relaxed); }
    void reset_count() const { count_->store(0, std::memory_order_relaxed); }

private:
    Index dim_;
    EntryFn entry_;
    std::shared_ptr<std::atomic<long long>> count_;
};

// Standard normal matrix, filled column by column.  Every routine that
// draws a Gaussian matrix goes through here so draw order is fixed.
inline Matrix standard_normal_matrix(Index rows, Index cols, RngStream& rng) {
    Matrix g(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i) g(i, j) = standard_normal(rng);
    return g;
}

inline Vector standard_normal_vector(Index n, RngStream& rng) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = standard_normal(rng);
    return v;
}

// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the
// R diagonal sign fixed so the factorization is unique.
inline Matrix haar_orthogonal(Index n, RngStream& rng) {
    if (n < 1) throw std::invalid_argument("haar_orthogonal: n must be >= 1");
    const Matrix g = standard_normal_matrix(n, n, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(n, n);
    const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j)
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    return q;
}

// Symmetric psd matrix with prescribed eigenvalues: A = Q diag(spec) Q*.
inline Matrix gen_psd(const SpectrumSpec& spec, RngStream& rng) {
    if (spec.size() == 0) throw std::invalid_argument("gen_psd: empty spectrum");
    const Index n = spec.size();
    const Matrix q = haar_orthogonal(n, rng);
    Matrix a = q * Eigen::Map<const Vector>(spec.values.data(), n).asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose()).eval();
    return a;
}

// Rectangular matrix with prescribed singular values: B = U Sigma V*.
inline Matrix gen_with_singular_values(Index m, Index n, const SpectrumSpec& spec, RngStream& rng) {
    if (spec.size() > std::min(m, n))
        throw std::invalid_argument("gen_with_singular_values: more singular values than min(m,n)");
    const Matrix u = haar_orthogonal(m, rng);
    const Matrix v = haar_orthogonal(n, rng);
    Matrix sigma = Matrix::Zero(m, n);
    for (Index i = 0; i < spec.size(); ++i) sigma(i, i) = spec.values[i];
    return u * sigma * v.transpose();
}

} // namespace rnla
