#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <thread>

#include "rnla/core.hpp"
#include "rnla/lowrank.hpp"

using namespace rnla;

TEST(HaarOrthogonal, OneByOneIsSign) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RngStream rs = make_stream(seed);
        const Matrix q = haar_orthogonal(1, rs);
        EXPECT_NEAR(std::abs(q(0, 0)), 1.0, 1e-14);
    }
}

TEST(HaarOrthogonal, OrthogonalToTolerance) {
    RngStream rs = make_stream(3);
    for (Index n : {2, 5, 17}) {
        const Matrix q = haar_orthogonal(n, rs);
        EXPECT_LE((q.transpose() * q - Matrix::Identity(n, n)).norm(), 1e-12);
    }
}

TEST(HaarOrthogonal, DistinctSeedsDistinctDraws) {
    RngStream a = make_stream(1), b = make_stream(2);
    const Matrix qa = haar_orthogonal(3, a);
    const Matrix qb = haar_orthogonal(3, b);
    EXPECT_GT((qa - qb).norm(), 0.0);
}

TEST(GenPsd, RankOneTraceOne) {
    RngStream rs = make_stream(11);
    const Matrix a = gen_psd(SpectrumSpec{1.0, 0.0, 0.0}, rs);
    EXPECT_NEAR(a.trace(), 1.0, 1e-12);
    Eigen::JacobiSVD<Matrix> svd(a);
    EXPECT_LE(svd.singularValues()(1), 1e-12);
}

TEST(GenPsd, IdentitySpectrumGivesIdentity) {
    RngStream rs = make_stream(12);
    const Matrix a = gen_psd(SpectrumSpec{1.0, 1.0, 1.0}, rs);
    EXPECT_LE((a - Matrix::Identity(3, 3)).norm(), 1e-12);
}

TEST(GenPsd, EigenvaluesMatchSpec) {
    RngStream rs = make_stream(13);
    const Matrix a = gen_psd(SpectrumSpec{2.0, 1.0}, rs);
    EXPECT_LE((a - a.transpose()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    EXPECT_NEAR(es.eigenvalues()(1), 2.0, 1e-10);
    EXPECT_NEAR(es.eigenvalues()(0), 1.0, 1e-10);
}

TEST(GenSingularValues, RankOneFrobenius) {
    RngStream rs = make_stream(14);
    const Matrix b = gen_with_singular_values(2, 2, SpectrumSpec{1.0}, rs);
    EXPECT_NEAR(b.norm(), 1.0, 1e-12);
}

TEST(GenSingularValues, SvdRecoversSpec) {
    RngStream rs = make_stream(15);
    const Matrix b = gen_with_singular_values(5, 3, SpectrumSpec{3.0, 2.0, 1.0}, rs);
    Eigen::JacobiSVD<Matrix> svd(b);
    EXPECT_NEAR(svd.singularValues()(0), 3.0, 1e-10);
    EXPECT_NEAR(svd.singularValues()(1), 2.0, 1e-10);
    EXPECT_NEAR(svd.singularValues()(2), 1.0, 1e-10);
}

TEST(GenSingularValues, AllZeroSpecGivesZero) {
    RngStream rs = make_stream(16);
    const Matrix b = gen_with_singular_values(4, 3, SpectrumSpec{0.0, 0.0}, rs);
    EXPECT_EQ(b.norm(), 0.0);
}

TEST(SpectrumSpec, RejectsIncreasingOrNegative) {
    EXPECT_THROW(SpectrumSpec({1.0, 2.0}), std::invalid_argument);
    EXPECT_THROW(SpectrumSpec({1.0, -0.5}), std::invalid_argument);
}

TEST(MatVecOracle, CountsEveryApplication) {
    const Matrix a = Matrix::Random(4, 3);
    const MatVecOracle o = MatVecOracle::from_matrix(a);
    const Vector v = Vector::Random(3), w = Vector::Random(4);
    EXPECT_LE((o.apply(v) - a * v).norm(), 1e-14);
    EXPECT_LE((o.apply_adjoint(w) - a.transpose() * w).norm(), 1e-14);
    EXPECT_EQ(o.matvec_count(), 2);
}

TEST(MatVecOracle, ApplyIsLinear) {
    RngStream rs = make_stream(21);
    const Matrix a = standard_normal_matrix(6, 6, rs);
    const MatVecOracle o = MatVecOracle::from_matrix(a);
    const Vector u = standard_normal_vector(6, rs), v = standard_normal_vector(6, rs);
    const double alpha = 2.5;
    const Vector lhs = o.apply(alpha * u + v);
    const Vector rhs = alpha * o.apply(u) + o.apply(v);
    EXPECT_LE((lhs - rhs).norm(), 1e-12 * (u.norm() + v.norm()));
}

TEST(MatVecOracle, RejectsDimensionMismatch) {
    const MatVecOracle o = MatVecOracle::from_matrix(Matrix::Random(4, 3));
    EXPECT_THROW(o.apply(Vector::Random(4)), std::invalid_argument);
    EXPECT_THROW(o.apply_adjoint(Vector::Random(3)), std::invalid_argument);
}

TEST(EntryOracle, SymmetryAndCounting) {
    RngStream rs = make_stream(22);
    const Matrix a = gen_psd(SpectrumSpec{3.0, 2.0, 1.0, 0.5}, rs);
    const EntryOracle o = EntryOracle::from_matrix(a);
    EXPECT_EQ(o.entry(1, 2), o.entry(2, 1));
    o.reset_count();
    const Vector d = o.diag();
    EXPECT_EQ(o.entry_eval_count(), 4);
    for (Index j = 0; j < 4; ++j) EXPECT_EQ(d(j), a(j, j));
}

TEST(Reproducibility, IdenticalStreamsBitwiseIdenticalResults) {
    RngStream gen = make_stream(40);
    const Matrix b = standard_normal_matrix(10, 8, gen);
    const MatVecOracle o = MatVecOracle::from_matrix(b);
    const LowRankApprox a1 = randomized_svd(o, 4, make_stream(41, 9));
    const LowRankApprox a2 = randomized_svd(o, 4, make_stream(41, 9));
    EXPECT_EQ((a1.q - a2.q).norm(), 0.0);
    EXPECT_EQ((a1.c - a2.c).norm(), 0.0);

    const Matrix psd = gen_psd(SpectrumSpec{2.0, 1.0, 0.5}, gen);
    const EntryOracle eo = EntryOracle::from_matrix(psd);
    const CholFactor f1 = rpcholesky(eo, 2, std::nullopt, make_stream(42, 3));
    const CholFactor f2 = rpcholesky(eo, 2, std::nullopt, make_stream(42, 3));
    EXPECT_EQ(f1.pivots, f2.pivots);
    EXPECT_EQ((f1.f - f2.f).norm(), 0.0);
}

TEST(Oracles, CountersSafeUnderConcurrentUse) {
    const Matrix a = Matrix::Identity(16, 16);
    const MatVecOracle o = MatVecOracle::from_matrix(a);
    const int threads = 4, per_thread = 500;
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            const Vector v = Vector::Ones(16);
            for (int i = 0; i < per_thread; ++i) o.apply(v);
        });
    for (auto& t : pool) t.join();
    EXPECT_EQ(o.matvec_count(), threads * per_thread);
}
