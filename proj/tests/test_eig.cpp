#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "rnla/core.hpp"
#include "rnla/eig.hpp"

using namespace rnla;

namespace {

Matrix psd_with_ratio(Index n, double ratio, RngStream& rng) {
    std::vector<double> spec;
    double v = 1.0;
    for (Index i = 0; i < n; ++i) {
        spec.push_back(v);
        v *= ratio;
    }
    return gen_psd(SpectrumSpec(spec), rng);
}

} // namespace

TEST(PowerMethod, IdentityHasZeroError) {
    const MatVecOracle a = MatVecOracle::from_matrix(Matrix::Identity(6, 6));
    const PowerTrace tr = rand_power_method(a, 10, make_stream(1));
    for (double xi : tr.estimates) EXPECT_NEAR(xi, 1.0, 1e-12);
    EXPECT_EQ(tr.matvecs, 11);
}

TEST(PowerMethod, HandUnrolledTwoByTwo) {
    Matrix a = Matrix::Zero(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 0.5;
    Vector start(2);
    start << 1.0, 1.0;
    const PowerTrace tr = power_method_from_start(MatVecOracle::from_matrix(a), 1, start);
    EXPECT_NEAR(tr.estimates[0], 0.75, 1e-14);
    EXPECT_NEAR(tr.estimates[1], 0.9, 1e-14);
}

TEST(PowerMethod, RayleighQuotientsStayInRange) {
    RngStream gen = make_stream(2);
    const Matrix a = psd_with_ratio(8, 0.7, gen);
    const MatVecOracle o = MatVecOracle::from_matrix(a);
    RngStream master = make_stream(3);
    for (int rep = 0; rep < 50; ++rep) {
        const PowerTrace tr = rand_power_method(o, 15, substream(master, rep));
        for (double xi : tr.estimates) {
            EXPECT_GE(xi, -1e-12);
            EXPECT_LE(xi, 1.0 + 1e-12);
        }
    }
}

TEST(PowerMethod, MeanErrorDominatedByGapBound) {
    const Index n = 16;
    const double ratio = 0.5;
    RngStream gen = make_stream(4);
    const Matrix a = psd_with_ratio(n, ratio, gen);
    const MatVecOracle o = MatVecOracle::from_matrix(a);

    const long long t_max = 20;
    const int seeds = 1000;
    std::vector<double> mean_err(t_max + 1, 0.0);
    RngStream master = make_stream(5);
    for (int s = 0; s < seeds; ++s) {
        const PowerTrace tr = rand_power_method(o, t_max, substream(master, s));
        for (long long t = 0; t <= t_max; ++t)
            mean_err[t] += relative_error(tr.estimates[t], 1.0);
    }
    for (long long t = 1; t <= t_max; ++t) {
        mean_err[t] /= seeds;
        EXPECT_LE(mean_err[t], gap_bound(n, 1.0, ratio, t)) << "t = " << t;
    }
}

TEST(PowerMethod, PerSeedFirstStepInequality) {
    // err(xi_1) <= sum_{i>1} w_i^2 l_i^2 / (w_1^2 + sum_{i>1} w_i^2 l_i^2)
    // for every start, with the matrix normalized to lambda_1 = 1.
    const Index n = 10;
    RngStream gen = make_stream(6);
    std::vector<double> spec{1.0};
    for (Index i = 1; i < n; ++i) spec.push_back(0.8 / double(i));
    const Matrix q = haar_orthogonal(n, gen);
    const Matrix a = q * Eigen::Map<Vector>(spec.data(), n).asDiagonal() * q.transpose();
    const MatVecOracle o = MatVecOracle::from_matrix(a);

    RngStream master = make_stream(7);
    for (int rep = 0; rep < 200; ++rep) {
        RngStream rs = substream(master, rep);
        RngStream replay = rs;
        const PowerTrace tr = rand_power_method(o, 1, rs);
        const Vector omega_ambient = standard_normal_vector(n, replay);
        const Vector w = q.transpose() * omega_ambient;
        double tail = 0.0;
        for (Index i = 1; i < n; ++i) tail += w(i) * w(i) * spec[i] * spec[i];
        const double rhs = tail / (w(0) * w(0) + tail);
        EXPECT_LE(relative_error(tr.estimates[1], 1.0), rhs + 1e-12);
    }
}

TEST(PowerMethod, GaplessBoundDominates) {
    // Flat leading spectrum then decay; no usable gap.
    const Index n = 16;
    std::vector<double> spec(4, 1.0);
    double v = 0.95;
    for (Index i = 4; i < n; ++i) {
        spec.push_back(v);
        v *= 0.95;
    }
    RngStream gen = make_stream(8);
    const Matrix a = gen_psd(SpectrumSpec(spec), gen);
    const MatVecOracle o = MatVecOracle::from_matrix(a);

    const long long t_max = 50;
    const int seeds = 500;
    std::vector<double> mean_err(t_max + 1, 0.0);
    RngStream master = make_stream(9);
    for (int s = 0; s < seeds; ++s) {
        const PowerTrace tr = rand_power_method(o, t_max, substream(master, s));
        for (long long t = 0; t <= t_max; ++t)
            mean_err[t] += relative_error(tr.estimates[t], 1.0);
    }
    for (long long t = 1; t <= t_max; ++t)
        EXPECT_LE(mean_err[t] / seeds, gapless_bound(n, t)) << "t = " << t;
}

TEST(PowerMethod, ConvergesOnEverySeed) {
    const Index n = 8;
    RngStream gen = make_stream(10);
    const Matrix a = psd_with_ratio(n, 0.5, gen);
    const MatVecOracle o = MatVecOracle::from_matrix(a);
    RngStream master = make_stream(11);
    for (int s = 0; s < 1000; ++s) {
        const PowerTrace tr = rand_power_method(o, 60, substream(master, s));
        EXPECT_LT(relative_error(tr.estimates.back(), 1.0), 1e-6) << "seed " << s;
    }
}

TEST(PowerMethod, AsymptoticRateApproachesGapSquared) {
    Matrix a = Matrix::Zero(3, 3);
    a(0, 0) = 1.0;
    a(1, 1) = 0.9;
    a(2, 2) = 0.5;
    Vector start(3);
    start << 1.0, 1.0, 1.0;
    const PowerTrace tr = power_method_from_start(MatVecOracle::from_matrix(a), 40, start);
    const double e1 = relative_error(tr.estimates[35], 1.0);
    const double e2 = relative_error(tr.estimates[36], 1.0);
    EXPECT_NEAR(e2 / e1, 0.81, 0.01 * 0.81);
}

TEST(PowerMethod, ZeroMatrixFlagsDegenerate) {
    const MatVecOracle o = MatVecOracle::from_matrix(Matrix::Zero(4, 4));
    const PowerTrace tr = rand_power_method(o, 5, make_stream(12));
    EXPECT_TRUE(tr.degenerate);
    for (double xi : tr.estimates) EXPECT_EQ(xi, 0.0);
}

TEST(RelativeError, Endpoints) {
    EXPECT_EQ(relative_error(1.0, 1.0), 0.0);
    EXPECT_EQ(relative_error(0.0, 1.0), 1.0);
    EXPECT_NEAR(relative_error(0.75, 1.0), 0.25, 1e-15);
    EXPECT_THROW(relative_error(0.5, 0.0), std::invalid_argument);
}

TEST(GapBound, FormulaValues) {
    EXPECT_NEAR(gap_bound(8, 1.0, 0.5, 0), 4.0, 1e-12);
    EXPECT_EQ(gap_bound(8, 1.0, 0.0, 1), 0.0);
    EXPECT_NEAR(gap_bound(16, 1.0, 0.5, 4), std::sqrt(32.0) / 16.0, 1e-12);
    EXPECT_THROW(gap_bound(8, 1.0, 1.0, 1), std::invalid_argument);
}

TEST(GaplessBound, FormulaValues) {
    EXPECT_NEAR(gapless_bound(8, 1), 1.0 + std::log(4.0), 1e-12);
    // 1/t scaling up to the log term.
    const double b4 = gapless_bound(8, 40);
    const double b1 = gapless_bound(8, 10);
    EXPECT_NEAR(b1 / b4, 4.0, 1.0);
    EXPECT_THROW(gapless_bound(8, 0), std::invalid_argument);
    // Monotone decreasing from t = 3 on.
    for (long long t = 3; t < 100; ++t)
        EXPECT_LT(gapless_bound(32, t + 1), gapless_bound(32, t));
}

TEST(GaplessBound, FixedPointIterationCount) {
    // Smallest t with t >= (1 + log sqrt(2n) + log t)/eps certifies
    // gapless_bound(n, t) <= eps.
    const Index n = 64;
    const double eps = 0.1;
    long long t = 1;
    while (gapless_bound(n, t) > eps) ++t;
    EXPECT_LE(gapless_bound(n, t), eps);
    EXPECT_GT(gapless_bound(n, t - 1), eps);
}

TEST(GaussianIntegralFact, QuadratureConfirmsBound) {
    // E[c/(g^2+c)] <= sqrt(pi c / 2) for standard normal g, on a grid of c.
    auto expectation = [](double c) {
        // Simpson's rule on [-40, 40]; integrand decays like the Gaussian.
        const int steps = 200000;
        const double a = -40.0, b = 40.0;
        const double h = (b - a) / steps;
        auto f = [c](double x) {
            return c / (x * x + c) * std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
        };
        double acc = f(a) + f(b);
        for (int i = 1; i < steps; ++i) acc += f(a + i * h) * ((i % 2) ? 4.0 : 2.0);
        return acc * h / 3.0;
    };
    for (double c : {1e-4, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0}) {
        const double lhs = expectation(c);
        EXPECT_LE(lhs, std::sqrt(std::numbers::pi * c / 2.0) + 1e-10) << "c = " << c;
    }
}

TEST(JointDiag, DiagonalPairAlreadyDiagonal) {
    Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
    a.diagonal() << 1.0, 2.0;
    b.diagonal() << 3.0, 4.0;
    const JointDiagResult r = joint_diagonalize(a, b, make_stream(13));
    EXPECT_LE(r.off_residual_a, 1e-10);
    EXPECT_LE(r.off_residual_b, 1e-10);
}

TEST(JointDiag, CommutingPairDiagonalized) {
    const Index n = 8;
    RngStream gen = make_stream(14);
    const Matrix q = haar_orthogonal(n, gen);
    Vector l1(n), l2(n);
    for (Index i = 0; i < n; ++i) {
        l1(i) = double(n - i);
        l2(i) = double(i * i) / double(n);
    }
    const Matrix a = q * l1.asDiagonal() * q.transpose();
    const Matrix b = q * l2.asDiagonal() * q.transpose();
    RngStream master = make_stream(15);
    for (int rep = 0; rep < 20; ++rep) {
        const JointDiagResult r = joint_diagonalize(a, b, substream(master, rep));
        EXPECT_LE(r.off_residual_a, 1e-8);
        EXPECT_LE(r.off_residual_b, 1e-8);
        EXPECT_LE((r.q.transpose() * r.q - Matrix::Identity(n, n)).norm(), 1e-12);
    }
}

TEST(JointDiag, NoncommutingPairLeavesResidual) {
    Matrix a(2, 2), b(2, 2);
    a << 0, 1, 1, 0;
    b << 1, 0, 0, 0;
    const JointDiagResult r = joint_diagonalize(a, b, make_stream(16));
    EXPECT_GT(std::max(r.off_residual_a, r.off_residual_b), 1e-3);
}

TEST(JointDiag, RejectsAsymmetricInput) {
    Matrix a(2, 2), b(2, 2);
    a << 0, 1, 0, 0;
    b.setIdentity();
    EXPECT_THROW(joint_diagonalize(a, b, make_stream(17)), std::invalid_argument);
}
