// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "chanpred/channel.hpp"
#include "chanpred/numerics.hpp"
#include "oracles.hpp"

using namespace chanpred;

namespace {

double residual_norm(const CVector& first_row, double loading, const CVector& x, const CVector& rhs) {
    const auto a = oracle::hermitian_toeplitz(first_row, loading);
    const std::size_t n = rhs.size();
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        Complex s{};
        for (std::size_t j = 0; j < n; ++j) s += a[i * n + j] * x[j];
        r2 += std::norm(s - rhs[i]);
    }
    return std::sqrt(r2);
}

double vec_norm(const CVector& v) {
    double s = 0.0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
}

} // namespace

TEST(BesselJ0, ValueAtZero) { EXPECT_EQ(bessel_j0(0.0), 1.0); }

TEST(BesselJ0, MatchesSeriesOracleAtUnitLagArgument) {
    const double expected = static_cast<double>(oracle::j0_series(0.6283L));
    EXPECT_NEAR(bessel_j0(0.6283), expected, 1e-12);
    EXPECT_NEAR(bessel_j0(0.6283), 0.9037, 1e-4);
}

TEST(BesselJ0, FirstZero) {
    const double root = oracle::bisect([](long double x) { return oracle::j0_series(x); }, 2.0L, 3.0L);
    EXPECT_NEAR(root, 2.404826, 1e-6);
    EXPECT_LT(std::abs(bessel_j0(2.404826)), 1e-5);
    EXPECT_LT(std::abs(bessel_j0(root)), 1e-12);
}

TEST(BesselJ0, AccurateOnGridAgainstSeriesOracle) {
    // Extended-precision series is reliable up to |x| ~ 20.
    for (double x = 0.0; x <= 20.0; x += 0.01) {
        ASSERT_NEAR(bessel_j0(x), static_cast<double>(oracle::j0_series(x)), 1e-9) << "x=" << x;
    }
}

TEST(BesselJ0, AccurateOnGridAgainstStdSpecialFunction) {
    for (double x = 0.0; x <= 50.0; x += 0.0137) {
        ASSERT_NEAR(bessel_j0(x), std::cyl_bessel_j(0.0, x), 1e-9) << "x=" << x;
    }
}

TEST(BesselJ0, IsEven) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = u(gen);
        ASSERT_EQ(bessel_j0(x), bessel_j0(-x));
    }
}

TEST(BesselJ0, RejectsNonFinite) {
    EXPECT_THROW(bessel_j0(std::nan("")), domain_error);
    EXPECT_THROW(bessel_j0(INFINITY), domain_error);
}

TEST(ToeplitzSolve, OneByOne) {
    const auto w = solve_hermitian_toeplitz({{1.0}, 0.0}, CVector{0.9});
    ASSERT_EQ(w.size(), 1u);
    EXPECT_NEAR(w[0].real(), 0.9, 1e-15);
    EXPECT_NEAR(w[0].imag(), 0.0, 1e-15);
}

TEST(ToeplitzSolve, RankOneWithLoading) {
    const CVector ones{1.0, 1.0, 1.0};
    const auto w = solve_hermitian_toeplitz({ones, 1e-6}, ones);
    const auto ref = oracle::dense_solve(oracle::hermitian_toeplitz(ones, 1e-6), ones);
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(w[i].real(), 1.0 / (3.0 + 1e-6), 1e-9);
        EXPECT_NEAR(std::abs(w[i] - ref[i]), 0.0, 1e-8);
    }
}

TEST(ToeplitzSolve, TwoByTwoDirectElimination) {
    // [[1, .5], [.5, 1]] w = [.5, .25]: w1 = (.25 - .5 * .5) / (1 - .25) = 0, w0 = .5.
    const auto w = solve_hermitian_toeplitz({{1.0, 0.5}, 0.0}, CVector{0.5, 0.25});
    EXPECT_NEAR(std::abs(w[0] - Complex(0.5)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(w[1]), 0.0, 1e-14);
}

TEST(ToeplitzSolve, AgreesWithDenseOracleOnRandomWellConditionedSystems) {
    std::mt19937_64 gen(1234);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 16;
        CVector row(n);
        double off = 0.0;
        for (std::size_t k = 1; k < n; ++k) {
            row[k] = Complex(u(gen), u(gen));
            off += std::abs(row[k]);
        }
        row[0] = 1.0 + 2.0 * off;
        CVector rhs(n);
        for (auto& r : rhs) r = Complex(u(gen), u(gen));
        const auto w = solve_hermitian_toeplitz({row, 0.0}, rhs);
        const auto ref = oracle::dense_solve(oracle::hermitian_toeplitz(row, 0.0), rhs);
        double diff = 0.0;
        for (std::size_t i = 0; i < n; ++i) diff += std::norm(w[i] - ref[i]);
        ASSERT_LE(std::sqrt(diff), 1e-8 * vec_norm(ref)) << "n=" << n;
        ASSERT_LE(residual_norm(row, 0.0, w, rhs), 1e-8 * (vec_norm(rhs) + 1.0));
    }
}

TEST(ToeplitzSolve, IndefiniteMatrixUsesPivotedFallback) {
    // Eigenvalues 3 and -1: Cholesky rejects it, pivoted elimination solves it.
    const CVector row{1.0, 2.0};
    const CVector rhs{1.0, Complex(0.0, 1.0)};
    const auto w = solve_hermitian_toeplitz({row, 0.0}, rhs);
    const auto ref = oracle::dense_solve(oracle::hermitian_toeplitz(row, 0.0), rhs);
    EXPECT_NEAR(std::abs(w[0] - ref[0]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(w[1] - ref[1]), 0.0, 1e-12);
}

TEST(ToeplitzSolve, SingularMatrixEscalatesLoading) {
    // All-ones without loading is rank one; the retry uses 1e-6 * r0.
    const CVector ones{1.0, 1.0, 1.0};
    const auto w = solve_hermitian_toeplitz({ones, 0.0}, ones);
    for (const auto& x : w) EXPECT_NEAR(x.real(), 1.0 / (3.0 + 1e-6), 1e-9);
    EXPECT_LE(residual_norm(ones, 1e-6, w, ones), 1e-8 * (vec_norm(ones) + 1.0));
}

TEST(ToeplitzSolve, ZeroMatrixRaisesSingularity) {
    try {
        solve_hermitian_toeplitz({{0.0, 0.0}, 0.0}, CVector{1.0, 1.0});
        FAIL() << "expected singularity_error";
    } catch (const singularity_error& e) {
        EXPECT_TRUE(std::isinf(e.condition_estimate()) || e.condition_estimate() > 1e12);
    }
}

TEST(ToeplitzSolve, PreconditionErrors) {
    EXPECT_THROW(solve_hermitian_toeplitz({{}, 0.0}, CVector{}), domain_error);
    EXPECT_THROW(solve_hermitian_toeplitz({{1.0, 0.5}, 0.0}, CVector{1.0}), domain_error);
    EXPECT_THROW(solve_hermitian_toeplitz({{Complex(1.0, 0.1)}, 0.0}, CVector{1.0}), domain_error);
}

TEST(ToeplitzSolve, MmseOfValidAcfIsNonNegative) {
    // Sample ACFs (1/L normalization) of arbitrary sequences are positive
    // semidefinite, so r0 - Re(r^H w) >= 0.
    std::mt19937_64 gen(77);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + trial % 8;
        const std::size_t len = 64;
        CVector x(len);
        for (auto& v : x) v = Complex(g(gen), g(gen));
        CVector acf(2 * n);
        for (std::size_t k = 0; k < acf.size(); ++k) {
            for (std::size_t i = 0; i + k < len; ++i) acf[k] += x[i] * std::conj(x[i + k]);
            acf[k] /= static_cast<double>(len);
        }
        acf[0] = acf[0].real();
        const CVector row(acf.begin(), acf.begin() + static_cast<long>(n));
        const CVector rhs(acf.begin() + 1, acf.begin() + 1 + static_cast<long>(n));
        const auto w = solve_hermitian_toeplitz({row, 0.0}, rhs);
        Complex q{};
        for (std::size_t k = 0; k < n; ++k) q += std::conj(rhs[k]) * w[k];
        ASSERT_LE(q.real(), acf[0].real() + 1e-12);
    }
}

TEST(MeanPower, Examples) {
    EXPECT_EQ(mean_power(CVector{1.0}), 1.0);
    EXPECT_EQ(mean_power(CVector{Complex(1, 1), Complex(1, -1)}), 2.0);
    EXPECT_THROW(mean_power(CVector{}), domain_error);
}

TEST(MeanPower, SosSamplesHaveUnitPower) {
    // 10^5 samples spread over 20 realizations: the time-average power of a
    // single realization fluctuates with std ~ 1/sqrt(M).
    CVector all;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto trace = generate_trace(draw_sos_parameters(200, 100 + seed), 100.0, 1e-3, 5000);
        all.insert(all.end(), trace.samples.begin(), trace.samples.end());
    }
    ASSERT_EQ(all.size(), 100000u);
    EXPECT_NEAR(mean_power(all), 1.0, 0.05);
}
