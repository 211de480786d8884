// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <limits>

#include "chanpred/channel.hpp"
#include "chanpred/wiener.hpp"
#include "oracles.hpp"

using namespace chanpred;

namespace {

AcfEstimate acf_of(CVector values) {
    AcfEstimate a;
    a.values = std::move(values);
    return a;
}

WienerPredictor with_taps(CVector taps, std::size_t horizon = 1) {
    WienerPredictor p;
    p.order = taps.size();
    p.horizon = horizon;
    p.taps = std::move(taps);
    return p;
}

} // namespace

TEST(SampleAcf, ConstantSequence) {
    const CVector ones(4, 1.0);
    const auto acf = sample_acf(ones, 1);
    EXPECT_EQ(acf.values[0], Complex(1.0));
    EXPECT_EQ(acf.values[1], Complex(0.75));
    EXPECT_EQ(acf.train_len, 4u);
}

TEST(SampleAcf, ImpulseHasNoOverlap) {
    const CVector impulse{1.0, 0.0, 0.0, 0.0};
    const auto acf = sample_acf(impulse, 3);
    EXPECT_EQ(acf.values[0], Complex(0.25));
    for (std::size_t k = 1; k <= 3; ++k) EXPECT_EQ(acf.values[k], Complex(0.0));
}

TEST(SampleAcf, ConjugateSymmetricExtensionAndErrors) {
    const CVector x{Complex(1, 2), Complex(0, 1), Complex(-1, 0.5)};
    const auto acf = sample_acf(x, 2);
    // phi[1] = (x0 conj(x1) + x1 conj(x2)) / 3
    const Complex expected = (x[0] * std::conj(x[1]) + x[1] * std::conj(x[2])) / 3.0;
    EXPECT_NEAR(std::abs(acf.values[1] - expected), 0.0, 1e-15);
    EXPECT_EQ(acf.at(-1), std::conj(acf.at(1)));
    EXPECT_EQ(acf.values[0].imag(), 0.0);
    EXPECT_THROW(sample_acf(x, 3), domain_error);
}

TEST(Design, FirstOrderIsScalarNormalEquation) {
    const auto acf = acf_of({1.2, Complex(0.8, 0.1), Complex(0.5, -0.2), 0.3});
    for (std::size_t ell = 1; ell <= 3; ++ell) {
        const auto p = design(acf, 1, ell);
        EXPECT_NEAR(std::abs(p.taps[0] - acf.values[ell] / 1.2), 0.0, 1e-15);
    }
}

TEST(Design, WhiteProcessIsUnpredictable) {
    CVector white(12, 0.0);
    white[0] = 1.0;
    for (std::size_t n = 1; n <= 6; ++n) {
        const auto p = design(acf_of(white), n, 1);
        for (const auto& t : p.taps) EXPECT_EQ(t, Complex(0.0));
        EXPECT_EQ(p.theoretical_mmse, 1.0);
    }
}

TEST(Design, ConstantChannelWithLoading) {
    const auto p = design(acf_of(CVector(4, 1.0)), 3, 1, 1e-6);
    for (const auto& t : p.taps) EXPECT_NEAR(t.real(), 1.0 / 3.0, 1e-6);
    EXPECT_NEAR(p.theoretical_mmse, 0.0, 1e-6);
    EXPECT_GE(p.theoretical_mmse, -1e-9);
    // Same system without explicit loading goes through the escalation path.
    const auto q = design(acf_of(CVector(4, 1.0)), 3, 1);
    for (const auto& t : q.taps) EXPECT_NEAR(t.real(), 1.0 / 3.0, 1e-6);
}

TEST(Design, MatchesDenseOracleOnSampleAcf) {
    const auto trace = generate_trace(draw_sos_parameters(200, 3), 100.0, 1e-3, 750);
    const auto ls = corrupt_to_ls(trace, 10.0, 4);
    const auto acf = sample_acf(ls.estimates, 8);
    const auto p = design(acf, 5, 3);
    const CVector row(acf.values.begin(), acf.values.begin() + 5);
    const CVector rhs(acf.values.begin() + 3, acf.values.begin() + 8);
    const auto ref = oracle::dense_solve(oracle::hermitian_toeplitz(row, 0.0), rhs);
    for (std::size_t k = 0; k < 5; ++k) EXPECT_NEAR(std::abs(p.taps[k] - ref[k]), 0.0, 1e-10);
}

TEST(Design, PreconditionErrors) {
    const auto acf = acf_of({1.0, 0.5, 0.25});
    EXPECT_THROW(design(acf, 3, 1), domain_error); // needs lag 3
    EXPECT_THROW(design(acf, 0, 1), domain_error);
    EXPECT_THROW(design(acf, 1, 0), domain_error);
    EXPECT_THROW(design(acf_of({0.0, 0.0, 0.0}), 2, 1), singularity_error);
}

TEST(Predict, ConjugatedTaps) {
    const CVector w1{Complex(1, 1)};
    EXPECT_EQ(predict(with_taps({0.9}), w1), Complex(0.9, 0.9));
    EXPECT_EQ(predict(with_taps({Complex(0, 1)}), CVector{1.0}), Complex(0, -1));
    EXPECT_EQ(predict(with_taps({0.5, 0.25}), CVector{2.0, 4.0}), Complex(2.0));
    EXPECT_THROW(predict(with_taps({0.5, 0.25}), CVector{2.0}), domain_error);
}

TEST(EmpiricalMse, ZeroPredictorMeasuresChannelPower) {
    const auto trace = generate_trace(draw_sos_parameters(200, 9), 100.0, 1e-3, 5000);
    const auto ls = corrupt_to_ls(trace, 10.0, 10);
    const auto mse = empirical_mse(with_taps(CVector(3, 0.0)), ls.all());
    // Average over positions 3..4999 of |h|^2.
    double expected = 0.0;
    for (std::size_t n = 3; n < 5000; ++n) expected += std::norm(trace.samples[n]);
    expected /= 4997.0;
    EXPECT_NEAR(mse, expected, 1e-12);
    EXPECT_NEAR(mse, mean_power(trace.samples), 0.05);
}

TEST(EmpiricalMse, PerfectPredictionGivesZero) {
    const auto trace = generate_trace(draw_sos_parameters(50, 1), 0.0, 1e-3, 100);
    const auto ls = corrupt_to_ls(trace, std::numeric_limits<double>::infinity(), 0);
    EXPECT_EQ(empirical_mse(with_taps({1.0}, 2), ls.all()), 0.0);
    EXPECT_THROW(empirical_mse(with_taps(CVector(50, 0.0), 51), ls.all()), domain_error);
}

TEST(EmpiricalMse, ExactAcfDesignMatchesTheoryAtTenDb) {
    // theoretical_mmse is the error against the noisy LS target; against the
    // noiseless truth the expectation is lower by the noise variance.
    const double fd = 100.0, ts = 1e-3;
    double empirical = 0.0, theory = 0.0;
    for (std::uint64_t t = 0; t < 100; ++t) {
        const auto trace = generate_trace(draw_sos_parameters(200, derive_seed(77, t, 1)), fd, ts, 1000);
        const auto ls = corrupt_to_ls(trace, 10.0, derive_seed(77, t, 2));
        const auto p = design(jakes_acf_estimate(5, fd, ts, ls.noise_variance), 5, 1);
        empirical += empirical_mse(p, ls.segment(750, 250));
        theory += p.theoretical_mmse - ls.noise_variance;
    }
    EXPECT_NEAR(empirical / theory, 1.0, 0.15);
}

TEST(WienerInvariants, SampleCorrelationMatrixIsPsd) {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const std::size_t n = 1 + seed % 8;
        const auto trace = generate_trace(draw_sos_parameters(200, seed), 20.0 + 10.0 * seed, 1e-3, 300);
        const auto ls = corrupt_to_ls(trace, seed % 2 ? 30.0 : std::numeric_limits<double>::infinity(), seed);
        const auto acf = sample_acf(ls.estimates, n - 1);
        Eigen::MatrixXcd r(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) r(i, j) = acf.at(static_cast<long long>(j) - static_cast<long long>(i));
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r);
        EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9 * acf.values[0].real()) << "seed " << seed;
    }
}

TEST(WienerInvariants, MmseNonIncreasingInOrder) {
    for (std::size_t ell : {1u, 3u, 5u}) {
        double previous = std::numeric_limits<double>::infinity();
        for (std::size_t n = 1; n <= 8; ++n) {
            const auto p = design(jakes_acf_estimate(n + ell, 100.0, 1e-3), n, ell);
            EXPECT_LE(p.theoretical_mmse, previous + 1e-12) << "N=" << n << " l=" << ell;
            EXPECT_GE(p.theoretical_mmse, -1e-9);
            previous = p.theoretical_mmse;
        }
    }
}

TEST(WienerInvariants, MmseNonDecreasingInHorizon) {
    double previous = -1.0;
    for (std::size_t ell = 1; ell <= 10; ++ell) {
        const auto p = design(jakes_acf_estimate(5 + ell, 100.0, 1e-3), 5, ell);
        EXPECT_GE(p.theoretical_mmse, previous - 1e-12) << "l=" << ell;
        previous = p.theoretical_mmse;
    }
}
