// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chanpred/error.hpp"

namespace chanpred {

using Complex = std::complex<double>;
using CVector = std::vector<Complex>;

// ---------------------------------------------------------------------------
// Bessel J0
// ---------------------------------------------------------------------------

namespace detail {

// Below this argument the Taylor series is used; above it the Hankel
// asymptotic expansion, whose smallest term is ~exp(-2x) and therefore too
// coarse for 1e-9 absolute accuracy at smaller arguments.
inline constexpr double j0_series_limit = 12.0;

inline double j0_series(double x) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        term *= -q / (static_cast<double>(k) * static_cast<double>(k));
        sum += term;
        if (std::abs(term) < 1e-18 && static_cast<double>(k) > x) break;
    }
    return sum;
}

inline double j0_asymptotic(double x) {
    // a_k(0) = (-1)^k prod_{i<=k} (2i-1)^2 / (k! 8^k); terms t_k = a_k / x^k.
    double p = 1.0;
    double q = 0.0;
    double a = 1.0;
    double previous = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        a *= -(odd * odd) / (8.0 * k * x);
        const double magnitude = std::abs(a);
        if (magnitude > previous) break;
        previous = magnitude;
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0) {
            p += sign * a;
        } else {
            q += sign * a;
        }
        if (magnitude < 1e-17) break;
    }
    const double chi = x - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

} // namespace detail

/// Zeroth-order Bessel function of the first kind.
///
/// Absolute error below 1e-9 on |x| <= 50. Evaluated on |x|, so the result is
/// exactly even.
inline double bessel_j0(double x) {
    detail::require(std::isfinite(x), "bessel_j0: argument must be finite");
    const double ax = std::abs(x);
    return ax < detail::j0_series_limit ? detail::j0_series(ax) : detail::j0_asymptotic(ax);
}

// ---------------------------------------------------------------------------
// Hermitian Toeplitz solve
// ---------------------------------------------------------------------------

/// R[i][j] = first_row[j - i] for j >= i, conj(first_row[i - j]) below the
/// diagonal, plus `loading` on the diagonal.
struct HermitianToeplitzSpec {
    CVector first_row;
    double loading = 0.0;
};

namespace detail {

inline constexpr double pivot_tolerance = 1e-13;

struct DenseMatrix {
    std::size_t n = 0;
    CVector a;

    Complex& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
    const Complex& operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
};

inline DenseMatrix toeplitz_dense(std::span<const Complex> first_row, double loading) {
    const std::size_t n = first_row.size();
    DenseMatrix m{n, CVector(n * n)};
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            m(i, j) = j >= i ? first_row[j - i] : std::conj(first_row[i - j]);
        }
        m(i, i) = Complex(first_row[0].real() + loading, 0.0);
    }
    return m;
}

struct FactorOutcome {
    std::optional<CVector> solution;
    double condition_estimate = std::numeric_limits<double>::infinity();
};

// A = L L^H, then forward/back substitution. Fails on a non-positive pivot.
inline FactorOutcome cholesky_solve(DenseMatrix a, std::span<const Complex> rhs, double scale) {
    const std::size_t n = a.n;
    double min_pivot = std::numeric_limits<double>::infinity();
    double max_pivot = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double d = a(j, j).real();
        for (std::size_t k = 0; k < j; ++k) d -= std::norm(a(j, k));
        min_pivot = std::min(min_pivot, d);
        max_pivot = std::max(max_pivot, d);
        if (!(d > pivot_tolerance * scale)) {
            return {std::nullopt, d > 0.0 ? max_pivot / d : std::numeric_limits<double>::infinity()};
        }
        const double ljj = std::sqrt(d);
        a(j, j) = ljj;
        for (std::size_t i = j + 1; i < n; ++i) {
            Complex s = a(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= a(i, k) * std::conj(a(j, k));
            a(i, j) = s / ljj;
        }
    }
    CVector y(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < i; ++k) y[i] -= a(i, k) * y[k];
        y[i] /= a(i, i).real();
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) y[i] -= std::conj(a(k, i)) * y[k];
        y[i] /= a(i, i).real();
    }
    return {std::move(y), max_pivot / min_pivot};
}

// Gaussian elimination with partial pivoting, for Hermitian but indefinite
// matrices that Cholesky rejects.
inline FactorOutcome pivoted_solve(DenseMatrix a, std::span<const Complex> rhs, double scale) {
    const std::size_t n = a.n;
    CVector b(rhs.begin(), rhs.end());
    double min_pivot = std::numeric_limits<double>::infinity();
    double max_pivot = 0.0;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t best = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a(r, col)) > std::abs(a(best, col))) best = r;
        }
        const double pivot = std::abs(a(best, col));
        min_pivot = std::min(min_pivot, pivot);
        max_pivot = std::max(max_pivot, pivot);
        if (!(pivot > pivot_tolerance * scale)) {
            return {std::nullopt, pivot > 0.0 ? max_pivot / pivot : std::numeric_limits<double>::infinity()};
        }
        if (best != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(col, c), a(best, c));
            std::swap(b[col], b[best]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const Complex f = a(r, col) / a(col, col);
            if (f == Complex{}) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k) b[i] -= a(i, k) * b[k];
        b[i] /= a(i, i);
    }
    return {std::move(b), max_pivot / min_pivot};
}

inline FactorOutcome factor_and_solve(std::span<const Complex> first_row, double loading,
                                      std::span<const Complex> rhs) {
    const DenseMatrix a = toeplitz_dense(first_row, loading);
    double scale = 0.0;
    for (const auto& v : a.a) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return {};
    auto outcome = cholesky_solve(a, rhs, scale);
    if (outcome.solution) return outcome;
    return pivoted_solve(a, rhs, scale);
}

} // namespace detail

/// Solves (R + loading I) w = rhs for Hermitian Toeplitz R.
///
/// Dense Cholesky, falling back to pivoted elimination. If both fail the
/// solve is retried once with loading raised to max(loading, 1e-6 r0); a
/// second failure throws singularity_error.
inline CVector solve_hermitian_toeplitz(const HermitianToeplitzSpec& spec, std::span<const Complex> rhs) {
    const std::size_t n = spec.first_row.size();
    detail::require(n >= 1, "solve_hermitian_toeplitz: empty first row");
    detail::require(rhs.size() == n, "solve_hermitian_toeplitz: rhs length mismatch");
    detail::require(spec.loading >= 0.0, "solve_hermitian_toeplitz: negative loading");
    for (const auto& v : spec.first_row) {
        detail::require(std::isfinite(v.real()) && std::isfinite(v.imag()),
                        "solve_hermitian_toeplitz: non-finite matrix entry");
    }
    detail::require(std::abs(spec.first_row[0].imag()) < 1e-12,
                    "solve_hermitian_toeplitz: diagonal entry must be real");

    auto outcome = detail::factor_and_solve(spec.first_row, spec.loading, rhs);
    if (outcome.solution) return std::move(*outcome.solution);

    const double escalated = std::max(spec.loading, 1e-6 * spec.first_row[0].real());
    outcome = detail::factor_and_solve(spec.first_row, escalated, rhs);
    if (outcome.solution) return std::move(*outcome.solution);

    throw singularity_error("solve_hermitian_toeplitz: matrix singular after loading escalation to " +
                                std::to_string(escalated),
                            outcome.condition_estimate);
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

inline double mean_power(std::span<const Complex> samples) {
    detail::require(!samples.empty(), "mean_power: empty input");
    double sum = 0.0;
    for (const auto& s : samples) sum += std::norm(s);
    return sum / static_cast<double>(samples.size());
}

} // namespace chanpred
