// SPDX-License-Identifier: Apache-2.0
#pragma once

// Independent reference computations for the test suites. Nothing here calls
// into the library under test.

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

using LComplex = std::complex<long double>;

/// J0 by its Taylor series in extended precision: sum (-x^2/4)^k / (k!)^2.
inline long double j0_series(long double x) {
    const long double q = x * x / 4.0L;
    long double term = 1.0L;
    long double sum = 1.0L;
    for (int k = 1; k < 400; ++k) {
        term *= -q / (static_cast<long double>(k) * k);
        sum += term;
        if (std::fabs(term) < 1e-24L && k > x) break;
    }
    return sum;
}

/// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
inline double bisect(const std::function<long double(long double)>& f, long double lo, long double hi) {
    long double flo = f(lo);
    for (int i = 0; i < 200; ++i) {
        const long double mid = 0.5L * (lo + hi);
        const long double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return static_cast<double>(0.5L * (lo + hi));
}

/// Dense Gaussian elimination with complete pivoting in extended precision.
/// `a` is row-major n x n.
inline std::vector<std::complex<double>> dense_solve(std::vector<std::complex<double>> a_in,
                                                     std::vector<std::complex<double>> b_in) {
    const std::size_t n = b_in.size();
    std::vector<LComplex> a(a_in.begin(), a_in.end());
    std::vector<LComplex> b(b_in.begin(), b_in.end());
    std::vector<std::size_t> col_perm(n);
    for (std::size_t i = 0; i < n; ++i) col_perm[i] = i;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t pr = k, pc = k;
        long double best = -1;
        for (std::size_t i = k; i < n; ++i)
            for (std::size_t j = k; j < n; ++j)
                if (std::abs(a[i * n + j]) > best) {
                    best = std::abs(a[i * n + j]);
                    pr = i;
                    pc = j;
                }
        if (best == 0) throw std::runtime_error("oracle::dense_solve: singular");
        for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[pr * n + j]);
        std::swap(b[k], b[pr]);
        for (std::size_t i = 0; i < n; ++i) std::swap(a[i * n + k], a[i * n + pc]);
        std::swap(col_perm[k], col_perm[pc]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const LComplex f = a[i * n + k] / a[k * n + k];
            for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
            b[i] -= f * b[k];
        }
    }
    std::vector<LComplex> y(n);
    for (std::size_t i = n; i-- > 0;) {
        LComplex s = b[i];
        for (std::size_t j = i + 1; j < n; ++j) s -= a[i * n + j] * y[j];
        y[i] = s / a[i * n + i];
    }
    std::vector<std::complex<double>> x(n);
    for (std::size_t i = 0; i < n; ++i) x[col_perm[i]] = std::complex<double>(y[i]);
    return x;
}

/// Hermitian Toeplitz matrix from its first row, built element by element.
inline std::vector<std::complex<double>> hermitian_toeplitz(const std::vector<std::complex<double>>& first_row,
                                                            double loading) {
    const std::size_t n = first_row.size();
    std::vector<std::complex<double>> a(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            a[i * n + j] = (j >= i ? first_row[j - i] : std::conj(first_row[i - j])) +
                           (i == j ? std::complex<double>(loading, 0) : std::complex<double>{});
    return a;
}

} // namespace oracle
