// SPDX-License-Identifier: Apache-2.0
#pragma once

// Linear MMSE (Wiener) channel prediction from the sample autocorrelation.
//
// Window convention, shared with the neural predictors: a window of order N
// ending at time n is stored newest-first, window[k] = h~[n - k].

#include <span>
#include <vector>

#include "chanpred/channel.hpp"
#include "chanpred/error.hpp"
#include "chanpred/numerics.hpp"

namespace chanpred {

struct AcfEstimate {
    CVector values;             // lags 0..K
    std::size_t train_len = 0;  // 0 for an analytic (model) ACF

    std::size_t max_lag() const noexcept { return values.empty() ? 0 : values.size() - 1; }

    /// phi[-k] = conj(phi[k]).
    Complex at(long long lag) const {
        const auto k = static_cast<std::size_t>(lag < 0 ? -lag : lag);
        detail::require(k < values.size(), "AcfEstimate::at: lag beyond estimate");
        return lag < 0 ? std::conj(values[k]) : values[k];
    }
};

struct WienerPredictor {
    CVector taps;
    std::size_t order = 0;
    std::size_t horizon = 0;
    double theoretical_mmse = 0.0;
};

/// Biased estimator phi[k] = (1/L) sum_{n=0}^{L-1-k} h[n] conj(h[n+k]).
inline AcfEstimate sample_acf(std::span<const Complex> train, std::size_t max_lag) {
    const std::size_t len = train.size();
    detail::require(max_lag < len, "sample_acf: max_lag must be below the training length");
    AcfEstimate acf;
    acf.train_len = len;
    acf.values.resize(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        Complex sum{};
        for (std::size_t n = 0; n + k < len; ++n) sum += train[n] * std::conj(train[n + k]);
        acf.values[k] = sum / static_cast<double>(len);
    }
    acf.values[0] = Complex(acf.values[0].real(), 0.0);
    return acf;
}

inline AcfEstimate sample_acf(const LsSegment& train, std::size_t max_lag) {
    return sample_acf(train.estimates, max_lag);
}

/// Jakes model ACF of the LS estimates: J0(2 pi fD k Ts) plus the noise
/// variance at lag 0.
inline AcfEstimate jakes_acf_estimate(std::size_t max_lag, double fd_max, double ts, double noise_variance = 0.0) {
    AcfEstimate acf;
    acf.values.resize(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k) {
        acf.values[k] = Complex(jakes_acf(static_cast<long long>(k), fd_max, ts), 0.0);
    }
    acf.values[0] += noise_variance;
    return acf;
}

/// Solves R w = r with R[i][j] = phi[j - i] and r = [phi[l] ... phi[N-1+l]].
inline WienerPredictor design(const AcfEstimate& acf, std::size_t order, std::size_t horizon, double loading = 0.0) {
    detail::require(order >= 1, "design: order must be >= 1");
    detail::require(horizon >= 1, "design: horizon must be >= 1");
    detail::require(acf.values.size() >= order + horizon, "design: ACF does not cover lags up to N-1+l");

    HermitianToeplitzSpec spec;
    spec.first_row.assign(acf.values.begin(), acf.values.begin() + static_cast<std::ptrdiff_t>(order));
    spec.loading = loading;
    const CVector rhs(acf.values.begin() + static_cast<std::ptrdiff_t>(horizon),
                      acf.values.begin() + static_cast<std::ptrdiff_t>(horizon + order));

    WienerPredictor pred;
    pred.order = order;
    pred.horizon = horizon;
    pred.taps = solve_hermitian_toeplitz(spec, rhs);
    Complex quad{};
    for (std::size_t k = 0; k < order; ++k) quad += std::conj(rhs[k]) * pred.taps[k];
    pred.theoretical_mmse = acf.values[0].real() - quad.real();
    return pred;
}

/// h^[n+l] = sum_k conj(w_k) h~[n-k+1], window newest-first.
inline Complex predict(const WienerPredictor& pred, std::span<const Complex> window) {
    detail::require(window.size() == pred.order, "predict: window length must equal the predictor order");
    Complex out{};
    for (std::size_t k = 0; k < pred.order; ++k) out += std::conj(pred.taps[k]) * window[k];
    return out;
}

namespace detail {

// Newest-first window of `order` samples ending at index `newest`.
inline void fill_window(std::span<const Complex> samples, std::size_t newest, std::span<Complex> window) {
    for (std::size_t k = 0; k < window.size(); ++k) window[k] = samples[newest - k];
}

inline std::size_t prediction_positions(std::size_t segment_len, std::size_t order, std::size_t horizon) {
    detail::require(order >= 1 && horizon >= 1, "prediction_positions: order and horizon must be >= 1");
    detail::require(segment_len >= order + horizon, "test segment shorter than N + l");
    return segment_len - order - horizon + 1;
}

} // namespace detail

/// Slides the N-window over the noisy test estimates and averages
/// |h[n+l] - h^[n+l]|^2 against the noiseless truth.
template <typename Predictor>
double sliding_mse(const LsSegment& test, std::size_t order, std::size_t horizon, Predictor&& predictor) {
    const std::size_t count = detail::prediction_positions(test.size(), order, horizon);
    CVector window(order);
    double sum = 0.0;
    for (std::size_t p = 0; p < count; ++p) {
        const std::size_t newest = p + order - 1;
        detail::fill_window(test.estimates, newest, window);
        sum += std::norm(test.truth[newest + horizon] - predictor(std::span<const Complex>(window)));
    }
    return sum / static_cast<double>(count);
}

inline double empirical_mse(const WienerPredictor& pred, const LsSegment& test) {
    return sliding_mse(test, pred.order, pred.horizon,
                       [&](std::span<const Complex> w) { return predict(pred, w); });
}

} // namespace chanpred
