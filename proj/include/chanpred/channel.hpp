// SPDX-License-Identifier: Apache-2.0
#pragma once

// Sum-of-sinusoids Rayleigh flat-fading generator, LS estimate corruption and
// the Jakes reference statistics.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "chanpred/error.hpp"
#include "chanpred/numerics.hpp"
#include "chanpred/rng.hpp"

namespace chanpred {

/// Per-path random draws of the SOS model.
struct SosParameters {
    std::vector<double> attenuation_i;      // A_m ~ N(0, 1)
    std::vector<double> attenuation_q;      // B_m ~ N(0, 1)
    std::vector<double> arrival_angle;      // alpha_m ~ U[-pi, pi)
    std::vector<double> phase;              // phi_m   ~ U[-pi, pi)
    std::vector<double> stationarity_phase; // psi_m   ~ U[-pi, pi)
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return attenuation_i.size(); }
};

struct ChannelTrace {
    CVector samples;
    double symbol_period = 1e-3;
    double max_doppler = 100.0;
    std::size_t num_sinusoids = 0;
    std::uint64_t seed = 0;
};

/// A contiguous window of LS estimates with the matching noiseless samples.
struct LsSegment {
    std::span<const Complex> estimates;
    std::span<const Complex> truth;

    std::size_t size() const noexcept { return estimates.size(); }
};

struct LsTrace {
    CVector estimates;
    double noise_variance = 0.0;
    double snr_db = std::numeric_limits<double>::infinity();
    ChannelTrace truth;

    std::size_t size() const noexcept { return estimates.size(); }

    LsSegment segment(std::size_t begin, std::size_t length) const {
        detail::require(begin + length <= estimates.size(), "LsTrace::segment: range out of bounds");
        return {std::span<const Complex>(estimates).subspan(begin, length),
                std::span<const Complex>(truth.samples).subspan(begin, length)};
    }

    LsSegment all() const { return segment(0, estimates.size()); }
};

inline SosParameters draw_sos_parameters(std::size_t m, std::uint64_t seed) {
    detail::require(m >= 1, "draw_sos_parameters: need at least one sinusoid");
    Rng rng(seed);
    SosParameters p;
    p.seed = seed;
    const auto gaussians = [&] {
        std::vector<double> v(m);
        for (auto& x : v) x = rng.normal();
        return v;
    };
    const auto angles = [&] {
        std::vector<double> v(m);
        for (auto& x : v) x = rng.uniform(-std::numbers::pi, std::numbers::pi);
        return v;
    };
    p.attenuation_i = gaussians();
    p.attenuation_q = gaussians();
    p.arrival_angle = angles();
    p.phase = angles();
    p.stationarity_phase = angles();
    return p;
}

/// h[n] = M^-1/2 sum_m [A_m cos(theta_m[n]) + j B_m sin(theta_m[n])],
/// theta_m[n] = (2 pi fD n Ts + psi_m) cos(alpha_m) + phi_m.
inline ChannelTrace generate_trace(const SosParameters& params, double fd_max, double ts, std::size_t length) {
    detail::require(length >= 1, "generate_trace: length must be >= 1");
    detail::require(ts > 0.0, "generate_trace: symbol period must be positive");
    detail::require(fd_max >= 0.0, "generate_trace: Doppler must be non-negative");
    const std::size_t m = params.size();
    detail::require(m >= 1 && params.attenuation_q.size() == m && params.arrival_angle.size() == m &&
                        params.phase.size() == m && params.stationarity_phase.size() == m,
                    "generate_trace: inconsistent SOS parameter arrays");

    std::vector<double> cos_alpha(m);
    for (std::size_t k = 0; k < m; ++k) cos_alpha[k] = std::cos(params.arrival_angle[k]);

    const double omega = 2.0 * std::numbers::pi * fd_max * ts;
    const double norm = 1.0 / std::sqrt(static_cast<double>(m));

    ChannelTrace trace;
    trace.samples.resize(length);
    trace.symbol_period = ts;
    trace.max_doppler = fd_max;
    trace.num_sinusoids = m;
    trace.seed = params.seed;
    for (std::size_t n = 0; n < length; ++n) {
        const double t = omega * static_cast<double>(n);
        double re = 0.0;
        double im = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double theta = (t + params.stationarity_phase[k]) * cos_alpha[k] + params.phase[k];
            re += params.attenuation_i[k] * std::cos(theta);
            im += params.attenuation_q[k] * std::sin(theta);
        }
        trace.samples[n] = Complex(norm * re, norm * im);
    }
    return trace;
}

/// Reference autocorrelation J0(2 pi fD |k| Ts).
inline double jakes_acf(long long lag, double fd_max, double ts) {
    detail::require(ts > 0.0, "jakes_acf: symbol period must be positive");
    return bessel_j0(2.0 * std::numbers::pi * fd_max * static_cast<double>(lag < 0 ? -lag : lag) * ts);
}

/// Classical U-shaped Doppler spectrum, defined on the open interval |f| < fD.
inline double jakes_spectrum(double f, double fd_max) {
    detail::require(fd_max > 0.0, "jakes_spectrum: fd_max must be positive");
    detail::require(std::abs(f) < fd_max, "jakes_spectrum: frequency outside the open support (-fD, fD)");
    const double ratio = f / fd_max;
    return 1.0 / (std::numbers::pi * fd_max * std::sqrt(1.0 - ratio * ratio));
}

/// Adds ZMCSCG noise at the requested per-sample SNR. Pilots are the unit
/// symbol, so the LS estimate is h[n] + w[n]. snr_db = +inf yields a
/// noiseless copy.
inline LsTrace corrupt_to_ls(const ChannelTrace& trace, double snr_db, std::uint64_t seed) {
    detail::require(!trace.samples.empty(), "corrupt_to_ls: empty trace");
    detail::require(!std::isnan(snr_db), "corrupt_to_ls: SNR is NaN");
    LsTrace ls;
    ls.truth = trace;
    ls.snr_db = snr_db;
    ls.estimates = trace.samples;
    if (std::isinf(snr_db) && snr_db > 0.0) return ls;

    ls.noise_variance = mean_power(trace.samples) / std::pow(10.0, snr_db / 10.0);
    const double sigma = std::sqrt(0.5 * ls.noise_variance);
    Rng rng(seed);
    for (auto& e : ls.estimates) {
        const double wr = rng.normal();
        const double wi = rng.normal();
        e += Complex(sigma * wr, sigma * wi);
    }
    return ls;
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

namespace detail {

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error(path.string(), "cannot open for writing");
    out << std::setprecision(17);
    return out;
}

inline void finish_write(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw io_error(path.string(), "write failed");
}

} // namespace detail

/// `n,re,im`, one row per symbol period.
inline void write_trace_csv(const ChannelTrace& trace, const std::filesystem::path& path) {
    auto out = detail::open_for_write(path);
    out << "n,re,im\n";
    for (std::size_t n = 0; n < trace.samples.size(); ++n) {
        out << n << ',' << trace.samples[n].real() << ',' << trace.samples[n].imag() << '\n';
    }
    detail::finish_write(out, path);
}

/// `n,re,im,ls_re,ls_im`.
inline void write_trace_csv(const LsTrace& ls, const std::filesystem::path& path) {
    auto out = detail::open_for_write(path);
    out << "n,re,im,ls_re,ls_im\n";
    for (std::size_t n = 0; n < ls.estimates.size(); ++n) {
        const auto& h = ls.truth.samples[n];
        const auto& e = ls.estimates[n];
        out << n << ',' << h.real() << ',' << h.imag() << ',' << e.real() << ',' << e.imag() << '\n';
    }
    detail::finish_write(out, path);
}

} // namespace chanpred
