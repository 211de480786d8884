// SPDX-License-Identifier: Apache-2.0
#pragma once

// Monte Carlo trials and parameter sweeps comparing the Wiener, RNN and LSTM
// predictors on simulated Rayleigh channels.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "chanpred/channel.hpp"
#include "chanpred/error.hpp"
#include "chanpred/neural.hpp"
#include "chanpred/rng.hpp"
#include "chanpred/wiener.hpp"

namespace chanpred {

enum class PredictorKind { wiener, rnn, lstm };

inline const char* to_string(PredictorKind p) {
    switch (p) {
    case PredictorKind::wiener: return "wiener";
    case PredictorKind::rnn: return "rnn";
    case PredictorKind::lstm: return "lstm";
    }
    return "?";
}

inline PredictorKind parse_predictor(const std::string& s) {
    if (s == "wiener") return PredictorKind::wiener;
    if (s == "rnn") return PredictorKind::rnn;
    if (s == "lstm") return PredictorKind::lstm;
    throw domain_error("unknown predictor '" + s + "'");
}

/// Source of the autocorrelation used to design the Wiener taps.
enum class AcfSource { sample, jakes };

struct TrialConfig {
    std::size_t total_samples = 1000;
    double train_fraction = 0.75;
    std::size_t window = 5;
    std::size_t horizon = 1;
    double snr_db = 10.0;
    double fd_max = 100.0;
    double ts = 1e-3;
    std::size_t num_sinusoids = 200;
    std::vector<PredictorKind> predictors{PredictorKind::wiener, PredictorKind::rnn, PredictorKind::lstm};
    Architecture arch{};
    TrainConfig train_cfg{};
    std::uint64_t seed = 1;
    AcfSource wiener_acf = AcfSource::sample;
    // Diagnostic: replace the SOS channel by i.i.d. CN(0, 1) samples.
    bool white_channel = false;

    std::size_t train_len() const {
        return static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(total_samples)));
    }
    std::size_t test_len() const { return total_samples - train_len(); }

    void validate() const {
        detail::require(train_fraction > 0.0 && train_fraction < 1.0, "TrialConfig: train_fraction must be in (0, 1)");
        detail::require(window >= 1 && horizon >= 1, "TrialConfig: window and horizon must be >= 1");
        detail::require(test_len() >= window + horizon, "TrialConfig: test segment shorter than N + l");
        detail::require(train_len() >= window + horizon, "TrialConfig: training segment shorter than N + l");
        detail::require(ts > 0.0 && fd_max >= 0.0, "TrialConfig: need ts > 0 and fd_max >= 0");
        detail::require(num_sinusoids >= 1, "TrialConfig: num_sinusoids must be >= 1");
        detail::require(!predictors.empty(), "TrialConfig: no predictors selected");
        detail::require(!std::isnan(snr_db), "TrialConfig: snr_db is NaN");
        arch.validate();
        train_cfg.validate();
    }
};

struct PredictorResult {
    PredictorKind kind = PredictorKind::wiener;
    std::string label; // CSV predictor column
    double mse = 0.0;
    std::size_t predictions = 0;
    std::size_t epochs = 0; // 0 for the Wiener predictor
    double theoretical_mmse = 0.0; // Wiener only
    double wall_seconds = 0.0;
};

struct TrialResult {
    std::vector<PredictorResult> predictors;
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;

    const PredictorResult& at(PredictorKind kind) const {
        for (const auto& p : predictors) {
            if (p.kind == kind) return p;
        }
        throw domain_error(std::string("TrialResult: predictor not run: ") + to_string(kind));
    }
};

// Stream tags for per-trial seed derivation.
namespace seed_stream {
inline constexpr std::uint64_t channel = 1;
inline constexpr std::uint64_t noise = 2;
inline constexpr std::uint64_t rnn_init = 3;
inline constexpr std::uint64_t rnn_train = 4;
inline constexpr std::uint64_t lstm_init = 5;
inline constexpr std::uint64_t lstm_train = 6;
} // namespace seed_stream

namespace detail {

inline ChannelTrace white_trace(std::size_t length, std::uint64_t seed) {
    Rng rng(seed);
    ChannelTrace t;
    t.samples.resize(length);
    const double s = std::sqrt(0.5);
    for (auto& x : t.samples) {
        const double re = rng.normal();
        const double im = rng.normal();
        x = Complex(s * re, s * im);
    }
    t.seed = seed;
    return t;
}

inline double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

} // namespace detail

/// Generates the channel realization and its LS estimates for one trial.
inline LsTrace trial_channel(const TrialConfig& cfg) {
    const std::uint64_t ch_seed = derive_seed(cfg.seed, seed_stream::channel);
    ChannelTrace trace;
    if (cfg.white_channel) {
        trace = detail::white_trace(cfg.total_samples, ch_seed);
        trace.symbol_period = cfg.ts;
    } else {
        trace = generate_trace(draw_sos_parameters(cfg.num_sinusoids, ch_seed), cfg.fd_max, cfg.ts, cfg.total_samples);
    }
    return corrupt_to_ls(trace, cfg.snr_db, derive_seed(cfg.seed, seed_stream::noise));
}

/// One Monte Carlo trial: channel realization, LS corruption, chronological
/// train/test split, predictor design, sliding evaluation on the test part.
inline TrialResult run_trial(const TrialConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const LsTrace ls = trial_channel(cfg);
    const LsSegment train_seg = ls.segment(0, cfg.train_len());
    const LsSegment test_seg = ls.segment(cfg.train_len(), cfg.test_len());

    TrialResult result;
    result.seed = cfg.seed;
    for (const PredictorKind kind : cfg.predictors) {
        const auto t0 = std::chrono::steady_clock::now();
        PredictorResult pr;
        pr.kind = kind;
        pr.label = to_string(kind);
        pr.predictions = detail::prediction_positions(test_seg.size(), cfg.window, cfg.horizon);
        if (kind == PredictorKind::wiener) {
            const std::size_t lags = cfg.window - 1 + cfg.horizon;
            const AcfEstimate acf = cfg.wiener_acf == AcfSource::sample
                                        ? sample_acf(train_seg, lags)
                                        : jakes_acf_estimate(lags, cfg.fd_max, cfg.ts, ls.noise_variance);
            const WienerPredictor pred = design(acf, cfg.window, cfg.horizon);
            pr.mse = empirical_mse(pred, test_seg);
            pr.theoretical_mmse = pred.theoretical_mmse;
        } else {
            const bool lstm = kind == PredictorKind::lstm;
            Architecture arch = cfg.arch;
            arch.cell_kind = lstm ? CellKind::lstm : CellKind::rnn;
            arch.window = cfg.window;
            TrainConfig tc = cfg.train_cfg;
            tc.seed = derive_seed(cfg.seed, lstm ? seed_stream::lstm_train : seed_stream::rnn_train);
            RecurrentModel model =
                init_model(arch, derive_seed(cfg.seed, lstm ? seed_stream::lstm_init : seed_stream::rnn_init));
            const TrainResult trained = train(std::move(model), train_seg, cfg.window, cfg.horizon, tc);
            pr.epochs = trained.epochs_run;
            pr.mse = sliding_mse(test_seg, cfg.window, cfg.horizon,
                                 [&](std::span<const Complex> w) { return predict_nn(trained.model, w); });
        }
        pr.wall_seconds = detail::seconds_since(t0);
        result.predictors.push_back(std::move(pr));
    }
    result.wall_seconds = detail::seconds_since(start);
    return result;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// 10 log10(mse); zero maps to the -300 dB floor.
inline double mse_to_db(double mse) {
    detail::require(mse >= 0.0, "mse_to_db: negative MSE");
    if (mse == 0.0) return -300.0;
    return 10.0 * std::log10(mse);
}

struct SweepCell {
    double axis_value = 0.0;
    std::string predictor;
    std::size_t trials = 0;
    double mse = 0.0;
    double mse_db = 0.0;
};

struct SweepResult {
    std::string axis;
    std::vector<double> values;
    std::vector<SweepCell> cells;
    std::size_t trials = 0;

    const SweepCell& cell(double axis_value, const std::string& predictor) const {
        for (const auto& c : cells) {
            if (c.axis_value == axis_value && c.predictor == predictor) return c;
        }
        throw domain_error("SweepResult: no cell for predictor '" + predictor + "'");
    }
};

/// Runs fn(i) for i in [0, count) on a pool of worker threads. Results are
/// written by index, so scheduling cannot change them.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn, unsigned threads = 0) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    }
    pool.clear();
    if (failure) std::rethrow_exception(failure);
}

/// trial seed = derive_seed(base seed, axis index, trial index).
inline std::uint64_t sweep_trial_seed(std::uint64_t base, std::size_t axis_index, std::size_t trial_index) {
    return derive_seed(base, axis_index, trial_index);
}

namespace detail {

inline void apply_axis(TrialConfig& cfg, const std::string& axis, double value) {
    const auto as_count = [&](const char* what) {
        detail::require(value >= 1.0 && value == std::floor(value), std::string("sweep: ") + what + " must be a positive integer");
        return static_cast<std::size_t>(value);
    };
    if (axis == "window") {
        cfg.window = as_count("window");
    } else if (axis == "horizon") {
        cfg.horizon = as_count("horizon");
    } else if (axis == "snr_db") {
        cfg.snr_db = value;
    } else if (axis == "fd_max") {
        cfg.fd_max = value;
    } else {
        throw domain_error("sweep: unknown axis '" + axis + "'");
    }
}

// Averages per-trial results (trial-major, one TrialResult per trial) into
// cells, sorted by (axis value, predictor label).
inline void append_cells(SweepResult& sweep, double axis_value, const std::vector<TrialResult>& trials) {
    std::vector<SweepCell> cells;
    for (const auto& pr : trials.front().predictors) {
        SweepCell c;
        c.axis_value = axis_value;
        c.predictor = pr.label;
        cells.push_back(c);
    }
    for (const auto& t : trials) {
        for (std::size_t p = 0; p < cells.size(); ++p) {
            cells[p].mse += t.predictors[p].mse;
            ++cells[p].trials;
        }
    }
    for (auto& c : cells) {
        c.mse /= static_cast<double>(c.trials);
        c.mse_db = mse_to_db(c.mse);
    }
    std::sort(cells.begin(), cells.end(), [](const SweepCell& a, const SweepCell& b) { return a.predictor < b.predictor; });
    sweep.cells.insert(sweep.cells.end(), cells.begin(), cells.end());
}

inline void sort_cells(SweepResult& sweep) {
    std::stable_sort(sweep.cells.begin(), sweep.cells.end(), [](const SweepCell& a, const SweepCell& b) {
        if (a.axis_value != b.axis_value) return a.axis_value < b.axis_value;
        return a.predictor < b.predictor;
    });
}

} // namespace detail

/// For each axis value, runs `trials` independent trials and averages the
/// linear MSE per predictor before converting to dB.
inline SweepResult run_sweep(const TrialConfig& base, const std::string& axis, const std::vector<double>& values,
                             std::size_t trials, unsigned threads = 0) {
    detail::require(!values.empty(), "run_sweep: empty axis values");
    detail::require(trials >= 1, "run_sweep: trials must be >= 1");

    std::vector<TrialConfig> configs;
    for (std::size_t a = 0; a < values.size(); ++a) {
        TrialConfig cfg = base;
        detail::apply_axis(cfg, axis, values[a]);
        cfg.validate();
        for (std::size_t t = 0; t < trials; ++t) {
            cfg.seed = sweep_trial_seed(base.seed, a, t);
            configs.push_back(cfg);
        }
    }
    std::vector<TrialResult> results(configs.size());
    parallel_for(configs.size(), [&](std::size_t i) { results[i] = run_trial(configs[i]); }, threads);

    SweepResult sweep;
    sweep.axis = axis;
    sweep.values = values;
    sweep.trials = trials;
    for (std::size_t a = 0; a < values.size(); ++a) {
        const std::vector<TrialResult> slice(results.begin() + static_cast<std::ptrdiff_t>(a * trials),
                                             results.begin() + static_cast<std::ptrdiff_t>((a + 1) * trials));
        detail::append_cells(sweep, values[a], slice);
    }
    detail::sort_cells(sweep);
    return sweep;
}

struct ArchitectureSpec {
    std::size_t hidden_layers = 1;
    std::size_t hidden_units = 16;

    std::string label() const { return "rnn_o" + std::to_string(hidden_layers) + "_h" + std::to_string(hidden_units); }
};

/// RNN architectures across Doppler values. The result's axis is `fd_max`;
/// each architecture appears as its own predictor label, e.g. rnn_o1_h16.
/// Every architecture in a trial sees the same channel realization.
inline SweepResult architecture_sweep(const TrialConfig& base, const std::vector<ArchitectureSpec>& grid,
                                      const std::vector<double>& doppler_values, std::size_t trials,
                                      unsigned threads = 0) {
    detail::require(!grid.empty(), "architecture_sweep: empty architecture grid");
    detail::require(!doppler_values.empty(), "architecture_sweep: empty Doppler values");
    detail::require(trials >= 1, "architecture_sweep: trials must be >= 1");

    struct Job {
        TrialConfig cfg;
        std::size_t doppler_index;
        std::size_t arch_index;
    };
    std::vector<Job> jobs;
    for (std::size_t d = 0; d < doppler_values.size(); ++d) {
        for (std::size_t t = 0; t < trials; ++t) {
            for (std::size_t g = 0; g < grid.size(); ++g) {
                TrialConfig cfg = base;
                cfg.fd_max = doppler_values[d];
                cfg.predictors = {PredictorKind::rnn};
                cfg.arch.cell_kind = CellKind::rnn;
                cfg.arch.hidden_layers = grid[g].hidden_layers;
                cfg.arch.hidden_units = grid[g].hidden_units;
                cfg.seed = sweep_trial_seed(base.seed, d, t);
                cfg.validate();
                jobs.push_back({cfg, d, g});
            }
        }
    }
    std::vector<TrialResult> results(jobs.size());
    parallel_for(jobs.size(), [&](std::size_t i) {
        results[i] = run_trial(jobs[i].cfg);
        results[i].predictors.front().label = grid[jobs[i].arch_index].label();
    }, threads);

    SweepResult sweep;
    sweep.axis = "fd_max";
    sweep.values = doppler_values;
    sweep.trials = trials;
    for (std::size_t d = 0; d < doppler_values.size(); ++d) {
        // Regroup so that each pseudo-trial lists all architectures.
        std::vector<TrialResult> merged(trials);
        for (std::size_t t = 0; t < trials; ++t) {
            for (std::size_t g = 0; g < grid.size(); ++g) {
                const auto& r = results[(d * trials + t) * grid.size() + g];
                merged[t].predictors.push_back(r.predictors.front());
            }
        }
        detail::append_cells(sweep, doppler_values[d], merged);
    }
    detail::sort_cells(sweep);
    return sweep;
}

// ---------------------------------------------------------------------------
// Output
// ---------------------------------------------------------------------------

inline constexpr const char* results_csv_header = "axis,axis_value,predictor,trials,mse,mse_db";

/// Rows sorted by (axis value, predictor), LF endings, 17 significant digits.
inline void write_results(const SweepResult& sweep, std::ostream& out) {
    SweepResult sorted = sweep;
    detail::sort_cells(sorted);
    out << std::setprecision(17);
    out << results_csv_header << '\n';
    for (const auto& c : sorted.cells) {
        out << sorted.axis << ',' << c.axis_value << ',' << c.predictor << ',' << c.trials << ',' << c.mse << ','
            << c.mse_db << '\n';
    }
}

inline void write_results(const SweepResult& sweep, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error(path.string(), "cannot open for writing");
    write_results(sweep, static_cast<std::ostream&>(out));
    out.flush();
    if (!out) throw io_error(path.string(), "write failed");
}

// ---------------------------------------------------------------------------
// ACF diagnostic
// ---------------------------------------------------------------------------

struct AcfCheck {
    std::vector<Complex> mean_sample_acf; // averaged over seeds, lags 0..max_lag
    std::vector<double> jakes;
    double max_abs_deviation = 0.0;
};

/// Averages the noiseless sample ACF of `seeds` SOS realizations and compares
/// it with J0(2 pi fD k Ts).
inline AcfCheck acf_check(std::size_t num_sinusoids, double fd_max, double ts, std::size_t length,
                          std::size_t max_lag, std::size_t seeds, std::uint64_t base_seed) {
    detail::require(seeds >= 1, "acf_check: need at least one seed");
    AcfCheck check;
    check.mean_sample_acf.assign(max_lag + 1, Complex{});
    for (std::size_t s = 0; s < seeds; ++s) {
        const auto params = draw_sos_parameters(num_sinusoids, derive_seed(base_seed, s));
        const auto trace = generate_trace(params, fd_max, ts, length);
        const auto acf = sample_acf(trace.samples, max_lag);
        for (std::size_t k = 0; k <= max_lag; ++k) check.mean_sample_acf[k] += acf.values[k];
    }
    for (std::size_t k = 0; k <= max_lag; ++k) {
        check.mean_sample_acf[k] /= static_cast<double>(seeds);
        check.jakes.push_back(jakes_acf(static_cast<long long>(k), fd_max, ts));
        check.max_abs_deviation = std::max(check.max_abs_deviation, std::abs(check.mean_sample_acf[k] - check.jakes[k]));
    }
    return check;
}

} // namespace chanpred
