// SPDX-License-Identifier: Apache-2.0
//
// chanpred: run channel-prediction trials and sweeps from the command line.
//
// Exit codes: 0 success, 2 configuration error, 3 numerical failure,
// 4 I/O failure.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chanpred/chanpred.hpp"

namespace {

constexpr int exit_config = 2;
constexpr int exit_numeric = 3;
constexpr int exit_io = 4;

struct CommonOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_path;
    std::optional<std::size_t> trials;
    std::string predictors;
    unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--config", o.config_path, "Experiment config file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Base seed (overrides [sweep] seed)");
    cmd->add_option("--out", o.out_path, "Output CSV path");
    cmd->add_option("--trials", o.trials, "Monte Carlo trials per point");
    cmd->add_option("--predictors", o.predictors, "Comma list of wiener,rnn,lstm");
    cmd->add_option("--threads", o.threads, "Worker threads (0 = hardware concurrency)");
}

chanpred::ExperimentConfig resolve(const CommonOptions& o, chanpred::ExperimentConfig defaults = {}) {
    auto cfg = o.config_path.empty() ? defaults : chanpred::load_config(o.config_path, defaults);
    if (o.seed) cfg.trial.seed = *o.seed;
    if (o.trials) cfg.trials = *o.trials;
    if (!o.predictors.empty()) {
        try {
            cfg.trial.predictors = chanpred::detail::parse_predictor_list(o.predictors);
        } catch (const chanpred::domain_error& e) {
            throw chanpred::config_error(std::string("--predictors: ") + e.what());
        }
    }
    return cfg;
}

void print_sweep(const chanpred::SweepResult& s) {
    for (const auto& c : s.cells) {
        std::printf("%s=%-10g %-12s trials=%zu mse=%.6e (%.3f dB)\n", s.axis.c_str(), c.axis_value,
                    c.predictor.c_str(), c.trials, c.mse, c.mse_db);
    }
}

int run_trial_cmd(const CommonOptions& o) {
    const auto cfg = resolve(o);
    const auto r = chanpred::run_trial(cfg.trial);
    chanpred::SweepResult s;
    s.axis = "trial";
    s.values = {0.0};
    s.trials = 1;
    for (const auto& p : r.predictors) {
        std::printf("%-8s mse=%.6e (%.3f dB) predictions=%zu epochs=%zu time=%.2fs\n", p.label.c_str(), p.mse,
                    chanpred::mse_to_db(p.mse), p.predictions, p.epochs, p.wall_seconds);
        s.cells.push_back({0.0, p.label, 1, p.mse, chanpred::mse_to_db(p.mse)});
    }
    if (!o.out_path.empty()) chanpred::write_results(s, o.out_path);
    return 0;
}

int run_sweep_cmd(const CommonOptions& o) {
    const auto cfg = resolve(o);
    const auto s = chanpred::run_sweep(cfg.trial, cfg.axis, cfg.values, cfg.trials, o.threads);
    print_sweep(s);
    if (!o.out_path.empty()) chanpred::write_results(s, o.out_path);
    return 0;
}

int run_arch_sweep_cmd(const CommonOptions& o) {
    chanpred::ExperimentConfig defaults;
    defaults.trial.total_samples = 500;
    defaults.trial.horizon = 2;
    const auto cfg = resolve(o, defaults);
    const auto s = chanpred::architecture_sweep(cfg.trial, cfg.grid, cfg.doppler_values, cfg.trials, o.threads);
    print_sweep(s);
    if (!o.out_path.empty()) chanpred::write_results(s, o.out_path);
    return 0;
}

int run_acf_check_cmd(const CommonOptions& o) {
    chanpred::ExperimentConfig defaults;
    defaults.trials = 20;
    const auto cfg = resolve(o, defaults);
    const auto& t = cfg.trial;
    const auto check = chanpred::acf_check(t.num_sinusoids, t.fd_max, t.ts, cfg.acf_length, cfg.acf_max_lag,
                                           cfg.trials, t.seed);
    for (std::size_t k = 0; k < check.jakes.size(); ++k) {
        std::printf("lag=%-3zu sample=%+.6f%+.6fj jakes=%+.6f\n", k, check.mean_sample_acf[k].real(),
                    check.mean_sample_acf[k].imag(), check.jakes[k]);
    }
    std::printf("max_abs_deviation=%.6f over %zu seeds\n", check.max_abs_deviation, cfg.trials);
    if (!o.out_path.empty()) {
        std::ofstream out(o.out_path, std::ios::binary | std::ios::trunc);
        if (!out) throw chanpred::io_error(o.out_path, "cannot open for writing");
        out << std::setprecision(17) << "lag,sample_re,sample_im,jakes,abs_dev\n";
        for (std::size_t k = 0; k < check.jakes.size(); ++k) {
            const auto& s = check.mean_sample_acf[k];
            out << k << ',' << s.real() << ',' << s.imag() << ',' << check.jakes[k] << ','
                << std::abs(s - check.jakes[k]) << '\n';
        }
        out.flush();
        if (!out) throw chanpred::io_error(o.out_path, "write failed");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Channel prediction experiments: Wiener vs. recurrent predictors on Rayleigh fading"};
    app.require_subcommand(1);

    CommonOptions trial_opts, sweep_opts, arch_opts, acf_opts;
    auto* trial = app.add_subcommand("trial", "Run a single Monte Carlo trial");
    auto* sweep = app.add_subcommand("sweep", "Sweep window, horizon, snr_db or fd_max");
    auto* arch = app.add_subcommand("arch-sweep", "Compare RNN depths/widths across Doppler values");
    auto* acf = app.add_subcommand("acf-check", "Compare the simulated ACF with the Jakes model");
    add_common(trial, trial_opts);
    add_common(sweep, sweep_opts);
    add_common(arch, arch_opts);
    add_common(acf, acf_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*trial) return run_trial_cmd(trial_opts);
        if (*sweep) return run_sweep_cmd(sweep_opts);
        if (*arch) return run_arch_sweep_cmd(arch_opts);
        if (*acf) return run_acf_check_cmd(acf_opts);
    } catch (const chanpred::config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const chanpred::domain_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const chanpred::singularity_error& e) {
        std::cerr << "numerical failure: " << e.what() << " (condition estimate " << e.condition_estimate() << ")\n";
        return exit_numeric;
    } catch (const chanpred::io_error& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return exit_io;
    }
    return 0;
}
