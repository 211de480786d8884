// SPDX-License-Identifier: Apache-2.0
#pragma once

// Experiment configuration files.
//
//   # comment
//   [channel]
//   fd_max = 100
//   [predictor]
//   predictors = wiener, rnn, lstm
//
// Sections: [channel], [predictor], [train], [sweep]. Unknown sections or
// keys, duplicate keys and malformed values raise config_error.

#include <filesystem>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chanpred/error.hpp"
#include "chanpred/harness.hpp"
#include "chanpred/neural.hpp"

namespace chanpred {

struct ExperimentConfig {
    TrialConfig trial{};

    // [sweep]
    std::string axis = "window";
    std::vector<double> values{2, 3, 4, 5, 6, 7, 8};
    std::size_t trials = 100;
    std::vector<ArchitectureSpec> grid{{1, 8}, {1, 16}, {2, 8}, {2, 16}, {3, 8}, {3, 16}};
    std::vector<double> doppler_values{10, 41.666666666666664, 73.333333333333329, 105, 136.66666666666666,
                                       168.33333333333334, 200};
    std::size_t acf_length = 10000;
    std::size_t acf_max_lag = 20;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

class ConfigReader {
public:
    ConfigReader(std::string section, std::string key, std::string value, std::size_t line)
        : section_(std::move(section)), key_(std::move(key)), value_(std::move(value)), line_(line) {}

    [[noreturn]] void fail(const std::string& why) const {
        throw config_error("line " + std::to_string(line_) + ": [" + section_ + "] " + key_ + ": " + why);
    }

    double real() const {
        try {
            return parse_double(value_, key_);
        } catch (const domain_error&) {
            fail("expected a number, got '" + value_ + "'");
        }
    }

    template <typename Int = std::size_t>
    Int integer() const {
        try {
            return parse_integer<Int>(value_, key_);
        } catch (const domain_error&) {
            fail("expected a non-negative integer, got '" + value_ + "'");
        }
    }

    bool boolean() const {
        if (value_ == "true" || value_ == "1") return true;
        if (value_ == "false" || value_ == "0") return false;
        fail("expected true or false, got '" + value_ + "'");
    }

    std::vector<double> reals() const {
        std::vector<double> out;
        for (const auto& item : split_list(value_)) {
            try {
                out.push_back(parse_double(item, key_));
            } catch (const domain_error&) {
                fail("bad list element '" + item + "'");
            }
        }
        if (out.empty()) fail("empty list");
        return out;
    }

    template <typename Parse>
    auto parsed(Parse&& parse) const {
        try {
            return parse(value_);
        } catch (const domain_error& e) {
            fail(e.what());
        }
    }

    const std::string& text() const { return value_; }

private:
    std::string section_, key_, value_;
    std::size_t line_;
};

inline std::vector<PredictorKind> parse_predictor_list(const std::string& s) {
    std::vector<PredictorKind> out;
    for (const auto& item : split_list(s)) {
        const PredictorKind k = parse_predictor(item);
        if (std::find(out.begin(), out.end(), k) != out.end()) throw domain_error("duplicate predictor '" + item + "'");
        out.push_back(k);
    }
    if (out.empty()) throw domain_error("empty predictor list");
    return out;
}

/// "1x8, 1x16, 2x8" -> (hidden_layers, hidden_units) pairs.
inline std::vector<ArchitectureSpec> parse_grid(const std::string& s) {
    std::vector<ArchitectureSpec> out;
    for (const auto& item : split_list(s)) {
        const auto x = item.find('x');
        if (x == std::string::npos) throw domain_error("grid entry '" + item + "' is not <layers>x<units>");
        ArchitectureSpec a;
        a.hidden_layers = parse_integer<std::size_t>(trim(item.substr(0, x)), "grid");
        a.hidden_units = parse_integer<std::size_t>(trim(item.substr(x + 1)), "grid");
        out.push_back(a);
    }
    if (out.empty()) throw domain_error("empty architecture grid");
    return out;
}

inline void apply_key(ExperimentConfig& c, const std::string& section, const std::string& key,
                      const ConfigReader& v) {
    auto& t = c.trial;
    if (section == "channel") {
        if (key == "total_samples") t.total_samples = v.integer();
        else if (key == "train_fraction") t.train_fraction = v.real();
        else if (key == "snr_db") t.snr_db = v.real();
        else if (key == "fd_max") t.fd_max = v.real();
        else if (key == "ts") t.ts = v.real();
        else if (key == "num_sinusoids") t.num_sinusoids = v.integer();
        else if (key == "white_channel") t.white_channel = v.boolean();
        else v.fail("unknown key");
    } else if (section == "predictor") {
        if (key == "window") t.window = v.integer();
        else if (key == "horizon") t.horizon = v.integer();
        else if (key == "predictors") t.predictors = v.parsed(parse_predictor_list);
        else if (key == "hidden_layers") t.arch.hidden_layers = v.integer();
        else if (key == "hidden_units") t.arch.hidden_units = v.integer();
        else if (key == "input_mode") t.arch.input_mode = v.parsed(parse_input_mode);
        else if (key == "dropout_rate") t.arch.dropout_rate = v.real();
        else if (key == "wiener_acf") {
            if (v.text() == "sample") t.wiener_acf = AcfSource::sample;
            else if (v.text() == "jakes") t.wiener_acf = AcfSource::jakes;
            else v.fail("expected sample or jakes");
        } else v.fail("unknown key");
    } else if (section == "train") {
        if (key == "learning_rate") t.train_cfg.learning_rate = v.real();
        else if (key == "batch_size") t.train_cfg.batch_size = v.integer();
        else if (key == "max_epochs") t.train_cfg.max_epochs = v.integer();
        else if (key == "patience") t.train_cfg.patience = v.integer();
        else if (key == "min_delta") t.train_cfg.min_delta = v.real();
        else if (key == "validation_fraction") t.train_cfg.validation_fraction = v.real();
        else v.fail("unknown key");
    } else if (section == "sweep") {
        if (key == "axis") c.axis = v.text();
        else if (key == "values") c.values = v.reals();
        else if (key == "trials") c.trials = v.integer();
        else if (key == "seed") t.seed = v.integer<std::uint64_t>();
        else if (key == "grid") c.grid = v.parsed(parse_grid);
        else if (key == "doppler_values") c.doppler_values = v.reals();
        else if (key == "acf_length") c.acf_length = v.integer();
        else if (key == "acf_max_lag") c.acf_max_lag = v.integer();
        else v.fail("unknown key");
    }
}

} // namespace detail

inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig config = {}) {
    static const std::set<std::string> sections{"channel", "predictor", "train", "sweep"};
    std::string section;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') throw config_error(where + "unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            if (!sections.count(section)) throw config_error(where + "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw config_error(where + "expected key = value");
        if (section.empty()) throw config_error(where + "key outside of any section");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw config_error(where + "empty key");
        if (!seen.insert(section + "." + key).second) throw config_error(where + "duplicate key " + key);
        detail::apply_key(config, section, key, detail::ConfigReader(section, key, value, line_no));
    }
    return config;
}

inline ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig config = {}) {
    std::ifstream in(path);
    if (!in) throw io_error(path.string(), "cannot open config");
    return parse_config(in, std::move(config));
}

} // namespace chanpred
