// SPDX-License-Identifier: Apache-2.0
#pragma once

// Shallow recurrent predictors (Elman RNN and LSTM) with hand-written
// backpropagation through time, Adam, inverted dropout and early stopping.
//
// A block of N complex LS estimates is encoded chronologically and
// interleaved, [re0, im0, ..., re_{N-1}, im_{N-1}]. In sequence mode the
// network consumes N steps of (re, im); in flat mode one step of 2N features.
// The linear output layer maps the final hidden state of the top layer to the
// (re, im) of the sample l steps ahead.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "chanpred/channel.hpp"
#include "chanpred/error.hpp"
#include "chanpred/numerics.hpp"
#include "chanpred/rng.hpp"

namespace chanpred {

enum class CellKind { rnn, lstm };
enum class InputMode { sequence, flat };

inline const char* to_string(CellKind k) { return k == CellKind::rnn ? "rnn" : "lstm"; }
inline const char* to_string(InputMode m) { return m == InputMode::sequence ? "sequence" : "flat"; }

inline CellKind parse_cell_kind(const std::string& s) {
    if (s == "rnn") return CellKind::rnn;
    if (s == "lstm") return CellKind::lstm;
    throw domain_error("unknown cell kind '" + s + "'");
}

inline InputMode parse_input_mode(const std::string& s) {
    if (s == "sequence") return InputMode::sequence;
    if (s == "flat") return InputMode::flat;
    throw domain_error("unknown input mode '" + s + "'");
}

struct Architecture {
    CellKind cell_kind = CellKind::rnn;
    std::size_t hidden_layers = 1;
    std::size_t hidden_units = 16;
    InputMode input_mode = InputMode::sequence;
    std::size_t window = 5;
    double dropout_rate = 0.2;

    std::size_t gates() const noexcept { return cell_kind == CellKind::lstm ? 4 : 1; }
    std::size_t steps() const noexcept { return input_mode == InputMode::sequence ? window : 1; }
    std::size_t step_features() const noexcept { return input_mode == InputMode::sequence ? 2 : 2 * window; }
    std::size_t input_size() const noexcept { return 2 * window; }

    void validate() const {
        detail::require(hidden_layers >= 1, "Architecture: hidden_layers must be >= 1");
        detail::require(hidden_units >= 1, "Architecture: hidden_units must be >= 1");
        detail::require(window >= 1, "Architecture: window must be >= 1");
        detail::require(dropout_rate >= 0.0 && dropout_rate < 1.0, "Architecture: dropout_rate must be in [0, 1)");
    }

    bool operator==(const Architecture&) const = default;
};

/// Row-major real matrix. Bias vectors are stored as a single row.
struct Tensor {
    std::string name;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    Tensor() = default;
    Tensor(std::string n, std::size_t r, std::size_t c) : name(std::move(n)), rows(r), cols(c), values(r * c, 0.0) {}

    double* row(std::size_t r) noexcept { return values.data() + r * cols; }
    const double* row(std::size_t r) const noexcept { return values.data() + r * cols; }

    bool operator==(const Tensor&) const = default;
};

using Gradients = std::vector<Tensor>;

/// Parameter layout: for each layer l, [3l] input map (G*H x in), [3l+1]
/// recurrent map (G*H x H), [3l+2] bias (1 x G*H); then the output map
/// (2 x H) and output bias (1 x 2). LSTM gate blocks are ordered
/// input, forget, candidate, output.
struct RecurrentModel {
    Architecture arch;
    std::vector<Tensor> params;
    std::uint64_t rng_seed = 0;

    const Tensor& input_map(std::size_t layer) const { return params[3 * layer]; }
    const Tensor& recurrent_map(std::size_t layer) const { return params[3 * layer + 1]; }
    const Tensor& bias(std::size_t layer) const { return params[3 * layer + 2]; }
    const Tensor& output_map() const { return params[3 * arch.hidden_layers]; }
    const Tensor& output_bias() const { return params[3 * arch.hidden_layers + 1]; }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (const auto& t : params) n += t.values.size();
        return n;
    }

    bool operator==(const RecurrentModel&) const = default;
};

namespace detail {

inline std::vector<Tensor> make_parameter_shapes(const Architecture& arch) {
    const std::size_t h = arch.hidden_units;
    const std::size_t gh = arch.gates() * h;
    std::vector<Tensor> shapes;
    for (std::size_t l = 0; l < arch.hidden_layers; ++l) {
        const std::size_t in = l == 0 ? arch.step_features() : h;
        const std::string prefix = "l" + std::to_string(l) + ".";
        shapes.emplace_back(prefix + "w_in", gh, in);
        shapes.emplace_back(prefix + "w_rec", gh, h);
        shapes.emplace_back(prefix + "bias", 1, gh);
    }
    shapes.emplace_back("out.w", 2, h);
    shapes.emplace_back("out.bias", 1, 2);
    return shapes;
}

} // namespace detail

/// Expected parameter count of an architecture.
inline std::size_t parameter_count(const Architecture& arch) {
    const std::size_t h = arch.hidden_units;
    std::size_t n = 0;
    for (std::size_t l = 0; l < arch.hidden_layers; ++l) {
        const std::size_t in = l == 0 ? arch.step_features() : h;
        n += arch.gates() * (h * (in + h) + h);
    }
    return n + 2 * h + 2;
}

inline Gradients zero_gradients(const RecurrentModel& model) {
    Gradients g = model.params;
    for (auto& t : g) std::fill(t.values.begin(), t.values.end(), 0.0);
    return g;
}

/// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every map; biases use the
/// combined fan-in of their pre-activation. LSTM forget-gate bias is 1.
inline RecurrentModel init_model(const Architecture& arch, std::uint64_t seed) {
    arch.validate();
    RecurrentModel model;
    model.arch = arch;
    model.rng_seed = seed;
    model.params = detail::make_parameter_shapes(arch);

    Rng rng(seed);
    const std::size_t h = arch.hidden_units;
    const auto fill = [&rng](Tensor& t, double fan_in) {
        const double bound = 1.0 / std::sqrt(fan_in);
        for (auto& v : t.values) v = rng.uniform(-bound, bound);
    };
    for (std::size_t l = 0; l < arch.hidden_layers; ++l) {
        auto& w_in = model.params[3 * l];
        auto& w_rec = model.params[3 * l + 1];
        auto& b = model.params[3 * l + 2];
        fill(w_in, static_cast<double>(w_in.cols));
        fill(w_rec, static_cast<double>(h));
        fill(b, static_cast<double>(w_in.cols + h));
        if (arch.cell_kind == CellKind::lstm) {
            std::fill(b.values.begin() + static_cast<std::ptrdiff_t>(h),
                      b.values.begin() + static_cast<std::ptrdiff_t>(2 * h), 1.0);
        }
    }
    fill(model.params[3 * arch.hidden_layers], static_cast<double>(h));
    fill(model.params[3 * arch.hidden_layers + 1], static_cast<double>(h));
    return model;
}

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

using Target = std::array<double, 2>;

struct Dataset {
    std::size_t input_size = 0;
    std::vector<double> inputs; // size() * input_size, row-major
    std::vector<Target> targets;

    std::size_t size() const noexcept { return targets.size(); }

    std::span<const double> input(std::size_t i) const {
        return std::span<const double>(inputs).subspan(i * input_size, input_size);
    }
};

/// Overlapping blocks: input i covers estimates [i, i+n-1], its target is the
/// estimate at i+n-1+ell.
inline Dataset make_blocks(std::span<const Complex> estimates, std::size_t n, std::size_t ell) {
    detail::require(n >= 1 && ell >= 1, "make_blocks: n and ell must be >= 1");
    detail::require(estimates.size() >= n + ell, "make_blocks: segment too short for one block");
    const std::size_t count = estimates.size() - n - ell + 1;
    Dataset data;
    data.input_size = 2 * n;
    data.inputs.resize(count * 2 * n);
    data.targets.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        double* row = data.inputs.data() + i * 2 * n;
        for (std::size_t k = 0; k < n; ++k) {
            row[2 * k] = estimates[i + k].real();
            row[2 * k + 1] = estimates[i + k].imag();
        }
        const Complex& t = estimates[i + n - 1 + ell];
        data.targets[i] = {t.real(), t.imag()};
    }
    return data;
}

inline Dataset make_blocks(const LsSegment& segment, std::size_t n, std::size_t ell) {
    return make_blocks(segment.estimates, n, ell);
}

/// Newest-first complex window to the chronological interleaved encoding.
inline std::vector<double> encode_window(std::span<const Complex> window_newest_first) {
    const std::size_t n = window_newest_first.size();
    std::vector<double> out(2 * n);
    for (std::size_t k = 0; k < n; ++k) {
        const Complex& s = window_newest_first[n - 1 - k];
        out[2 * k] = s.real();
        out[2 * k + 1] = s.imag();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct Workspace {
    // Per layer: hidden states (T+1) x H, cell states (T+1) x H, activated
    // pre-activations T x (G*H).
    std::vector<std::vector<double>> h, c, act;
    std::vector<double> mask, dropped;
    Target out{};
    std::vector<double> dz, dh, dh_rec, dc, dh_above, dh_below;

    explicit Workspace(const Architecture& a) {
        const std::size_t t = a.steps();
        const std::size_t hu = a.hidden_units;
        const std::size_t gh = a.gates() * hu;
        h.assign(a.hidden_layers, std::vector<double>((t + 1) * hu));
        c.assign(a.hidden_layers, std::vector<double>((t + 1) * hu));
        act.assign(a.hidden_layers, std::vector<double>(t * gh));
        mask.assign(hu, 1.0);
        dropped.assign(hu, 0.0);
        dz.assign(gh, 0.0);
        dh.assign(hu, 0.0);
        dh_rec.assign(hu, 0.0);
        dc.assign(hu, 0.0);
        dh_above.assign(t * hu, 0.0);
        dh_below.assign(t * hu, 0.0);
    }
};

inline void draw_dropout_mask(double rate, Rng& rng, std::vector<double>& mask) {
    const double keep_scale = 1.0 / (1.0 - rate);
    for (auto& m : mask) m = rng.uniform() >= rate ? keep_scale : 0.0;
}

inline void forward_pass(const RecurrentModel& model, std::span<const double> input, bool use_mask, Workspace& ws) {
    const auto& a = model.arch;
    const std::size_t steps = a.steps();
    const std::size_t hu = a.hidden_units;
    const std::size_t gh = a.gates() * hu;
    const bool lstm = a.cell_kind == CellKind::lstm;

    for (std::size_t l = 0; l < a.hidden_layers; ++l) {
        const Tensor& w_in = model.params[3 * l];
        const Tensor& w_rec = model.params[3 * l + 1];
        const Tensor& bias = model.params[3 * l + 2];
        const std::size_t in = w_in.cols;
        auto& h = ws.h[l];
        auto& c = ws.c[l];
        auto& act = ws.act[l];
        std::fill(h.begin(), h.begin() + static_cast<std::ptrdiff_t>(hu), 0.0);
        std::fill(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(hu), 0.0);

        for (std::size_t t = 0; t < steps; ++t) {
            const double* x = l == 0 ? input.data() + t * in : ws.h[l - 1].data() + (t + 1) * hu;
            const double* hp = h.data() + t * hu;
            double* z = act.data() + t * gh;
            for (std::size_t r = 0; r < gh; ++r) {
                double s = bias.values[r];
                const double* wi = w_in.row(r);
                for (std::size_t k = 0; k < in; ++k) s += wi[k] * x[k];
                const double* wr = w_rec.row(r);
                for (std::size_t k = 0; k < hu; ++k) s += wr[k] * hp[k];
                z[r] = s;
            }
            double* hn = h.data() + (t + 1) * hu;
            if (!lstm) {
                for (std::size_t j = 0; j < hu; ++j) {
                    z[j] = std::tanh(z[j]);
                    hn[j] = z[j];
                }
            } else {
                const double* cp = c.data() + t * hu;
                double* cn = c.data() + (t + 1) * hu;
                for (std::size_t j = 0; j < hu; ++j) {
                    const double ig = sigmoid(z[j]);
                    const double fg = sigmoid(z[hu + j]);
                    const double gg = std::tanh(z[2 * hu + j]);
                    const double og = sigmoid(z[3 * hu + j]);
                    z[j] = ig;
                    z[hu + j] = fg;
                    z[2 * hu + j] = gg;
                    z[3 * hu + j] = og;
                    cn[j] = fg * cp[j] + ig * gg;
                    hn[j] = og * std::tanh(cn[j]);
                }
            }
        }
    }

    const double* top = ws.h[a.hidden_layers - 1].data() + steps * hu;
    for (std::size_t j = 0; j < hu; ++j) ws.dropped[j] = use_mask ? top[j] * ws.mask[j] : top[j];
    const Tensor& w_out = model.params[3 * a.hidden_layers];
    const Tensor& b_out = model.params[3 * a.hidden_layers + 1];
    for (std::size_t o = 0; o < 2; ++o) {
        double s = b_out.values[o];
        const double* w = w_out.row(o);
        for (std::size_t j = 0; j < hu; ++j) s += w[j] * ws.dropped[j];
        ws.out[o] = s;
    }
}

// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
inline void backward_pass(const RecurrentModel& model, std::span<const double> input, bool use_mask, const Target& dy,
                          Workspace& ws, Gradients& grads) {
    const auto& a = model.arch;
    const std::size_t steps = a.steps();
    const std::size_t hu = a.hidden_units;
    const std::size_t gh = a.gates() * hu;
    const std::size_t layers = a.hidden_layers;
    const bool lstm = a.cell_kind == CellKind::lstm;

    const Tensor& w_out = model.params[3 * layers];
    Tensor& gw_out = grads[3 * layers];
    Tensor& gb_out = grads[3 * layers + 1];
    std::fill(ws.dh_above.begin(), ws.dh_above.end(), 0.0);
    double* dtop = ws.dh_above.data() + (steps - 1) * hu;
    for (std::size_t o = 0; o < 2; ++o) {
        gb_out.values[o] += dy[o];
        double* g = gw_out.row(o);
        const double* w = w_out.row(o);
        for (std::size_t j = 0; j < hu; ++j) {
            g[j] += dy[o] * ws.dropped[j];
            dtop[j] += w[j] * dy[o];
        }
    }
    if (use_mask) {
        for (std::size_t j = 0; j < hu; ++j) dtop[j] *= ws.mask[j];
    }

    for (std::size_t l = layers; l-- > 0;) {
        const Tensor& w_in = model.params[3 * l];
        const Tensor& w_rec = model.params[3 * l + 1];
        Tensor& gw_in = grads[3 * l];
        Tensor& gw_rec = grads[3 * l + 1];
        Tensor& gb = grads[3 * l + 2];
        const std::size_t in = w_in.cols;
        const auto& h = ws.h[l];
        const auto& c = ws.c[l];
        const auto& act = ws.act[l];
        std::fill(ws.dh_rec.begin(), ws.dh_rec.end(), 0.0);
        std::fill(ws.dc.begin(), ws.dc.end(), 0.0);
        if (l > 0) std::fill(ws.dh_below.begin(), ws.dh_below.end(), 0.0);

        for (std::size_t t = steps; t-- > 0;) {
            const double* z = act.data() + t * gh;
            for (std::size_t j = 0; j < hu; ++j) ws.dh[j] = ws.dh_above[t * hu + j] + ws.dh_rec[j];
            if (!lstm) {
                for (std::size_t j = 0; j < hu; ++j) ws.dz[j] = ws.dh[j] * (1.0 - z[j] * z[j]);
            } else {
                const double* cp = c.data() + t * hu;
                const double* cn = c.data() + (t + 1) * hu;
                for (std::size_t j = 0; j < hu; ++j) {
                    const double ig = z[j];
                    const double fg = z[hu + j];
                    const double gg = z[2 * hu + j];
                    const double og = z[3 * hu + j];
                    const double tc = std::tanh(cn[j]);
                    const double d_o = ws.dh[j] * tc;
                    const double dcj = ws.dc[j] + ws.dh[j] * og * (1.0 - tc * tc);
                    ws.dc[j] = dcj * fg;
                    ws.dz[j] = dcj * gg * ig * (1.0 - ig);
                    ws.dz[hu + j] = dcj * cp[j] * fg * (1.0 - fg);
                    ws.dz[2 * hu + j] = dcj * ig * (1.0 - gg * gg);
                    ws.dz[3 * hu + j] = d_o * og * (1.0 - og);
                }
            }

            const double* x = l == 0 ? input.data() + t * in : ws.h[l - 1].data() + (t + 1) * hu;
            const double* hp = h.data() + t * hu;
            std::fill(ws.dh_rec.begin(), ws.dh_rec.end(), 0.0);
            double* dx = l > 0 ? ws.dh_below.data() + t * hu : nullptr;
            for (std::size_t r = 0; r < gh; ++r) {
                const double d = ws.dz[r];
                if (d == 0.0) continue;
                gb.values[r] += d;
                double* gi = gw_in.row(r);
                const double* wi = w_in.row(r);
                for (std::size_t k = 0; k < in; ++k) gi[k] += d * x[k];
                if (dx) {
                    for (std::size_t k = 0; k < in; ++k) dx[k] += d * wi[k];
                }
                double* gr = gw_rec.row(r);
                const double* wr = w_rec.row(r);
                for (std::size_t k = 0; k < hu; ++k) {
                    gr[k] += d * hp[k];
                    ws.dh_rec[k] += d * wr[k];
                }
            }
        }
        if (l > 0) std::swap(ws.dh_above, ws.dh_below);
    }
}

} // namespace detail

/// Single forward evaluation. In train_mode, inverted dropout with the model's
/// rate is applied to the final hidden state using a mask drawn from
/// dropout_seed.
inline Target forward(const RecurrentModel& model, std::span<const double> input, bool train_mode,
                      std::uint64_t dropout_seed = 0) {
    detail::require(input.size() == model.arch.input_size(), "forward: input length must be 2N");
    detail::Workspace ws(model.arch);
    const bool use_mask = train_mode && model.arch.dropout_rate > 0.0;
    if (use_mask) {
        Rng rng(dropout_seed);
        detail::draw_dropout_mask(model.arch.dropout_rate, rng, ws.mask);
    }
    detail::forward_pass(model, input, use_mask, ws);
    return ws.out;
}

/// Squared complex error |dre|^2 + |dim|^2.
inline double loss(const Target& prediction, const Target& target) {
    const double dr = prediction[0] - target[0];
    const double di = prediction[1] - target[1];
    return dr * dr + di * di;
}

struct GradientResult {
    Gradients grads;
    double loss = 0.0; // mean over the batch
};

namespace detail {

// Mean-loss gradient over data[indices], accumulated into `out` (which must be
// zeroed by the caller). Dropout masks are drawn per example, in batch order,
// from one stream seeded with dropout_seed.
inline double accumulate_gradients(const RecurrentModel& model, const Dataset& data,
                                   std::span<const std::size_t> indices, std::uint64_t dropout_seed, Workspace& ws,
                                   Gradients& out) {
    const bool use_mask = model.arch.dropout_rate > 0.0;
    Rng rng(dropout_seed);
    const double scale = 1.0 / static_cast<double>(indices.size());
    double total = 0.0;
    for (const std::size_t i : indices) {
        const auto x = data.input(i);
        if (use_mask) draw_dropout_mask(model.arch.dropout_rate, rng, ws.mask);
        forward_pass(model, x, use_mask, ws);
        const Target& t = data.targets[i];
        total += loss(ws.out, t);
        const Target dy{2.0 * (ws.out[0] - t[0]) * scale, 2.0 * (ws.out[1] - t[1]) * scale};
        backward_pass(model, x, use_mask, dy, ws, out);
    }
    return total * scale;
}

} // namespace detail

/// Exact gradients of the mean batch loss by backpropagation through time.
inline GradientResult gradients(const RecurrentModel& model, const Dataset& data, std::span<const std::size_t> indices,
                                std::uint64_t dropout_seed) {
    detail::require(!indices.empty(), "gradients: empty batch");
    detail::require(data.input_size == model.arch.input_size(), "gradients: dataset input size mismatch");
    detail::Workspace ws(model.arch);
    GradientResult result{zero_gradients(model), 0.0};
    result.loss = detail::accumulate_gradients(model, data, indices, dropout_seed, ws, result.grads);
    return result;
}

inline GradientResult gradients(const RecurrentModel& model, const Dataset& data, std::uint64_t dropout_seed) {
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return gradients(model, data, all, dropout_seed);
}

/// Mean loss with dropout disabled.
inline double evaluate_loss(const RecurrentModel& model, const Dataset& data, std::span<const std::size_t> indices) {
    detail::require(!indices.empty(), "evaluate_loss: empty set");
    detail::Workspace ws(model.arch);
    double total = 0.0;
    for (const std::size_t i : indices) {
        detail::forward_pass(model, data.input(i), false, ws);
        total += loss(ws.out, data.targets[i]);
    }
    return total / static_cast<double>(indices.size());
}

// ---------------------------------------------------------------------------
// Adam
// ---------------------------------------------------------------------------

struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_model(const RecurrentModel& model) {
        AdamState s;
        for (const auto& t : model.params) {
            s.m.emplace_back(t.values.size(), 0.0);
            s.v.emplace_back(t.values.size(), 0.0);
        }
        return s;
    }
};

inline void adam_step(AdamState& state, RecurrentModel& model, const Gradients& grads, double lr) {
    detail::require(state.m.size() == model.params.size() && grads.size() == model.params.size(),
                    "adam_step: state/gradient layout does not match the model");
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(state.beta1, t);
    const double c2 = 1.0 - std::pow(state.beta2, t);
    for (std::size_t p = 0; p < model.params.size(); ++p) {
        auto& w = model.params[p].values;
        const auto& g = grads[p].values;
        auto& m = state.m[p];
        auto& v = state.v[p];
        detail::require(g.size() == w.size() && m.size() == w.size(), "adam_step: tensor size mismatch");
        for (std::size_t i = 0; i < w.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            w[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
        }
    }
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainConfig {
    double learning_rate = 0.01;
    std::size_t batch_size = 16;
    std::size_t max_epochs = 200;
    std::size_t patience = 10;
    double min_delta = 1e-5;
    double validation_fraction = 0.1;
    std::uint64_t seed = 0;

    void validate() const {
        detail::require(learning_rate > 0.0, "TrainConfig: learning_rate must be positive");
        detail::require(batch_size >= 1, "TrainConfig: batch_size must be >= 1");
        detail::require(validation_fraction >= 0.0 && validation_fraction < 1.0,
                        "TrainConfig: validation_fraction must be in [0, 1)");
        detail::require(min_delta >= 0.0, "TrainConfig: min_delta must be >= 0");
    }
};

struct TrainResult {
    RecurrentModel model;              // parameters of the best validation epoch
    std::vector<double> train_loss;    // per epoch, dropout active
    std::vector<double> val_loss;      // per epoch, dropout off
    double initial_val_loss = 0.0;
    std::size_t best_epoch = 0;        // 0 = the initial parameters were never beaten
    std::size_t epochs_run = 0;
};

/// Trains on blocks of a pre-built dataset. The trailing validation_fraction
/// of blocks is held out; training stops once the validation loss has failed
/// to improve on the best value by min_delta for patience + 1 consecutive
/// epochs, or at max_epochs.
inline TrainResult train(RecurrentModel model, const Dataset& data, const TrainConfig& config) {
    config.validate();
    detail::require(data.size() >= 1, "train: empty dataset");
    detail::require(data.input_size == model.arch.input_size(), "train: dataset input size mismatch");

    std::size_t n_val = static_cast<std::size_t>(config.validation_fraction * static_cast<double>(data.size()));
    if (config.validation_fraction > 0.0 && n_val == 0 && data.size() >= 2) n_val = 1;
    const std::size_t n_train = data.size() - n_val;

    std::vector<std::size_t> train_idx(n_train);
    for (std::size_t i = 0; i < n_train; ++i) train_idx[i] = i;
    std::vector<std::size_t> val_idx(n_val);
    for (std::size_t i = 0; i < n_val; ++i) val_idx[i] = n_train + i;
    const std::span<const std::size_t> monitor = n_val > 0 ? std::span<const std::size_t>(val_idx)
                                                           : std::span<const std::size_t>(train_idx);

    TrainResult result;
    result.initial_val_loss = evaluate_loss(model, data, monitor);
    double best = result.initial_val_loss;
    RecurrentModel best_model = model;

    Rng rng(config.seed);
    AdamState adam = AdamState::for_model(model);
    detail::Workspace ws(model.arch);
    Gradients grads = zero_gradients(model);
    std::size_t stale = 0;

    for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
        rng.shuffle(train_idx);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n_train; start += config.batch_size) {
            const std::size_t len = std::min(config.batch_size, n_train - start);
            const auto batch = std::span<const std::size_t>(train_idx).subspan(start, len);
            for (auto& g : grads) std::fill(g.values.begin(), g.values.end(), 0.0);
            const double batch_loss = detail::accumulate_gradients(model, data, batch, rng.next(), ws, grads);
            epoch_loss += batch_loss * static_cast<double>(len);
            adam_step(adam, model, grads, config.learning_rate);
        }
        result.train_loss.push_back(epoch_loss / static_cast<double>(n_train));
        const double val = evaluate_loss(model, data, monitor);
        result.val_loss.push_back(val);
        result.epochs_run = epoch;

        if (val < best - config.min_delta) {
            best = val;
            best_model = model;
            result.best_epoch = epoch;
            stale = 0;
        } else if (++stale > config.patience) {
            break;
        }
    }
    result.model = std::move(best_model);
    return result;
}

inline TrainResult train(RecurrentModel model, const LsSegment& ls_train, std::size_t n, std::size_t ell,
                         const TrainConfig& config) {
    detail::require(model.arch.window == n, "train: model window differs from n");
    return train(std::move(model), make_blocks(ls_train, n, ell), config);
}

/// Prediction from a newest-first window (the Wiener convention). Dropout is
/// never active here.
inline Complex predict_nn(const RecurrentModel& model, std::span<const Complex> window) {
    detail::require(window.size() == model.arch.window, "predict_nn: window length must equal N");
    const auto x = encode_window(window);
    const Target y = forward(model, x, false);
    return {y[0], y[1]};
}

// ---------------------------------------------------------------------------
// Persistence
// ---------------------------------------------------------------------------

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& token, const std::string& context) {
    double v = 0.0;
    const char* first = token.data();
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) throw domain_error(context + ": bad number '" + token + "'");
    return v;
}

template <typename Int>
inline Int parse_integer(const std::string& token, const std::string& context) {
    Int v{};
    const char* last = token.data() + token.size();
    const auto [ptr, ec] = std::from_chars(token.data(), last, v);
    if (ec != std::errc{} || ptr != last) throw domain_error(context + ": bad integer '" + token + "'");
    return v;
}

} // namespace detail

/// Key-value text:
///   cell_kind = lstm
///   ...
///   l0.w_in[3] = <cols values>
/// One line per tensor row, values at 17 significant digits.
inline void save_model(const RecurrentModel& model, std::ostream& out) {
    const auto& a = model.arch;
    out << std::setprecision(17);
    out << "cell_kind = " << to_string(a.cell_kind) << '\n'
        << "hidden_layers = " << a.hidden_layers << '\n'
        << "hidden_units = " << a.hidden_units << '\n'
        << "input_mode = " << to_string(a.input_mode) << '\n'
        << "window = " << a.window << '\n'
        << "dropout_rate = " << a.dropout_rate << '\n'
        << "rng_seed = " << model.rng_seed << '\n';
    for (const auto& t : model.params) {
        for (std::size_t r = 0; r < t.rows; ++r) {
            out << t.name << '[' << r << "] =";
            const double* row = t.row(r);
            for (std::size_t c = 0; c < t.cols; ++c) out << ' ' << row[c];
            out << '\n';
        }
    }
}

inline void save_model(const RecurrentModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error(path.string(), "cannot open for writing");
    save_model(model, static_cast<std::ostream&>(out));
    out.flush();
    if (!out) throw io_error(path.string(), "write failed");
}

inline RecurrentModel load_model(std::istream& in) {
    std::map<std::string, std::string> fields;
    std::map<std::string, std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        line = detail::trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw domain_error("load_model: missing '=' in '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.find('[') != std::string::npos) {
            std::vector<double> vals;
            std::istringstream ss(value);
            std::string tok;
            while (ss >> tok) vals.push_back(detail::parse_double(tok, key));
            rows[key] = std::move(vals);
        } else {
            fields[key] = value;
        }
    }
    const auto field = [&](const std::string& k) -> const std::string& {
        const auto it = fields.find(k);
        if (it == fields.end()) throw domain_error("load_model: missing field '" + k + "'");
        return it->second;
    };

    Architecture a;
    a.cell_kind = parse_cell_kind(field("cell_kind"));
    a.hidden_layers = detail::parse_integer<std::size_t>(field("hidden_layers"), "hidden_layers");
    a.hidden_units = detail::parse_integer<std::size_t>(field("hidden_units"), "hidden_units");
    a.input_mode = parse_input_mode(field("input_mode"));
    a.window = detail::parse_integer<std::size_t>(field("window"), "window");
    a.dropout_rate = detail::parse_double(field("dropout_rate"), "dropout_rate");
    a.validate();

    RecurrentModel model;
    model.arch = a;
    model.rng_seed = detail::parse_integer<std::uint64_t>(field("rng_seed"), "rng_seed");
    model.params = detail::make_parameter_shapes(a);
    std::size_t consumed = 0;
    for (auto& t : model.params) {
        for (std::size_t r = 0; r < t.rows; ++r) {
            const std::string key = t.name + "[" + std::to_string(r) + "]";
            const auto it = rows.find(key);
            if (it == rows.end()) throw domain_error("load_model: missing tensor row " + key);
            if (it->second.size() != t.cols) throw domain_error("load_model: wrong row width for " + key);
            std::copy(it->second.begin(), it->second.end(), t.row(r));
            ++consumed;
        }
    }
    if (consumed != rows.size()) throw domain_error("load_model: unexpected tensor rows in input");
    return model;
}

inline RecurrentModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(path.string(), "cannot open for reading");
    return load_model(static_cast<std::istream&>(in));
}

} // namespace chanpred
