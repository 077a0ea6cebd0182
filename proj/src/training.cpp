/* Copyright 2026 The cdrnet Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include "cdrnet/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "cdrnet/error.hpp"
#include "cdrnet/rng.hpp"
#include "json.hpp"

namespace cdrnet {

void TrainConfig::validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw usage_error("learning rate must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw usage_error("momentum must lie in [0, 1)");
    if (batch_size < 1) throw usage_error("batch size must be at least 1");
    if (epochs < 1) throw usage_error("epochs must be at least 1");
    if (!(weight_decay >= 0.0)) throw usage_error("weight decay must be >= 0");
    if (!(validation_fraction >= 0.0 && validation_fraction <= 0.5))
        throw usage_error("validation fraction must lie in [0, 0.5]");
}

std::string history_line_json(const EpochRecord& r) {
    auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
    nlohmann::json j;
    j["epoch"] = r.epoch;
    j["train_loss"] = num(r.train_loss);
    j["val_loss"] = num(r.val_loss);
    j["val_accuracy"] = num(r.val_accuracy);
    return j.dump();
}

LossGradient cross_entropy(std::span<const double> probs, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= probs.size())
        throw usage_error("label " + std::to_string(label) + " out of range for " + std::to_string(probs.size()) +
                          " classes");
    LossGradient out{-std::log(std::max(probs[label], kProbabilityFloor)), {probs.begin(), probs.end()}};
    out.d_logits[label] -= 1.0;
    return out;
}

void sgd_momentum_step(NetworkParams& params, const NetworkParams& grads, NetworkParams& velocity,
                       double learning_rate, double momentum, double weight_decay) {
    if (grads.tensors.size() != params.tensors.size() || velocity.tensors.size() != params.tensors.size())
        throw usage_error("optimizer state does not match parameters");
    for (std::size_t t = 0; t < params.tensors.size(); ++t) {
        auto& w = params.tensors[t].values;
        const auto& g = grads.tensors[t].values;
        auto& v = velocity.tensors[t].values;
        if (g.size() != w.size() || v.size() != w.size()) throw usage_error("optimizer tensor shape mismatch");
        for (std::size_t k = 0; k < w.size(); ++k) {
            v[k] = momentum * v[k] - learning_rate * (g[k] + weight_decay * w[k]);
            w[k] += v[k];
        }
    }
}

UserSplit split_users(std::size_t users, double fraction, std::uint64_t seed) {
    std::vector<std::size_t> order(users);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(order.begin(), order.end());
    auto n_val = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(users)));
    if (users > 0) n_val = std::min(n_val, users - 1);
    UserSplit s;
    s.validation.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
    s.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    std::sort(s.validation.begin(), s.validation.end());
    std::sort(s.train.begin(), s.train.end());
    return s;
}

namespace {

void zero(NetworkParams& p) {
    for (auto& t : p.tensors) std::fill(t.values.begin(), t.values.end(), 0.0);
}

struct Sample {
    const WeekTensor* normalized;
    int label;
};

} // namespace

TrainResult train(std::span<const UserSamples> users, const NetworkConfig& net, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
    net.validate();
    config.validate();

    std::set<int> classes_seen;
    std::size_t total_weeks = 0;
    for (const auto& u : users) {
        if (u.label < 0 || u.label >= net.classes)
            throw usage_error("label of user '" + u.user_id + "' out of range");
        if (!u.weeks.empty()) classes_seen.insert(u.label);
        total_weeks += u.weeks.size();
    }
    if (total_weeks == 0) throw data_error("training set is empty");
    if (classes_seen.size() < 2) throw data_error("training set contains a single class");

    TrainResult result;
    result.split = split_users(users.size(), config.validation_fraction, mix_seed(config.seed, 1));

    std::vector<const WeekTensor*> train_raw;
    for (auto u : result.split.train)
        for (const auto& w : users[u].weeks) train_raw.push_back(&w);
    if (train_raw.empty()) throw data_error("training partition has no weeks");
    result.norm = fit_normalizer(train_raw);

    std::vector<std::vector<WeekTensor>> normalized(users.size());
    for (std::size_t u = 0; u < users.size(); ++u)
        for (const auto& w : users[u].weeks) normalized[u].push_back(apply_normalizer(w, result.norm));

    std::vector<Sample> samples;
    for (auto u : result.split.train)
        for (const auto& w : normalized[u]) samples.push_back({&w, users[u].label});

    result.params = init_params(net, mix_seed(config.seed, 0));
    auto grads = zero_params(net);
    auto velocity = zero_params(net);
    Rng shuffle_rng(mix_seed(config.seed, 2));

    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(samples.begin(), samples.end());
        double loss_sum = 0.0;
        for (std::size_t start = 0; start < samples.size(); start += config.batch_size) {
            const auto end = std::min(samples.size(), start + static_cast<std::size_t>(config.batch_size));
            zero(grads);
            for (auto k = start; k < end; ++k) {
                auto fw = forward(net, result.params, samples[k].normalized->values);
                auto lg = cross_entropy(fw.probs, samples[k].label);
                if (!std::isfinite(lg.loss)) throw numeric_error("non-finite training loss at epoch " + std::to_string(epoch));
                loss_sum += lg.loss;
                backward(net, result.params, fw.trace, lg.d_logits, grads);
            }
            const double scale = 1.0 / static_cast<double>(end - start);
            for (auto& t : grads.tensors)
                for (double& g : t.values) g *= scale;
            sgd_momentum_step(result.params, grads, velocity, config.learning_rate, config.momentum,
                              config.weight_decay);
        }

        EpochRecord rec{epoch, loss_sum / static_cast<double>(samples.size()), nan, nan};
        if (!std::isfinite(rec.train_loss)) throw numeric_error("non-finite training loss at epoch " + std::to_string(epoch));

        std::size_t val_weeks = 0, val_users = 0, val_correct = 0;
        double val_loss = 0.0;
        for (auto u : result.split.validation) {
            if (normalized[u].empty()) continue;
            std::vector<double> avg(net.classes, 0.0);
            for (const auto& w : normalized[u]) {
                auto fw = forward(net, result.params, w.values);
                val_loss += cross_entropy(fw.probs, users[u].label).loss;
                for (int c = 0; c < net.classes; ++c) avg[c] += fw.probs[c];
                ++val_weeks;
            }
            const auto pred = std::max_element(avg.begin(), avg.end()) - avg.begin();
            val_correct += pred == users[u].label ? 1 : 0;
            ++val_users;
        }
        if (val_users > 0) {
            rec.val_loss = val_loss / static_cast<double>(val_weeks);
            rec.val_accuracy = static_cast<double>(val_correct) / static_cast<double>(val_users);
        }
        result.history.epochs.push_back(rec);
        if (on_epoch) on_epoch(rec);
    }
    return result;
}

namespace {

using Wide = long double;

// Straightforward loops in extended precision. Used only as the numeric side
// of the gradient check, so it shares no kernels with forward().
struct WideNet {
    const NetworkConfig& config;
    std::vector<std::vector<Wide>> tensors;

    WideNet(const NetworkConfig& c, const NetworkParams& p) : config(c) {
        for (const auto& t : p.tensors) tensors.emplace_back(t.values.begin(), t.values.end());
    }

    Wide act(Wide v) const { return v >= 0 ? v : static_cast<Wide>(config.alpha) * v; }

    Wide loss(std::span<const double> input, int label) const {
        std::vector<Wide> x(input.begin(), input.end());
        int ch = config.in_channels, h = config.in_height, w = config.in_width;
        for (int l = 0; l < kConvLayers; ++l) {
            const auto& W = tensors[2 * l];
            const auto& B = tensors[2 * l + 1];
            const int kh = config.conv[l].kernel_h, kw = config.conv[l].kernel_w, co = config.conv[l].filters;
            const int oh = h - kh + 1, ow = w - kw + 1;
            std::vector<Wide> y(static_cast<std::size_t>(co) * oh * ow);
            for (int o = 0; o < co; ++o)
                for (int r = 0; r < oh; ++r)
                    for (int q = 0; q < ow; ++q) {
                        Wide s = B[o];
                        for (int c = 0; c < ch; ++c)
                            for (int i = 0; i < kh; ++i)
                                for (int j = 0; j < kw; ++j)
                                    s += W[((static_cast<std::size_t>(o) * ch + c) * kh + i) * kw + j] *
                                         x[(static_cast<std::size_t>(c) * h + r + i) * w + q + j];
                        y[(static_cast<std::size_t>(o) * oh + r) * ow + q] = act(s);
                    }
            x = std::move(y);
            ch = co;
            h = oh;
            w = ow;
        }
        for (int l = kConvLayers; l < kLayers; ++l) {
            const auto& W = tensors[2 * l];
            const auto& B = tensors[2 * l + 1];
            std::vector<Wide> y(B.size());
            for (std::size_t r = 0; r < y.size(); ++r) {
                Wide s = B[r];
                for (std::size_t k = 0; k < x.size(); ++k) s += W[r * x.size() + k] * x[k];
                y[r] = l + 1 < kLayers ? act(s) : s;
            }
            x = std::move(y);
        }
        Wide m = *std::max_element(x.begin(), x.end());
        Wide z = 0;
        for (Wide v : x) z += std::exp(v - m);
        const Wide p = std::exp(x[static_cast<std::size_t>(label)] - m) / z;
        return -std::log(std::max(p, static_cast<Wide>(1e-12)));
    }
};

} // namespace

double relative_error(double a, double b) { return std::abs(a - b) / std::max(1e-8, std::abs(a) + std::abs(b)); }

double max_gradient_error(const NetworkConfig& config, const NetworkParams& params, std::span<const double> input,
                          int label, const std::function<void(NetworkParams&)>& tamper) {
    auto fw = forward(config, params, input);
    auto analytic = backward(config, params, fw.trace, cross_entropy(fw.probs, label).d_logits);
    if (tamper) tamper(analytic);

    WideNet probe(config, params);
    const Wide step = kGradCheckStep;
    double worst = 0.0;
    for (std::size_t t = 0; t < probe.tensors.size(); ++t) {
        auto& values = probe.tensors[t];
        for (std::size_t k = 0; k < values.size(); ++k) {
            const Wide saved = values[k];
            values[k] = saved + step;
            const Wide up = probe.loss(input, label);
            values[k] = saved - step;
            const Wide down = probe.loss(input, label);
            values[k] = saved;
            const double numeric = static_cast<double>((up - down) / (2 * step));
            worst = std::max(worst, relative_error(analytic.tensors[t].values[k], numeric));
        }
    }
    return worst;
}

NetworkParams gradcheck_params(const NetworkConfig& config, std::uint64_t seed) {
    auto p = init_params(config, seed);
    Rng rng(mix_seed(seed, 7));
    for (int l = 0; l < kLayers; ++l)
        for (double& b : p.bias(l).values) b = rng.uniform(-0.5, 0.5);
    return p;
}

double grad_check(const NetworkConfig& config, std::uint64_t seed) {
    config.validate();
    const auto params = gradcheck_params(config, seed);
    Rng rng(mix_seed(seed, 8));
    std::vector<double> input(static_cast<std::size_t>(config.in_channels) * config.in_height * config.in_width);
    for (double& v : input) v = rng.normal();
    const int label = static_cast<int>(rng.below(static_cast<std::uint64_t>(config.classes)));
    return max_gradient_error(config, params, input, label);
}

} // namespace cdrnet
