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
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cdrnet/featurize.hpp"
#include "cdrnet/tensornet.hpp"

namespace cdrnet {

struct TrainConfig {
    double learning_rate = 0.01;
    double momentum = 0.9;
    int batch_size = 32;
    int epochs = 30;
    std::uint64_t seed = 1;
    double weight_decay = 0.0;
    double validation_fraction = 0.1;

    void validate() const;
};

struct EpochRecord {
    int epoch = 0; // 1-based
    double train_loss = 0.0;
    double val_loss = 0.0;     // NaN without a validation split
    double val_accuracy = 0.0; // user-level, NaN without a validation split
};

struct TrainHistory {
    std::vector<EpochRecord> epochs;
};

/// One JSON object per line.
std::string history_line_json(const EpochRecord& record);

struct LossGradient {
    double loss;
    std::vector<double> d_logits;
};

inline constexpr double kProbabilityFloor = 1e-12;

/// -ln(max(probs[label], 1e-12)) and its gradient w.r.t. the logits,
/// probs - onehot(label).
LossGradient cross_entropy(std::span<const double> probs, int label);

/// v <- momentum * v - lr * (g + weight_decay * w);  w <- w + v
void sgd_momentum_step(NetworkParams& params, const NetworkParams& grads, NetworkParams& velocity,
                       double learning_rate, double momentum, double weight_decay);

/// All weeks of one labeled user. Tensors are raw counts.
struct UserSamples {
    std::string user_id;
    int label = 0;
    std::vector<WeekTensor> weeks;
};

struct UserSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

/// Seeded shuffle of user indices; the first round(fraction * n) go to
/// validation, capped so that at least one user remains for training.
UserSplit split_users(std::size_t users, double fraction, std::uint64_t seed);

struct TrainResult {
    NetworkParams params;
    NormStats norm; // fitted on the training partition
    TrainHistory history;
    UserSplit split;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Mini-batch SGD with momentum over user-weeks, each week an independent
/// sample carrying its user's label. Users are split into training and
/// validation before anything else happens.
TrainResult train(std::span<const UserSamples> users, const NetworkConfig& net, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

inline constexpr double kGradCheckStep = 1e-5;

/// |a - b| / max(1e-8, |a| + |b|)
double relative_error(double a, double b);

/// Largest relative error between reverse-mode gradients of the
/// cross-entropy loss and central differences, over every parameter. tamper,
/// when set, may alter the analytic gradients before comparison.
double max_gradient_error(const NetworkConfig& config, const NetworkParams& params, std::span<const double> input,
                          int label, const std::function<void(NetworkParams&)>& tamper = {});

/// Initial weights with biases drawn from U(-0.5, 0.5) so that no unit starts
/// exactly on the rectifier kink.
NetworkParams gradcheck_params(const NetworkConfig& config, std::uint64_t seed);

/// Random parameters, standard normal input and a random label, all from seed.
double grad_check(const NetworkConfig& config, std::uint64_t seed);

} // namespace cdrnet
