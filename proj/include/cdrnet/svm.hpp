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
#include <span>
#include <string>
#include <vector>

namespace cdrnet {

/// One-vs-rest linear SVM over standardized feature vectors.
struct SvmModel {
    std::string feature_layer = "dense8";
    double lambda = 1e-4;
    std::vector<std::string> class_labels;
    std::vector<double> feature_mean; // standardization, fitted on training features
    std::vector<double> feature_std;
    std::vector<std::vector<double>> weights; // classes x dim
    std::vector<double> bias;                 // classes

    int classes() const { return static_cast<int>(bias.size()); }
    int feature_dim() const { return static_cast<int>(feature_mean.size()); }

    bool operator==(const SvmModel&) const = default;
};

struct SvmTrainOptions {
    double lambda = 1e-4;
    int epochs = 50;
    std::uint64_t seed = 1;
};

struct SvmTrainResult {
    SvmModel model;
    /// Regularized hinge objective summed over the one-vs-rest problems,
    /// evaluated on the full (standardized) training set after each epoch.
    std::vector<double> objective;
};

/// Pegasos-style projected stochastic subgradient descent on
///   (lambda/2)|w|^2 + mean(max(0, 1 - y (w.x + b)))
/// for each class against the rest, b trained as the weight of a constant
/// feature. The model holds the iterates averaged with weight proportional
/// to the step number. Requires at least two distinct labels.
SvmTrainResult train_linear_svm(std::span<const std::vector<double>> features, std::span<const int> labels,
                                int classes, const SvmTrainOptions& options);

/// Per-class margins w_c . z + b_c on the standardized input.
std::vector<double> svm_margins(const SvmModel& svm, std::span<const double> features);

/// Argmax margin, ties to the lowest class index.
int svm_predict(const SvmModel& svm, std::span<const double> features);

/// The summed one-vs-rest objective of svm on raw (unstandardized) features.
double svm_objective(const SvmModel& svm, std::span<const std::vector<double>> features, std::span<const int> labels);

} // namespace cdrnet
