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

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cdrnet/model.hpp"

namespace cdrnet {

struct UserPrediction {
    std::string user_id;
    std::vector<double> probs; // averaged over weeks
    int predicted_class = 0;
    int weeks_used = 0;

    bool operator==(const UserPrediction&) const = default;
};

/// Index of the largest entry; ties resolve to the lowest index.
int argmax(std::span<const double> values);

/// Arithmetic mean of per-week probability vectors.
std::vector<double> average_probabilities(std::span<const std::vector<double>> per_week);

/// Softmax output for one raw (unnormalized) week.
std::vector<double> week_probabilities(const Model& model, const WeekTensor& raw);

/// Softmax averaging over a user's raw weeks. Throws on an empty list.
UserPrediction predict_user(const Model& model, std::span<const WeekTensor> weeks, std::string user_id = {});

/// dense8 activations averaged over a user's raw weeks.
std::vector<double> extract_user_features(const Model& model, std::span<const WeekTensor> weeks);

struct Metrics {
    int classes = 0;
    std::size_t total = 0;
    double accuracy = 0.0;
    double majority_baseline = 0.0;
    double uniform_baseline = 0.0; // 1 / K
    std::vector<std::vector<std::size_t>> confusion; // [truth][predicted]
    std::vector<double> precision;                   // 0 where undefined
    std::vector<double> recall;
};

using UserClass = std::pair<std::string, int>;

/// Every predicted user must appear in truth. The majority baseline is the
/// frequency of the most common true class among the evaluated users.
Metrics evaluate(std::span<const UserClass> predictions, std::span<const UserClass> truth, int classes);

std::string metrics_to_json(const Metrics& metrics);

/// Plain-text accuracy table with a Majority row followed by one row per
/// named head, e.g. ConvNet and ConvNet-SVM.
std::string format_results_table(const std::string& column, double majority,
                                 std::span<const std::pair<std::string, double>> rows);

} // namespace cdrnet
