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
#include "cdrnet/classify.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "json.hpp"

namespace cdrnet {

int argmax(std::span<const double> values) {
    return static_cast<int>(std::max_element(values.begin(), values.end()) - values.begin());
}

std::vector<double> average_probabilities(std::span<const std::vector<double>> per_week) {
    if (per_week.empty()) throw usage_error("cannot average an empty list of predictions");
    std::vector<double> avg(per_week.front().size(), 0.0);
    for (const auto& p : per_week) {
        if (p.size() != avg.size()) throw usage_error("prediction vectors differ in length");
        for (std::size_t c = 0; c < avg.size(); ++c) avg[c] += p[c];
    }
    for (double& v : avg) v /= static_cast<double>(per_week.size());
    return avg;
}

std::vector<double> week_probabilities(const Model& model, const WeekTensor& raw) {
    return forward(model.config, model.params, apply_normalizer(raw, model.norm).values).probs;
}

UserPrediction predict_user(const Model& model, std::span<const WeekTensor> weeks, std::string user_id) {
    if (weeks.empty()) throw data_error("user '" + user_id + "' has no weeks to predict from");
    std::vector<std::vector<double>> per_week;
    per_week.reserve(weeks.size());
    for (const auto& w : weeks) per_week.push_back(week_probabilities(model, w));
    UserPrediction p;
    p.user_id = std::move(user_id);
    p.probs = average_probabilities(per_week);
    p.predicted_class = argmax(p.probs);
    p.weeks_used = static_cast<int>(weeks.size());
    return p;
}

std::vector<double> extract_user_features(const Model& model, std::span<const WeekTensor> weeks) {
    if (weeks.empty()) throw data_error("cannot extract features from an empty week list");
    std::vector<double> sum(model.config.dense8, 0.0);
    for (const auto& w : weeks) {
        const auto f = forward(model.config, model.params, apply_normalizer(w, model.norm).values).features;
        for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += f[k];
    }
    for (double& v : sum) v /= static_cast<double>(weeks.size());
    return sum;
}

Metrics evaluate(std::span<const UserClass> predictions, std::span<const UserClass> truth, int classes) {
    if (classes < 1) throw usage_error("class count must be positive");
    std::map<std::string, int> truth_map;
    for (const auto& [user, cls] : truth) truth_map[user] = cls;

    Metrics m;
    m.classes = classes;
    m.confusion.assign(classes, std::vector<std::size_t>(classes, 0));
    auto in_range = [&](int c) { return c >= 0 && c < classes; };
    for (const auto& [user, pred] : predictions) {
        auto it = truth_map.find(user);
        if (it == truth_map.end()) throw data_error("no truth label for user '" + user + "'");
        if (!in_range(pred) || !in_range(it->second))
            throw data_error("class index out of range for user '" + user + "'");
        ++m.confusion[it->second][pred];
    }

    m.total = predictions.size();
    m.uniform_baseline = 1.0 / classes;
    m.precision.assign(classes, 0.0);
    m.recall.assign(classes, 0.0);
    if (m.total == 0) return m;

    std::size_t correct = 0, largest = 0;
    for (int t = 0; t < classes; ++t) {
        correct += m.confusion[t][t];
        std::size_t row = 0, col = 0;
        for (int p = 0; p < classes; ++p) {
            row += m.confusion[t][p];
            col += m.confusion[p][t];
        }
        largest = std::max(largest, row);
        if (row) m.recall[t] = static_cast<double>(m.confusion[t][t]) / static_cast<double>(row);
        if (col) m.precision[t] = static_cast<double>(m.confusion[t][t]) / static_cast<double>(col);
    }
    m.accuracy = static_cast<double>(correct) / static_cast<double>(m.total);
    m.majority_baseline = static_cast<double>(largest) / static_cast<double>(m.total);
    return m;
}

std::string metrics_to_json(const Metrics& m) {
    nlohmann::json j;
    j["classes"] = m.classes;
    j["total"] = m.total;
    j["accuracy"] = m.accuracy;
    j["majority_baseline"] = m.majority_baseline;
    j["uniform_baseline"] = m.uniform_baseline;
    j["confusion"] = m.confusion;
    j["precision"] = m.precision;
    j["recall"] = m.recall;
    return j.dump();
}

std::string format_results_table(const std::string& column, double majority,
                                 std::span<const std::pair<std::string, double>> rows) {
    std::vector<std::pair<std::string, double>> all{{"Majority", majority}};
    all.insert(all.end(), rows.begin(), rows.end());

    std::size_t name_w = 0;
    for (const auto& r : all) name_w = std::max(name_w, r.first.size());
    const std::size_t val_w = std::max<std::size_t>(column.size(), 6);

    auto pad = [](std::string s, std::size_t w) {
        s.resize(std::max(s.size(), w), ' ');
        return s;
    };
    const std::string rule = "+" + std::string(name_w + 2, '-') + "+" + std::string(val_w + 2, '-') + "+\n";

    std::string out = rule;
    out += "| " + pad("", name_w) + " | " + pad(column, val_w) + " |\n" + rule;
    for (const auto& [name, acc] : all) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f%%", 100.0 * acc);
        out += "| " + pad(name, name_w) + " | " + pad(buf, val_w) + " |\n";
    }
    out += rule;
    return out;
}

} // namespace cdrnet
