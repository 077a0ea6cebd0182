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
#include "cdrnet/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <set>

namespace cdrnet {

std::vector<std::string> class_vocabulary(Attribute attribute, const LabelMap& labels, const AgeBuckets& buckets) {
    if (attribute == Attribute::age) return buckets.labels();
    std::set<std::string> genders;
    for (const auto& [user, label] : labels) genders.insert(label.gender);
    if (genders.size() != 2)
        throw data_error("labels must contain exactly 2 distinct gender values, found " +
                         std::to_string(genders.size()));
    return {genders.begin(), genders.end()};
}

int encode_label(const LabelRecord& label, Attribute attribute, const AgeBuckets& buckets,
                 std::span<const std::string> vocabulary) {
    if (attribute == Attribute::age) return bucketize_age(label.age_years, buckets);
    auto it = std::find(vocabulary.begin(), vocabulary.end(), label.gender);
    if (it == vocabulary.end()) throw data_error("gender value '" + label.gender + "' is not in the model vocabulary");
    return static_cast<int>(it - vocabulary.begin());
}

UserWeeks group_weeks_by_user(std::span<const UserWeek> weeks) {
    UserWeeks out;
    for (const auto& uw : weeks) out[uw.user_id].push_back(uw.tensor);
    return out;
}

LabeledDataset label_dataset(const UserWeeks& weeks, const LabelMap& labels, Attribute attribute,
                             const AgeBuckets& buckets) {
    LabeledDataset d;
    d.attribute = attribute;
    if (attribute == Attribute::age) d.age_edges = buckets.edges();
    d.class_labels = class_vocabulary(attribute, labels, buckets);
    for (const auto& [user, tensors] : weeks) {
        auto it = labels.find(user);
        if (it == labels.end()) {
            ++d.unlabeled_users;
            continue;
        }
        if (tensors.empty()) continue;
        d.users.push_back({user, encode_label(it->second, attribute, buckets, d.class_labels), tensors});
    }
    return d;
}

TrainedModel train_model(const LabeledDataset& data, NetworkConfig net, const TrainConfig& config,
                         const EpochCallback& on_epoch) {
    net.classes = static_cast<int>(data.class_labels.size());
    auto result = train(data.users, net, config, on_epoch);
    TrainedModel out;
    out.model.config = net;
    out.model.params = std::move(result.params);
    out.model.norm = result.norm;
    out.model.attribute = data.attribute;
    out.model.age_edges = data.age_edges;
    out.model.class_labels = data.class_labels;
    out.history = std::move(result.history);
    return out;
}

std::vector<double> attach_svm(Model& model, const LabeledDataset& data, const SvmTrainOptions& options) {
    if (data.class_labels != model.class_labels)
        throw data_error("dataset classes do not match the model's class vocabulary");
    std::vector<std::vector<double>> features;
    std::vector<int> labels;
    for (const auto& u : data.users) {
        features.push_back(extract_user_features(model, u.weeks));
        labels.push_back(u.label);
    }
    if (features.empty()) throw data_error("no labeled users to train the SVM on");
    auto trained = train_linear_svm(features, labels, model.config.classes, options);
    trained.model.class_labels = model.class_labels;
    model.svm = std::move(trained.model);
    return trained.objective;
}

std::vector<UserPrediction> predict_users(const Model& model, const UserWeeks& weeks, Head head) {
    if (head == Head::svm && !model.svm) throw usage_error("model has no SVM head; run train-svm first");
    std::vector<UserPrediction> out;
    for (const auto& [user, tensors] : weeks) {
        if (tensors.empty()) continue;
        auto p = predict_user(model, tensors, user);
        if (head == Head::svm) p.predicted_class = svm_predict(*model.svm, extract_user_features(model, tensors));
        out.push_back(std::move(p));
    }
    return out;
}

void write_predictions_csv(std::ostream& out, std::span<const UserPrediction> predictions, int classes) {
    out << "user_id,predicted_class";
    for (int c = 0; c < classes; ++c) out << ",p_" << c;
    out << '\n';
    char buf[40];
    for (const auto& p : predictions) {
        out << p.user_id << ',' << p.predicted_class;
        for (double v : p.probs) {
            std::snprintf(buf, sizeof buf, ",%.17g", v);
            out << buf;
        }
        out << '\n';
    }
}

std::vector<UserClass> read_predictions_csv(std::istream& in) {
    std::vector<UserClass> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && line.starts_with("user_id,predicted_class")) continue;
        const auto c1 = line.find(',');
        if (c1 == std::string::npos || c1 == 0)
            throw data_error("malformed predictions row at line " + std::to_string(line_no));
        const auto c2 = line.find(',', c1 + 1);
        const auto cls = std::string_view(line).substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1);
        int value = 0;
        auto [ptr, ec] = std::from_chars(cls.data(), cls.data() + cls.size(), value);
        if (ec != std::errc{} || ptr != cls.data() + cls.size())
            throw data_error("bad predicted_class at line " + std::to_string(line_no));
        out.emplace_back(line.substr(0, c1), value);
    }
    if (in.bad()) throw data_error("predictions stream read failure");
    return out;
}

} // namespace cdrnet
