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

// Glue between the file formats and the model: label encoding, assembling
// labeled user datasets, end-to-end training and batch prediction.

#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "cdrnet/classify.hpp"
#include "cdrnet/ingest.hpp"
#include "cdrnet/model.hpp"
#include "cdrnet/svm.hpp"
#include "cdrnet/training.hpp"

namespace cdrnet {

/// Class names for the target: the two sorted gender values, or the age
/// bucket intervals. Throws a data error unless exactly two genders occur.
std::vector<std::string> class_vocabulary(Attribute attribute, const LabelMap& labels, const AgeBuckets& buckets);

int encode_label(const LabelRecord& label, Attribute attribute, const AgeBuckets& buckets,
                 std::span<const std::string> vocabulary);

/// Raw weeks keyed by user, in the order they appear in the dataset.
using UserWeeks = std::map<std::string, std::vector<WeekTensor>>;
UserWeeks group_weeks_by_user(std::span<const UserWeek> weeks);

struct LabeledDataset {
    Attribute attribute = Attribute::gender;
    std::vector<int> age_edges;
    std::vector<std::string> class_labels;
    std::vector<UserSamples> users; // labeled users with at least one week, sorted by id
    std::size_t unlabeled_users = 0;
};

LabeledDataset label_dataset(const UserWeeks& weeks, const LabelMap& labels, Attribute attribute,
                             const AgeBuckets& buckets);

struct TrainedModel {
    Model model;
    TrainHistory history;
};

/// Trains the network for the dataset's target. net.classes is taken from
/// the dataset's vocabulary.
TrainedModel train_model(const LabeledDataset& data, NetworkConfig net, const TrainConfig& config,
                         const EpochCallback& on_epoch = {});

/// Trains a one-vs-rest SVM on per-user averaged dense8 features and stores
/// it in model.svm. Returns the per-epoch objective.
std::vector<double> attach_svm(Model& model, const LabeledDataset& data, const SvmTrainOptions& options);

enum class Head { average, svm };

/// One prediction per user. With Head::svm the predicted class comes from the
/// SVM; the probability columns are always the averaged softmax.
std::vector<UserPrediction> predict_users(const Model& model, const UserWeeks& weeks, Head head);

/// CSV "user_id,predicted_class,p_0,...,p_{K-1}".
void write_predictions_csv(std::ostream& out, std::span<const UserPrediction> predictions, int classes);
std::vector<UserClass> read_predictions_csv(std::istream& in);

} // namespace cdrnet
