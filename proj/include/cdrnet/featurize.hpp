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

#include <array>
#include <chrono>
#include <span>
#include <string>
#include <vector>

#include "cdrnet/ingest.hpp"

namespace cdrnet {

inline constexpr int kChannels = 8;
inline constexpr int kHours = 24;
inline constexpr int kDays = 7;
inline constexpr int kTensorSize = kChannels * kHours * kDays;

/// Channel order of a week tensor. Day 0 is Monday.
enum Channel : int {
    out_unique_contacts = 0,
    out_calls = 1,
    out_texts = 2,
    out_call_duration_s = 3,
    in_unique_contacts = 4,
    in_calls = 5,
    in_texts = 6,
    in_call_duration_s = 7,
};

/// A Monday-anchored week.
struct WeekId {
    std::chrono::sys_days start;

    auto operator<=>(const WeekId&) const = default;
};

WeekId week_of(Timestamp ts);

/// Day of week with Monday = 0.
int weekday_index(Timestamp ts);
int hour_of_day(Timestamp ts);

/// 8 x 24 x 7 activity tensor stored channel-major, then hour, then day.
/// The same layout is the network's C x H x W input.
struct WeekTensor {
    std::vector<double> values = std::vector<double>(kTensorSize, 0.0);

    static constexpr std::size_t index(int channel, int hour, int day) {
        return (static_cast<std::size_t>(channel) * kHours + hour) * kDays + day;
    }
    double& at(int channel, int hour, int day) { return values[index(channel, hour, day)]; }
    double at(int channel, int hour, int day) const { return values[index(channel, hour, day)]; }

    bool operator==(const WeekTensor&) const = default;
};

/// Raw counts for one user-week. Throws a data error if a record falls
/// outside the week.
WeekTensor build_week_tensor(std::span<const CdrRecord> records, WeekId week);

struct UserWeek {
    std::string user_id;
    WeekId week;
    WeekTensor tensor;
};

/// One tensor per active week of a user's (timestamp-sorted or not) records,
/// in week order. With include_empty_weeks, silent weeks between the first and
/// last active week are emitted as zero tensors.
std::vector<UserWeek> featurize_user(const std::string& user_id, std::span<const CdrRecord> records,
                                     bool include_empty_weeks = false);

std::vector<UserWeek> featurize_all(const UserRecords& groups, bool include_empty_weeks = false);

inline constexpr double kMinStd = 1e-6;

/// Per-channel statistics of log1p(cell) over a training set.
struct NormStats {
    std::array<double, kChannels> mean{};
    std::array<double, kChannels> std{};

    bool operator==(const NormStats&) const = default;
};

NormStats fit_normalizer(std::span<const WeekTensor* const> tensors);
NormStats fit_normalizer(std::span<const WeekTensor> tensors);

/// cell -> (log1p(cell) - mean_c) / std_c
WeekTensor apply_normalizer(const WeekTensor& tensor, const NormStats& stats);

/// Right-open age intervals; classes() == edges.size() + 1.
class AgeBuckets {
public:
    AgeBuckets() : AgeBuckets(std::vector<int>{28, 38, 48}) {}
    explicit AgeBuckets(std::vector<int> edges);

    const std::vector<int>& edges() const { return edges_; }
    int classes() const { return static_cast<int>(edges_.size()) + 1; }

    /// Human-readable class names, e.g. "[28,38)".
    std::vector<std::string> labels() const;

private:
    std::vector<int> edges_;
};

int bucketize_age(int age_years, const AgeBuckets& buckets);

} // namespace cdrnet
