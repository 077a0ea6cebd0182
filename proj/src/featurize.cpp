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
#include "cdrnet/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>
#include <set>
#include <utility>

namespace cdrnet {

using namespace std::chrono;

int weekday_index(Timestamp ts) {
    // iso_encoding: Monday = 1 ... Sunday = 7
    return static_cast<int>(weekday{floor<days>(ts)}.iso_encoding()) - 1;
}

int hour_of_day(Timestamp ts) {
    return static_cast<int>(floor<hours>(ts - floor<days>(ts)).count());
}

WeekId week_of(Timestamp ts) {
    const auto d = floor<days>(ts);
    return WeekId{d - days{weekday_index(ts)}};
}

WeekTensor build_week_tensor(std::span<const CdrRecord> records, WeekId week) {
    WeekTensor t;
    // (direction, hour, day) -> contacts seen in that cell
    std::array<std::set<std::string_view>, 2 * kHours * kDays> contacts;

    for (const auto& r : records) {
        if (week_of(r.timestamp) != week)
            throw data_error("record at " + format_timestamp(r.timestamp) + " lies outside the week");
        const int h = hour_of_day(r.timestamp);
        const int d = weekday_index(r.timestamp);
        const bool out = r.direction == Direction::outgoing;
        const int base = out ? out_unique_contacts : in_unique_contacts;

        if (r.kind == EventKind::call) {
            t.at(base + 1, h, d) += 1.0;
            t.at(base + 3, h, d) += static_cast<double>(r.duration_s);
        } else {
            t.at(base + 2, h, d) += 1.0;
        }
        contacts[((out ? 0 : 1) * kHours + h) * kDays + d].insert(r.correspondent_id);
    }

    for (int dir = 0; dir < 2; ++dir)
        for (int h = 0; h < kHours; ++h)
            for (int d = 0; d < kDays; ++d)
                t.at(dir == 0 ? out_unique_contacts : in_unique_contacts, h, d) =
                    static_cast<double>(contacts[(dir * kHours + h) * kDays + d].size());
    return t;
}

std::vector<UserWeek> featurize_user(const std::string& user_id, std::span<const CdrRecord> records,
                                     bool include_empty_weeks) {
    std::map<WeekId, std::vector<CdrRecord>> by_week;
    for (const auto& r : records) by_week[week_of(r.timestamp)].push_back(r);

    std::vector<UserWeek> out;
    if (by_week.empty()) return out;

    if (include_empty_weeks) {
        const auto first = by_week.begin()->first.start;
        const auto last = by_week.rbegin()->first.start;
        for (auto s = first; s <= last; s += days{7}) by_week.try_emplace(WeekId{s});
    }
    for (const auto& [week, recs] : by_week)
        out.push_back({user_id, week, build_week_tensor(recs, week)});
    return out;
}

std::vector<UserWeek> featurize_all(const UserRecords& groups, bool include_empty_weeks) {
    std::vector<UserWeek> out;
    for (const auto& [user, records] : groups) {
        auto weeks = featurize_user(user, records, include_empty_weeks);
        std::move(weeks.begin(), weeks.end(), std::back_inserter(out));
    }
    return out;
}

NormStats fit_normalizer(std::span<const WeekTensor* const> tensors) {
    if (tensors.empty()) throw data_error("cannot fit normalizer on an empty tensor list");
    constexpr int cells = kHours * kDays;
    const double n = static_cast<double>(tensors.size()) * cells;

    NormStats s;
    for (int c = 0; c < kChannels; ++c) {
        double sum = 0.0;
        for (const auto* t : tensors)
            for (int i = 0; i < cells; ++i) sum += std::log1p(t->values[c * cells + i]);
        const double mean = sum / n;
        double ss = 0.0;
        for (const auto* t : tensors)
            for (int i = 0; i < cells; ++i) {
                const double dv = std::log1p(t->values[c * cells + i]) - mean;
                ss += dv * dv;
            }
        s.mean[c] = mean;
        s.std[c] = std::max(std::sqrt(ss / n), kMinStd);
    }
    return s;
}

NormStats fit_normalizer(std::span<const WeekTensor> tensors) {
    std::vector<const WeekTensor*> ptrs;
    ptrs.reserve(tensors.size());
    for (const auto& t : tensors) ptrs.push_back(&t);
    return fit_normalizer(std::span<const WeekTensor* const>(ptrs));
}

WeekTensor apply_normalizer(const WeekTensor& tensor, const NormStats& stats) {
    constexpr int cells = kHours * kDays;
    WeekTensor out;
    for (int c = 0; c < kChannels; ++c)
        for (int i = 0; i < cells; ++i)
            out.values[c * cells + i] =
                (std::log1p(tensor.values[c * cells + i]) - stats.mean[c]) / stats.std[c];
    return out;
}

AgeBuckets::AgeBuckets(std::vector<int> edges) : edges_(std::move(edges)) {
    if (edges_.empty()) throw usage_error("age buckets need at least one edge");
    for (std::size_t i = 1; i < edges_.size(); ++i)
        if (edges_[i] <= edges_[i - 1]) throw usage_error("age bucket edges must be strictly increasing");
}

std::vector<std::string> AgeBuckets::labels() const {
    std::vector<std::string> out;
    int lo = 0;
    for (int e : edges_) {
        out.push_back("[" + std::to_string(lo) + "," + std::to_string(e) + ")");
        lo = e;
    }
    out.push_back("[" + std::to_string(lo) + ",inf)");
    return out;
}

int bucketize_age(int age_years, const AgeBuckets& buckets) {
    const auto& e = buckets.edges();
    return static_cast<int>(std::upper_bound(e.begin(), e.end(), age_years) - e.begin());
}

} // namespace cdrnet
