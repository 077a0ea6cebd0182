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

#include "cdrnet/featurize.hpp"
#include "cdrnet/rng.hpp"

namespace cdrnet {

struct SynthConfig {
    int users = 200;
    int weeks_per_user = 8;
    std::vector<int> age_edges{28, 38, 48};
    double female_ratio = 0.5; // probability of gender "f"; the other value is "m"
    double signal = 1.0;       // 0 = class-independent noise, 1 = pure archetype
    int contact_pool = 20;
    double event_rate = 60.0;  // expected events per user-week
    std::uint64_t seed = 1;
    std::uint64_t archetype_seed = 1; // shared by datasets meant to be comparable
    int first_user = 0;               // user ids start at u<first_user>

    void validate() const;
};

inline constexpr int kCells = kHours * kDays;

/// Class-specific behaviour of one (gender, age bucket) pair.
struct Archetype {
    std::vector<double> intensity; // distribution over hour*7 + day, sums to 1
    double call_fraction = 0.5;
    double outgoing_fraction = 0.5;
    double mean_call_duration_s = 180.0;
    double contact_reuse = 0.7;

    bool operator==(const Archetype&) const = default;
};

inline constexpr double kMinArchetypeDistance = 0.2;

/// 2 * K archetypes, indexed gender * K + age bucket with gender 0 = "f".
/// Pairwise total-variation distance between intensities is at least 0.2.
std::vector<Archetype> make_archetypes(const AgeBuckets& buckets, std::uint64_t seed);

/// The class-independent behaviour that signal = 0 collapses to.
Archetype neutral_archetype();

/// Interpolates every archetype parameter toward neutral_archetype(); the
/// intensity becomes s * intensity + (1 - s) * uniform.
Archetype blend_archetype(const Archetype& a, double signal);

double total_variation(std::span<const double> p, std::span<const double> q);

/// Inverse-CDF sampling over a fixed discrete distribution.
class CellSampler {
public:
    explicit CellSampler(std::span<const double> probabilities);
    int operator()(Rng& rng) const;

private:
    std::vector<double> cumulative_;
};

struct SynthData {
    std::vector<std::string> cdr_lines;   // header first
    std::vector<std::string> label_lines; // header first
};

/// Deterministic in config; users are emitted in id order, events in
/// timestamp order within each user.
SynthData generate(const SynthConfig& config);

/// The Monday on which every synthetic user's first week starts.
inline constexpr std::chrono::sys_days kSynthStart{std::chrono::year{2024} / 1 / 1};

void write_synth_files(const SynthData& data, const std::string& cdr_path, const std::string& labels_path);

} // namespace cdrnet
