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
#include "cdrnet/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "cdrnet/ingest.hpp"

namespace cdrnet {

void SynthConfig::validate() const {
    if (users < 1 || weeks_per_user < 1 || contact_pool < 1) throw usage_error("synthetic counts must be >= 1");
    if (!(event_rate > 0.0 && event_rate <= 500.0)) throw usage_error("event rate must lie in (0, 500]");
    if (!(female_ratio > 0.0 && female_ratio < 1.0)) throw usage_error("gender ratio must lie in (0, 1)");
    if (!(signal >= 0.0 && signal <= 1.0)) throw usage_error("signal strength must lie in [0, 1]");
    if (first_user < 0) throw usage_error("first user index must be >= 0");
    AgeBuckets{age_edges};
}

namespace {

constexpr int kMaxArchetypeDraws = 10000;

Archetype draw_archetype(Rng& rng) {
    // Two circular Gaussian bumps over the day, a random weekday profile.
    std::array<double, kHours> hour{};
    for (int bump = 0; bump < 2; ++bump) {
        const double centre = rng.uniform(0.0, kHours);
        const double width = rng.uniform(1.5, 3.0);
        const double weight = rng.uniform(0.5, 1.0);
        for (int h = 0; h < kHours; ++h) {
            double d = std::abs(h + 0.5 - centre);
            d = std::min(d, kHours - d);
            hour[h] += weight * std::exp(-0.5 * d * d / (width * width));
        }
    }
    std::array<double, kDays> day{};
    for (double& v : day) v = rng.uniform(0.1, 1.0);

    Archetype a;
    a.intensity.assign(kCells, 0.0);
    double total = 0.0;
    for (int h = 0; h < kHours; ++h)
        for (int d = 0; d < kDays; ++d) total += a.intensity[h * kDays + d] = hour[h] * day[d];
    // a small floor keeps every cell reachable
    for (double& v : a.intensity) v = 0.98 * v / total + 0.02 / kCells;

    a.call_fraction = rng.uniform(0.3, 0.8);
    a.outgoing_fraction = rng.uniform(0.35, 0.65);
    a.mean_call_duration_s = rng.uniform(60.0, 300.0);
    a.contact_reuse = rng.uniform(0.5, 0.95);
    return a;
}

struct AgeRange {
    int lo, hi; // [lo, hi)
};

AgeRange bucket_age_range(const std::vector<int>& edges, int bucket) {
    const int k = static_cast<int>(edges.size());
    int lo = bucket == 0 ? std::max(0, std::min(18, edges[0] - 10)) : edges[bucket - 1];
    int hi = bucket == k ? std::min(edges.back() + 20, kMaxAgeYears + 1) : edges[bucket];
    lo = std::min(lo, kMaxAgeYears);
    return {lo, std::max(hi, lo + 1)};
}

} // namespace

std::vector<Archetype> make_archetypes(const AgeBuckets& buckets, std::uint64_t seed) {
    const int n = 2 * buckets.classes();
    Rng rng(mix_seed(seed, 0xA5));
    std::vector<Archetype> out;
    for (int draws = 0; static_cast<int>(out.size()) < n; ++draws) {
        if (draws > kMaxArchetypeDraws) throw numeric_error("could not draw well-separated archetypes");
        auto candidate = draw_archetype(rng);
        const bool separated = std::all_of(out.begin(), out.end(), [&](const Archetype& a) {
            return total_variation(a.intensity, candidate.intensity) >= kMinArchetypeDistance;
        });
        if (separated) out.push_back(std::move(candidate));
    }
    return out;
}

Archetype neutral_archetype() {
    Archetype a;
    a.intensity.assign(kCells, 1.0 / kCells);
    a.call_fraction = 0.55;
    a.outgoing_fraction = 0.5;
    a.mean_call_duration_s = 180.0;
    a.contact_reuse = 0.725;
    return a;
}

Archetype blend_archetype(const Archetype& a, double s) {
    const auto n = neutral_archetype();
    auto mix = [s](double x, double y) { return s * x + (1.0 - s) * y; };
    Archetype b;
    b.intensity.resize(kCells);
    for (int c = 0; c < kCells; ++c) b.intensity[c] = mix(a.intensity[c], n.intensity[c]);
    b.call_fraction = mix(a.call_fraction, n.call_fraction);
    b.outgoing_fraction = mix(a.outgoing_fraction, n.outgoing_fraction);
    b.mean_call_duration_s = mix(a.mean_call_duration_s, n.mean_call_duration_s);
    b.contact_reuse = mix(a.contact_reuse, n.contact_reuse);
    return b;
}

double total_variation(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) throw usage_error("distributions differ in support size");
    double s = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
    return 0.5 * s;
}

CellSampler::CellSampler(std::span<const double> probabilities) {
    double acc = 0.0;
    for (double p : probabilities) cumulative_.push_back(acc += p);
    for (double& c : cumulative_) c /= acc;
}

int CellSampler::operator()(Rng& rng) const {
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                                    static_cast<std::ptrdiff_t>(cumulative_.size()) - 1));
}

SynthData generate(const SynthConfig& config) {
    config.validate();
    const AgeBuckets buckets(config.age_edges);
    const int k = buckets.classes();
    const auto archetypes = make_archetypes(buckets, config.archetype_seed);

    std::vector<Archetype> blended;
    std::vector<CellSampler> samplers;
    for (const auto& a : archetypes) {
        blended.push_back(blend_archetype(a, config.signal));
        samplers.emplace_back(blended.back().intensity);
    }

    SynthData out;
    out.cdr_lines.emplace_back(kCdrHeader);
    out.label_lines.emplace_back(kLabelsHeader);

    const int favourites = std::max(1, config.contact_pool / 4);
    for (int i = 0; i < config.users; ++i) {
        const int index = config.first_user + i;
        Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(index)));
        char id[32];
        std::snprintf(id, sizeof id, "u%06d", index);
        const std::string user = id;

        const int gender = rng.uniform() < config.female_ratio ? 0 : 1;
        const int bucket = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
        const auto range = bucket_age_range(buckets.edges(), bucket);
        const int age = range.lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(range.hi - range.lo)));
        out.label_lines.push_back(user + (gender == 0 ? ",f," : ",m,") + std::to_string(age));

        const auto& arch = blended[gender * k + bucket];
        const auto& sampler = samplers[gender * k + bucket];

        std::vector<CdrRecord> week;
        for (int w = 0; w < config.weeks_per_user; ++w) {
            const auto week_start = kSynthStart + std::chrono::days{7 * w};
            const auto n = rng.poisson(config.event_rate);
            week.clear();
            for (std::uint64_t e = 0; e < n; ++e) {
                const int cell = sampler(rng);
                const int hour = cell / kDays;
                const int day = cell % kDays;
                CdrRecord r;
                r.user_id = user;
                r.timestamp = week_start + std::chrono::days{day} + std::chrono::hours{hour} +
                              std::chrono::seconds{static_cast<std::int64_t>(rng.below(3600))};
                r.direction = rng.uniform() < arch.outgoing_fraction ? Direction::outgoing : Direction::incoming;
                r.kind = rng.uniform() < arch.call_fraction ? EventKind::call : EventKind::text;
                r.duration_s = r.kind == EventKind::call
                                   ? static_cast<std::int64_t>(std::llround(rng.exponential(arch.mean_call_duration_s)))
                                   : 0;
                const auto contact = rng.uniform() < arch.contact_reuse
                                         ? rng.below(static_cast<std::uint64_t>(favourites))
                                         : rng.below(static_cast<std::uint64_t>(config.contact_pool));
                r.correspondent_id = user + "c" + std::to_string(contact);
                week.push_back(std::move(r));
            }
            std::stable_sort(week.begin(), week.end(),
                             [](const CdrRecord& a, const CdrRecord& b) { return a.timestamp < b.timestamp; });
            for (const auto& r : week) out.cdr_lines.push_back(format_cdr_line(r));
        }
    }
    return out;
}

void write_synth_files(const SynthData& data, const std::string& cdr_path, const std::string& labels_path) {
    auto dump = [](const std::vector<std::string>& lines, const std::string& path) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw data_error("cannot open '" + path + "' for writing");
        for (const auto& l : lines) out << l << '\n';
        if (!out) throw data_error("write failure on '" + path + "'");
    };
    dump(data.cdr_lines, cdr_path);
    dump(data.label_lines, labels_path);
}

} // namespace cdrnet
