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
#ifndef CDRNET_TESTS_SUPPORT_HPP
#define CDRNET_TESTS_SUPPORT_HPP

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>
#include <vector>

#include "cdrnet/featurize.hpp"
#include "cdrnet/ingest.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("cdrnet_" + tag + "_" + std::to_string(std::random_device{}()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline std::vector<char> slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

// Random records, all inside the week starting at `week`.
inline std::vector<cdrnet::CdrRecord> random_week_records(std::mt19937_64& gen, std::size_t n,
                                                          cdrnet::WeekId week, int contacts = 12) {
    std::uniform_int_distribution<int> second(0, 7 * 86400 - 1), coin(0, 1), contact(0, contacts - 1);
    std::uniform_int_distribution<int> dur(0, 3600);
    std::vector<cdrnet::CdrRecord> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        cdrnet::CdrRecord r;
        r.user_id = "u";
        r.direction = coin(gen) ? cdrnet::Direction::incoming : cdrnet::Direction::outgoing;
        r.kind = coin(gen) ? cdrnet::EventKind::text : cdrnet::EventKind::call;
        r.timestamp = cdrnet::Timestamp{week.start} + std::chrono::seconds{second(gen)};
        r.duration_s = r.kind == cdrnet::EventKind::call ? dur(gen) : 0;
        r.correspondent_id = "c" + std::to_string(contact(gen));
        out.push_back(std::move(r));
    }
    return out;
}

} // namespace testing

#endif
