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

#include <chrono>
#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cdrnet/error.hpp"

namespace cdrnet {

enum class Direction { incoming, outgoing };
enum class EventKind { call, text };

/// Local wall-clock time, seconds resolution. No timezone is attached.
using Timestamp = std::chrono::sys_seconds;

struct CdrRecord {
    std::string user_id;
    Direction direction = Direction::outgoing;
    EventKind kind = EventKind::call;
    Timestamp timestamp{};
    std::int64_t duration_s = 0;
    std::string correspondent_id;

    bool operator==(const CdrRecord&) const = default;
};

struct LabelRecord {
    std::string user_id;
    std::string gender;
    int age_years = 0;

    bool operator==(const LabelRecord&) const = default;
};

struct Rejection {
    std::size_t line_number; // 1-based, counting the header
    std::string reason;
};

struct IngestReport {
    std::size_t records_accepted = 0;
    std::size_t records_rejected = 0;
    std::vector<Rejection> rejection_reasons;
};

/// Thrown by the line parsers; ingest() turns it into a Rejection.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what) : Error(ErrorKind::data, what) {}
};

inline constexpr std::string_view kCdrHeader =
    "user_id,direction,kind,timestamp,duration_s,correspondent_id";
inline constexpr std::string_view kLabelsHeader = "user_id,gender,age_years";
inline constexpr int kMaxAgeYears = 130;

/// Parses "YYYY-MM-DDThh:mm:ss".
Timestamp parse_timestamp(std::string_view text);
std::string format_timestamp(Timestamp ts);

CdrRecord parse_cdr_line(std::string_view line);
LabelRecord parse_labels_line(std::string_view line);

/// Canonical line form; parse_cdr_line(format_cdr_line(r)) == r.
std::string format_cdr_line(const CdrRecord& record);

/// Records keyed by user_id, each group sorted by timestamp.
using UserRecords = std::map<std::string, std::vector<CdrRecord>>;
using LabelMap = std::map<std::string, LabelRecord>;

struct CdrIngest {
    UserRecords groups;
    IngestReport report;
};

struct LabelIngest {
    LabelMap labels;
    IngestReport report;
};

/// Single pass over a CDR stream. A leading header row is skipped. Bad lines
/// are rejected and reported; only a stream read failure throws.
CdrIngest ingest_cdr(std::istream& in);

/// Single pass over a labels stream. Throws on a duplicate user_id.
LabelIngest ingest_labels(std::istream& in);

struct IngestResult {
    UserRecords groups;
    LabelMap labels;
    IngestReport cdr_report;
    IngestReport labels_report;
};

IngestResult ingest(std::istream& cdr, std::istream& labels);

/// JSON object with accepted/rejected counts and the rejection list.
std::string report_to_json(const IngestReport& report);

} // namespace cdrnet
