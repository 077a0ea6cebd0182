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
#include "cdrnet/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "json.hpp"

namespace cdrnet {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

template <typename Int>
bool parse_int(std::string_view text, Int& out) {
    if (text.empty()) return false;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    return ec == std::errc{} && ptr == text.data() + text.size();
}

bool parse_fixed_digits(std::string_view text, int& out) {
    if (text.empty()) return false;
    for (char c : text)
        if (c < '0' || c > '9') return false;
    return parse_int(text, out);
}

bool is_header(std::string_view line, std::string_view header) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line == header;
}

} // namespace

Timestamp parse_timestamp(std::string_view text) {
    // YYYY-MM-DDThh:mm:ss
    if (text.size() != 19 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || text[16] != ':')
        throw ParseError("unparseable timestamp '" + std::string(text) + "'");
    int y, mo, d, h, mi, s;
    if (!parse_fixed_digits(text.substr(0, 4), y) || !parse_fixed_digits(text.substr(5, 2), mo) ||
        !parse_fixed_digits(text.substr(8, 2), d) || !parse_fixed_digits(text.substr(11, 2), h) ||
        !parse_fixed_digits(text.substr(14, 2), mi) || !parse_fixed_digits(text.substr(17, 2), s))
        throw ParseError("unparseable timestamp '" + std::string(text) + "'");
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || s > 59)
        throw ParseError("unparseable timestamp '" + std::string(text) + "' (out of range)");
    return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_timestamp(Timestamp ts) {
    using namespace std::chrono;
    const auto day_start = floor<days>(ts);
    const year_month_day ymd{day_start};
    const hh_mm_ss hms{ts - day_start};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

CdrRecord parse_cdr_line(std::string_view line) {
    const auto f = split_fields(line);
    if (f.size() != 6)
        throw ParseError("malformed row: expected 6 fields, got " + std::to_string(f.size()));

    CdrRecord r;
    if (f[0].empty()) throw ParseError("empty user_id");
    r.user_id = f[0];

    if (f[1] == "in")
        r.direction = Direction::incoming;
    else if (f[1] == "out")
        r.direction = Direction::outgoing;
    else
        throw ParseError("unknown direction '" + std::string(f[1]) + "'");

    if (f[2] == "call")
        r.kind = EventKind::call;
    else if (f[2] == "text")
        r.kind = EventKind::text;
    else
        throw ParseError("unknown kind '" + std::string(f[2]) + "'");

    r.timestamp = parse_timestamp(f[3]);

    if (!parse_int(f[4], r.duration_s))
        throw ParseError("unparseable duration '" + std::string(f[4]) + "'");
    if (r.duration_s < 0) throw ParseError("negative duration");
    if (r.kind == EventKind::text && r.duration_s != 0)
        throw ParseError("text with nonzero duration");

    if (f[5].empty()) throw ParseError("empty correspondent_id");
    r.correspondent_id = f[5];
    return r;
}

LabelRecord parse_labels_line(std::string_view line) {
    const auto f = split_fields(line);
    if (f.size() != 3 || f[1].empty() || f[2].empty())
        throw ParseError("malformed row: expected user_id,gender,age_years");
    if (f[0].empty()) throw ParseError("empty user_id");
    LabelRecord r{std::string(f[0]), std::string(f[1]), 0};
    if (!parse_int(f[2], r.age_years))
        throw ParseError("unparseable age '" + std::string(f[2]) + "'");
    if (r.age_years < 0 || r.age_years > kMaxAgeYears)
        throw ParseError("age out of range [0," + std::to_string(kMaxAgeYears) + "]");
    return r;
}

std::string format_cdr_line(const CdrRecord& r) {
    std::string out = r.user_id;
    out += r.direction == Direction::incoming ? ",in," : ",out,";
    out += r.kind == EventKind::call ? "call," : "text,";
    out += format_timestamp(r.timestamp);
    out += ',';
    out += std::to_string(r.duration_s);
    out += ',';
    out += r.correspondent_id;
    return out;
}

CdrIngest ingest_cdr(std::istream& in) {
    CdrIngest out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && is_header(line, kCdrHeader)) continue;
        try {
            auto rec = parse_cdr_line(line);
            out.groups[rec.user_id].push_back(std::move(rec));
            ++out.report.records_accepted;
        } catch (const ParseError& e) {
            ++out.report.records_rejected;
            out.report.rejection_reasons.push_back({line_no, e.what()});
        }
    }
    if (in.bad()) throw data_error("CDR stream read failure at line " + std::to_string(line_no + 1));

    for (auto& [user, records] : out.groups)
        std::stable_sort(records.begin(), records.end(),
                         [](const CdrRecord& a, const CdrRecord& b) { return a.timestamp < b.timestamp; });
    return out;
}

LabelIngest ingest_labels(std::istream& in) {
    LabelIngest out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && is_header(line, kLabelsHeader)) continue;
        LabelRecord rec;
        try {
            rec = parse_labels_line(line);
        } catch (const ParseError& e) {
            ++out.report.records_rejected;
            out.report.rejection_reasons.push_back({line_no, e.what()});
            continue;
        }
        if (out.labels.contains(rec.user_id))
            throw data_error("duplicate label for user '" + rec.user_id + "' at line " +
                             std::to_string(line_no));
        out.labels.emplace(rec.user_id, std::move(rec));
        ++out.report.records_accepted;
    }
    if (in.bad()) throw data_error("labels stream read failure at line " + std::to_string(line_no + 1));
    return out;
}

IngestResult ingest(std::istream& cdr, std::istream& labels) {
    auto c = ingest_cdr(cdr);
    auto l = ingest_labels(labels);
    return {std::move(c.groups), std::move(l.labels), std::move(c.report), std::move(l.report)};
}

std::string report_to_json(const IngestReport& report) {
    nlohmann::json j;
    j["records_accepted"] = report.records_accepted;
    j["records_rejected"] = report.records_rejected;
    auto& reasons = j["rejection_reasons"] = nlohmann::json::array();
    for (const auto& r : report.rejection_reasons)
        reasons.push_back({{"line", r.line_number}, {"reason", r.reason}});
    return j.dump();
}

} // namespace cdrnet
