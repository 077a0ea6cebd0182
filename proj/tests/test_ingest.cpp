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
#include <algorithm>
#include <random>
#include <sstream>

#include "cdrnet/ingest.hpp"
#include "doctest.h"
#include "json.hpp"
#include "support.hpp"

using namespace cdrnet;
using namespace std::chrono;

namespace {

std::string reason_of(std::string_view line, bool labels = false) {
    try {
        if (labels)
            parse_labels_line(line);
        else
            parse_cdr_line(line);
    } catch (const ParseError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_SUITE("ingest") {

TEST_CASE("parse_cdr_line maps every field") {
    const auto r = parse_cdr_line("u1,out,call,2024-01-02T14:30:00,120,c9");
    CHECK(r.user_id == "u1");
    CHECK(r.direction == Direction::outgoing);
    CHECK(r.kind == EventKind::call);
    CHECK(r.timestamp == sys_days{2024y / 1 / 2} + 14h + 30min);
    CHECK(r.duration_s == 120);
    CHECK(r.correspondent_id == "c9");
}

TEST_CASE("parse_cdr_line rejections") {
    CHECK(reason_of("u1,sideways,call,2024-01-02T14:30:00,120,c9").find("unknown direction") != std::string::npos);
    CHECK(reason_of("u1,in,text,2024-01-02T14:30:00,5,c9").find("text with nonzero duration") != std::string::npos);
    CHECK(reason_of("u1,in,call,2024-01-02T14:30:00,120").find("malformed") != std::string::npos);
    CHECK(reason_of("u1,in,call,2024-01-02T14:30:00,120,c9,x").find("malformed") != std::string::npos);
    CHECK(reason_of("u1,in,fax,2024-01-02T14:30:00,120,c9").find("unknown kind") != std::string::npos);
    CHECK(reason_of("u1,in,call,2024-01-02 14:30:00,120,c9").find("timestamp") != std::string::npos);
    CHECK(reason_of("u1,in,call,2024-02-30T14:30:00,120,c9").find("timestamp") != std::string::npos);
    CHECK(reason_of("u1,in,call,2024-01-02T24:00:00,120,c9").find("timestamp") != std::string::npos);
    CHECK(reason_of("u1,in,call,2024-01-02T14:30:00,-1,c9").find("negative duration") != std::string::npos);
    CHECK(reason_of("u1,in,call,2024-01-02T14:30:00,1.5,c9").find("duration") != std::string::npos);
    CHECK(reason_of(",in,call,2024-01-02T14:30:00,1,c9").find("user_id") != std::string::npos);
    CHECK(reason_of("u1,in,call,2024-01-02T14:30:00,1,").find("correspondent") != std::string::npos);
    CHECK(reason_of("").find("malformed") != std::string::npos);
}

TEST_CASE("texts with zero duration and CRLF endings parse") {
    const auto r = parse_cdr_line("u1,in,text,2024-01-02T00:00:00,0,c1\r");
    CHECK(r.kind == EventKind::text);
    CHECK(r.direction == Direction::incoming);
    CHECK(r.correspondent_id == "c1");
}

TEST_CASE("parse_labels_line") {
    CHECK(parse_labels_line("u1,f,34") == LabelRecord{"u1", "f", 34});
    CHECK(parse_labels_line("u1,m,0").age_years == 0);
    CHECK(parse_labels_line("u1,m,130").age_years == 130);
    CHECK(reason_of("u2,m,131", true).find("age out of range") != std::string::npos);
    CHECK(reason_of("u2,m,-1", true).find("age out of range") != std::string::npos);
    CHECK(reason_of("u3,f,", true).find("malformed row") != std::string::npos);
    CHECK(reason_of("u3,,30", true).find("malformed row") != std::string::npos);
    CHECK(reason_of("u3,f", true).find("malformed row") != std::string::npos);
    CHECK(reason_of(",f,30", true).find("user_id") != std::string::npos);
    CHECK(reason_of("u3,f,3x", true).find("age") != std::string::npos);
}

TEST_CASE("ingest counts good and bad lines") {
    std::istringstream cdr(std::string(kCdrHeader) +
                           "\n"
                           "u1,out,call,2024-01-02T14:30:00,120,c9\n"
                           "u1,in,text,2024-01-02T15:00:00,0,c2\n"
                           "garbage\n"
                           "u1,out,call,2024-01-01T08:00:00,30,c3\n");
    std::istringstream labels(std::string(kLabelsHeader) + "\nu1,f,34\n");
    const auto res = ingest(cdr, labels);
    REQUIRE(res.groups.count("u1") == 1);
    CHECK(res.groups.at("u1").size() == 3);
    CHECK(res.cdr_report.records_accepted == 3);
    CHECK(res.cdr_report.records_rejected == 1);
    REQUIRE(res.cdr_report.rejection_reasons.size() == 1);
    CHECK(res.cdr_report.rejection_reasons[0].line_number == 4);
    CHECK(res.labels.at("u1").gender == "f");
    CHECK(res.labels_report.records_accepted == 1);
}

TEST_CASE("empty CDR stream") {
    std::istringstream empty;
    const auto res = ingest_cdr(empty);
    CHECK(res.groups.empty());
    CHECK(res.report.records_accepted == 0);
    CHECK(res.report.records_rejected == 0);
}

TEST_CASE("header only when it is the first line") {
    std::istringstream no_header("u1,out,call,2024-01-02T14:30:00,120,c9\n");
    CHECK(ingest_cdr(no_header).report.records_accepted == 1);
    std::istringstream late_header("u1,out,call,2024-01-02T14:30:00,120,c9\n" + std::string(kCdrHeader) + "\n");
    const auto res = ingest_cdr(late_header);
    CHECK(res.report.records_accepted == 1);
    CHECK(res.report.records_rejected == 1);
}

TEST_CASE("duplicate labels are an error") {
    std::istringstream labels(std::string(kLabelsHeader) + "\nu1,f,34\nu2,m,40\nu1,f,35\n");
    CHECK_THROWS_AS(ingest_labels(labels), Error);
    std::istringstream again(std::string(kLabelsHeader) + "\nu1,f,34\nu1,f,34\n");
    try {
        ingest_labels(again);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::data);
        CHECK(std::string(e.what()).find("duplicate") != std::string::npos);
    }
}

TEST_CASE("bad label lines are reported, not fatal") {
    std::istringstream labels(std::string(kLabelsHeader) + "\nu1,f,34\nu2,m,131\nu3,f,\n");
    const auto res = ingest_labels(labels);
    CHECK(res.labels.size() == 1);
    CHECK(res.report.records_rejected == 2);
}

TEST_CASE("parsing is total and grouping keeps multiplicity, sorted by time") {
    std::mt19937_64 gen(11);
    const WeekId week{sys_days{2024y / 3 / 4}};
    std::vector<std::string> lines{std::string(kCdrHeader)};
    std::size_t good = 0;
    std::uniform_int_distribution<int> pick(0, 9), user(0, 4);
    for (const auto& r : testing::random_week_records(gen, 2000, week)) {
        auto rec = r;
        rec.user_id = "u" + std::to_string(user(gen));
        std::string line = format_cdr_line(rec);
        if (pick(gen) == 0) {
            line.insert(line.begin() + static_cast<long>(line.size() / 2), '#');
        } else {
            ++good;
        }
        lines.push_back(line);
    }
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    std::istringstream in(text);
    const auto res = ingest_cdr(in);
    const auto& rep = res.report;
    CHECK(rep.records_accepted + rep.records_rejected == lines.size() - 1);
    CHECK(rep.rejection_reasons.size() == rep.records_rejected);
    // A '#' in the middle of a line can land inside the correspondent token,
    // which stays valid; every other corruption must be rejected.
    CHECK(rep.records_accepted >= good);
    std::size_t total = 0;
    for (const auto& [id, recs] : res.groups) {
        total += recs.size();
        CHECK(std::is_sorted(recs.begin(), recs.end(),
                             [](const CdrRecord& a, const CdrRecord& b) { return a.timestamp < b.timestamp; }));
        for (const auto& r : recs) CHECK(r.user_id == id);
    }
    CHECK(total == rep.records_accepted);
}

TEST_CASE("format then parse is the identity") {
    std::mt19937_64 gen(5);
    const WeekId week{sys_days{2023y / 12 / 25}};
    for (const auto& r : testing::random_week_records(gen, 500, week)) CHECK(parse_cdr_line(format_cdr_line(r)) == r);
    CHECK(format_timestamp(parse_timestamp("1999-12-31T23:59:59")) == "1999-12-31T23:59:59");
}

TEST_CASE("report json") {
    IngestReport rep{2, 1, {{3, "bad"}}};
    const auto j = nlohmann::json::parse(report_to_json(rep));
    CHECK(j["records_accepted"] == 2);
    CHECK(j["records_rejected"] == 1);
    CHECK(j["rejection_reasons"][0]["line"] == 3);
    CHECK(j["rejection_reasons"][0]["reason"] == "bad");
}

}
