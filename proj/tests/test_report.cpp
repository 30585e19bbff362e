// Copyright 2026 The symrelax Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "symrelax/report.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

namespace symrelax {
namespace {

using nlohmann::json;

RunReport sample_verify() {
    RunReport r;
    r.command = "verify";
    r.network = "net.nnet";
    r.property = "p.json";
    r.config.threads = 4;
    r.config.seed = 7;
    r.config.simd = "avx2";
    r.started = "2026-01-01T00:00:00Z";
    r.finished = "2026-01-01T00:00:01Z";
    VerifyResult res;
    res.verdict = Verdict::Violated;
    res.counterexample = Counterexample{{0.1, 1.0 / 3.0}, {-2.5}};
    res.stats = {12, 5, 2, 1.5, 0.0123};
    r.result = res;
    return r;
}

TEST(Report, VerifyRoundTrip) {
    const auto r = sample_verify();
    EXPECT_EQ(parse_report(write_report(r)), r);
}

TEST(Report, BoundsRoundTripAndDerivedFields) {
    RunReport r;
    r.command = "bounds";
    r.network = "n.json";
    r.property = "p.json";
    r.config.mode = "all";
    r.started = r.finished = now_utc();
    r.bounds["nia"] = {{-1.0, 3.0}};
    r.bounds["slr"] = {{0.0, 2.0}};
    const auto text = write_report(r);
    EXPECT_EQ(parse_report(text), r);
    const auto doc = json::parse(text);
    EXPECT_DOUBLE_EQ(doc["improvement_percent"].get<double>(), 100.0);
    EXPECT_EQ(doc["widths"]["nia"][0].get<double>(), 4.0);
    EXPECT_FALSE(doc.contains("result"));
}

TEST(Report, ImprovementIsNullForZeroWidth) {
    EXPECT_FALSE(improvement_percent({{-1.0, 1.0}}, {{0.0, 0.0}}));
    RunReport r;
    r.command = "bounds";
    r.bounds["nia"] = {{-1.0, 1.0}};
    r.bounds["slr"] = {{0.0, 0.0}};
    EXPECT_TRUE(json::parse(write_report(r))["improvement_percent"].is_null());
}

TEST(Report, ToResultCopiesVerdict) {
    const auto res = to_result(VerdictReport::timeout({3, 2, 1, 1.0, 0.5}, "time limit"));
    EXPECT_EQ(res.verdict, Verdict::Timeout);
    EXPECT_EQ(res.detail, "time limit");
    EXPECT_FALSE(res.counterexample);
    EXPECT_EQ(res.stats.lp_calls, 3u);
}

struct Mutation {
    const char* name;
    void (*apply)(json&);
    const char* path;
};

class SchemaRejects : public ::testing::TestWithParam<Mutation> {};

TEST_P(SchemaRejects, NamesOffendingPath) {
    auto doc = json::parse(write_report(sample_verify()));
    GetParam().apply(doc);
    try {
        validate_report(doc.dump());
        FAIL() << "accepted";
    } catch (const ReportError& e) {
        EXPECT_NE(std::string(e.what()).find(GetParam().path), std::string::npos) << e.what();
    }
}

INSTANTIATE_TEST_SUITE_P(
    Mutations, SchemaRejects,
    ::testing::Values(Mutation{"version", [](json& d) { d["schema_version"] = 2; }, "$.schema_version"},
                      Mutation{"command", [](json& d) { d["command"] = "prove"; }, "$.command"},
                      Mutation{"extra", [](json& d) { d["extra"] = 1; }, "$.extra"},
                      Mutation{"threads", [](json& d) { d["config"]["threads"] = -1; }, "$.config.threads"},
                      Mutation{"verdict", [](json& d) { d["result"]["verdict"] = "maybe"; }, "$.result.verdict"},
                      Mutation{"no_witness", [](json& d) { d["result"]["counterexample"] = nullptr; },
                               "$.result.counterexample"},
                      Mutation{"stats", [](json& d) { d["result"]["stats"].erase("lp_calls"); },
                               "$.result.stats.lp_calls"},
                      Mutation{"bounds", [](json& d) { d["bounds"]["slr"] = {{2.0, 1.0}}; }, "$.bounds.slr[0]"},
                      Mutation{"mode", [](json& d) { d["bounds"]["fast"] = json::array(); }, "$.bounds.fast"}),
    [](const auto& info) { return std::string(info.param.name); });

TEST(Report, InvalidJsonRejected) { EXPECT_THROW(validate_report("{"), ReportError); }

// The published schema and the built-in validator must describe the same document.
TEST(ReportSchema, DocumentMatchesValidator) {
    std::ifstream in(SYMRELAX_SCHEMA);
    ASSERT_TRUE(in) << SYMRELAX_SCHEMA;
    std::stringstream ss;
    ss << in.rdbuf();
    const auto schema = json::parse(ss.str());
    const auto doc = json::parse(write_report(sample_verify()));
    const auto& props = schema["properties"];
    for (auto it = doc.begin(); it != doc.end(); ++it) EXPECT_TRUE(props.contains(it.key())) << it.key();
    for (const auto& k : schema["required"]) EXPECT_TRUE(doc.contains(k.get<std::string>())) << k;
    for (const char* section : {"config", "inputs", "timestamps"}) {
        const auto& s = props[section];
        EXPECT_EQ(s["required"].size(), doc[section].size()) << section;
        for (const auto& k : s["required"]) EXPECT_TRUE(doc[section].contains(k.get<std::string>())) << k;
    }
    const auto& stats = props["result"]["properties"]["stats"];
    EXPECT_EQ(stats["required"].size(), doc["result"]["stats"].size());
    EXPECT_EQ(props["result"]["properties"]["verdict"]["enum"].size(), 4u);
}

}  // namespace
}  // namespace symrelax
