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

#include <json.hpp>

#include <chrono>
#include <ctime>

namespace symrelax {

using nlohmann::json;

std::vector<double> widths(const std::vector<ConcreteInterval>& ranges) {
    std::vector<double> w;
    w.reserve(ranges.size());
    for (const auto& r : ranges) w.push_back(r.width());
    return w;
}

std::optional<double> improvement_percent(const std::vector<ConcreteInterval>& nia,
                                          const std::vector<ConcreteInterval>& slr) {
    double a = 0.0;
    double b = 0.0;
    for (const auto& r : nia) a += r.width();
    for (const auto& r : slr) b += r.width();
    if (!(b > 0.0)) return std::nullopt;
    return (a / b - 1.0) * 100.0;
}

std::string now_utc() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

VerifyResult to_result(const VerdictReport& report) {
    return {report.verdict(), report.detail(), report.counterexample(), report.stats()};
}

namespace {

json ranges_json(const std::vector<ConcreteInterval>& ranges) {
    json a = json::array();
    for (const auto& r : ranges) a.push_back({r.lo, r.hi});
    return a;
}

Verdict verdict_from(const std::string& s) {
    for (auto v : {Verdict::Safe, Verdict::Violated, Verdict::Timeout, Verdict::SolverFailure}) {
        if (s == to_string(v)) return v;
    }
    throw ReportError("report: unknown verdict '" + s + "'");
}

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ReportError("report schema: " + path + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
    if (!obj.contains(key)) bad(path + "." + key, "missing");
    return obj.at(key);
}

void expect_string(const json& j, const std::string& path) {
    if (!j.is_string()) bad(path, "expected a string");
}

void expect_count(const json& j, const std::string& path) {
    if (!j.is_number_unsigned()) bad(path, "expected a non-negative integer");
}

void expect_number(const json& j, const std::string& path) {
    if (!j.is_number()) bad(path, "expected a number");
}

void expect_numbers(const json& j, const std::string& path) {
    if (!j.is_array()) bad(path, "expected an array");
    for (std::size_t i = 0; i < j.size(); ++i) expect_number(j[i], path + "[" + std::to_string(i) + "]");
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path) {
    if (!obj.is_object()) bad(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed) ok = ok || it.key() == k;
        if (!ok) bad(path + "." + it.key(), "unknown field");
    }
}

void validate(const json& doc) {
    check_keys(doc, {"schema_version", "command", "inputs", "config", "timestamps", "result", "bounds", "widths",
                     "improvement_percent", "oracle"},
               "$");
    const auto& version = require(doc, "schema_version", "$");
    if (!version.is_number_integer() || version.get<int>() != kReportSchemaVersion) bad("$.schema_version", "unsupported");
    const auto& command = require(doc, "command", "$");
    expect_string(command, "$.command");
    const auto cmd = command.get<std::string>();
    if (cmd != "verify" && cmd != "bounds" && cmd != "oracle") bad("$.command", "unknown command '" + cmd + "'");

    const auto& inputs = require(doc, "inputs", "$");
    check_keys(inputs, {"network", "property"}, "$.inputs");
    expect_string(require(inputs, "network", "$.inputs"), "$.inputs.network");
    expect_string(require(inputs, "property", "$.inputs"), "$.inputs.property");

    const auto& config = require(doc, "config", "$");
    check_keys(config, {"timeout_seconds", "threads", "max_depth", "seed", "mode", "oracle_limit", "simd"}, "$.config");
    expect_number(require(config, "timeout_seconds", "$.config"), "$.config.timeout_seconds");
    expect_count(require(config, "threads", "$.config"), "$.config.threads");
    expect_count(require(config, "max_depth", "$.config"), "$.config.max_depth");
    const auto& seed = require(config, "seed", "$.config");
    if (!seed.is_null()) expect_count(seed, "$.config.seed");
    expect_string(require(config, "mode", "$.config"), "$.config.mode");
    expect_count(require(config, "oracle_limit", "$.config"), "$.config.oracle_limit");
    expect_string(require(config, "simd", "$.config"), "$.config.simd");

    const auto& ts = require(doc, "timestamps", "$");
    check_keys(ts, {"started", "finished"}, "$.timestamps");
    expect_string(require(ts, "started", "$.timestamps"), "$.timestamps.started");
    expect_string(require(ts, "finished", "$.timestamps"), "$.timestamps.finished");

    if (doc.contains("result")) {
        const auto& r = doc["result"];
        check_keys(r, {"verdict", "detail", "counterexample", "stats"}, "$.result");
        const auto& v = require(r, "verdict", "$.result");
        expect_string(v, "$.result.verdict");
        try {
            verdict_from(v.get<std::string>());
        } catch (const ReportError&) {
            bad("$.result.verdict", "unknown verdict");
        }
        expect_string(require(r, "detail", "$.result"), "$.result.detail");
        const auto& ce = require(r, "counterexample", "$.result");
        if (!ce.is_null()) {
            check_keys(ce, {"witness", "outputs"}, "$.result.counterexample");
            expect_numbers(require(ce, "witness", "$.result.counterexample"), "$.result.counterexample.witness");
            expect_numbers(require(ce, "outputs", "$.result.counterexample"), "$.result.counterexample.outputs");
        }
        if ((v == "violated") != !ce.is_null()) bad("$.result.counterexample", "present iff the verdict is violated");
        const auto& st = require(r, "stats", "$.result");
        check_keys(st, {"lp_calls", "tasks_explored", "max_depth", "avg_depth", "wall_time"}, "$.result.stats");
        expect_count(require(st, "lp_calls", "$.result.stats"), "$.result.stats.lp_calls");
        expect_count(require(st, "tasks_explored", "$.result.stats"), "$.result.stats.tasks_explored");
        expect_count(require(st, "max_depth", "$.result.stats"), "$.result.stats.max_depth");
        expect_number(require(st, "avg_depth", "$.result.stats"), "$.result.stats.avg_depth");
        expect_number(require(st, "wall_time", "$.result.stats"), "$.result.stats.wall_time");
    }
    if (doc.contains("bounds")) {
        const auto& b = doc["bounds"];
        check_keys(b, {"nia", "sia", "slr", "exact"}, "$.bounds");
        for (auto it = b.begin(); it != b.end(); ++it) {
            const std::string p = "$.bounds." + it.key();
            if (!it->is_array()) bad(p, "expected an array of [lo, hi] pairs");
            for (std::size_t i = 0; i < it->size(); ++i) {
                const auto& pair = (*it)[i];
                const std::string pp = p + "[" + std::to_string(i) + "]";
                if (!pair.is_array() || pair.size() != 2) bad(pp, "expected [lo, hi]");
                expect_number(pair[0], pp + "[0]");
                expect_number(pair[1], pp + "[1]");
                if (pair[0].get<double>() > pair[1].get<double>()) bad(pp, "lo exceeds hi");
            }
        }
    }
    if (doc.contains("widths")) {
        check_keys(doc["widths"], {"nia", "sia", "slr", "exact"}, "$.widths");
        for (auto it = doc["widths"].begin(); it != doc["widths"].end(); ++it) expect_numbers(*it, "$.widths." + it.key());
    }
    if (doc.contains("improvement_percent") && !doc["improvement_percent"].is_null()) {
        expect_number(doc["improvement_percent"], "$.improvement_percent");
    }
    if (doc.contains("oracle")) {
        check_keys(doc["oracle"], {"feasible_patterns"}, "$.oracle");
        expect_count(require(doc["oracle"], "feasible_patterns", "$.oracle"), "$.oracle.feasible_patterns");
    }
}

}  // namespace

std::string write_report(const RunReport& r) {
    json doc;
    doc["schema_version"] = kReportSchemaVersion;
    doc["command"] = r.command;
    doc["inputs"] = {{"network", r.network}, {"property", r.property}};
    doc["config"] = {{"timeout_seconds", r.config.timeout_seconds},
                     {"threads", r.config.threads},
                     {"max_depth", r.config.max_depth},
                     {"seed", r.config.seed ? json(*r.config.seed) : json(nullptr)},
                     {"mode", r.config.mode},
                     {"oracle_limit", r.config.oracle_limit},
                     {"simd", r.config.simd}};
    doc["timestamps"] = {{"started", r.started}, {"finished", r.finished}};
    if (r.result) {
        const auto& res = *r.result;
        json ce = nullptr;
        if (res.counterexample) ce = {{"witness", res.counterexample->witness}, {"outputs", res.counterexample->outputs}};
        doc["result"] = {{"verdict", to_string(res.verdict)},
                         {"detail", res.detail},
                         {"counterexample", ce},
                         {"stats",
                          {{"lp_calls", res.stats.lp_calls},
                           {"tasks_explored", res.stats.tasks_explored},
                           {"max_depth", res.stats.max_depth},
                           {"avg_depth", res.stats.avg_depth},
                           {"wall_time", res.stats.wall_time}}}};
    }
    if (!r.bounds.empty()) {
        for (const auto& [mode, ranges] : r.bounds) {
            doc["bounds"][mode] = ranges_json(ranges);
            doc["widths"][mode] = widths(ranges);
        }
        const auto nia = r.bounds.find("nia");
        const auto slr = r.bounds.find("slr");
        if (nia != r.bounds.end() && slr != r.bounds.end()) {
            const auto pct = improvement_percent(nia->second, slr->second);
            doc["improvement_percent"] = pct ? json(*pct) : json(nullptr);
        }
    }
    if (r.feasible_patterns) doc["oracle"] = {{"feasible_patterns", *r.feasible_patterns}};
    validate(doc);
    return doc.dump(2);
}

void validate_report(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ReportError(std::string("report: invalid JSON: ") + e.what());
    }
    validate(doc);
}

RunReport parse_report(std::string_view text) {
    validate_report(text);
    const json doc = json::parse(text);
    RunReport r;
    r.command = doc["command"].get<std::string>();
    r.network = doc["inputs"]["network"].get<std::string>();
    r.property = doc["inputs"]["property"].get<std::string>();
    const auto& c = doc["config"];
    r.config.timeout_seconds = c["timeout_seconds"].get<double>();
    r.config.threads = c["threads"].get<std::size_t>();
    r.config.max_depth = c["max_depth"].get<std::size_t>();
    if (!c["seed"].is_null()) r.config.seed = c["seed"].get<std::uint64_t>();
    r.config.mode = c["mode"].get<std::string>();
    r.config.oracle_limit = c["oracle_limit"].get<std::size_t>();
    r.config.simd = c["simd"].get<std::string>();
    r.started = doc["timestamps"]["started"].get<std::string>();
    r.finished = doc["timestamps"]["finished"].get<std::string>();
    if (doc.contains("result")) {
        const auto& j = doc["result"];
        VerifyResult res;
        res.verdict = verdict_from(j["verdict"].get<std::string>());
        res.detail = j["detail"].get<std::string>();
        if (!j["counterexample"].is_null()) {
            res.counterexample = Counterexample{j["counterexample"]["witness"].get<std::vector<double>>(),
                                                j["counterexample"]["outputs"].get<std::vector<double>>()};
        }
        const auto& s = j["stats"];
        res.stats.lp_calls = s["lp_calls"].get<std::size_t>();
        res.stats.tasks_explored = s["tasks_explored"].get<std::size_t>();
        res.stats.max_depth = s["max_depth"].get<std::size_t>();
        res.stats.avg_depth = s["avg_depth"].get<double>();
        res.stats.wall_time = s["wall_time"].get<double>();
        r.result = std::move(res);
    }
    if (doc.contains("bounds")) {
        for (auto it = doc["bounds"].begin(); it != doc["bounds"].end(); ++it) {
            std::vector<ConcreteInterval> ranges;
            for (const auto& p : *it) ranges.push_back({p[0].get<double>(), p[1].get<double>()});
            r.bounds[it.key()] = std::move(ranges);
        }
    }
    if (doc.contains("oracle")) r.feasible_patterns = doc["oracle"]["feasible_patterns"].get<std::size_t>();
    return r;
}

}  // namespace symrelax
