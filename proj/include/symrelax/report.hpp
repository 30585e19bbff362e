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

#pragma once

// Machine-readable run reports written by the command-line tool.

#include "symrelax/engine.hpp"
#include "symrelax/interval.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace symrelax {

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int kReportSchemaVersion = 1;

struct ConfigEcho {
    double timeout_seconds = 3600.0;
    std::size_t threads = 1;
    std::size_t max_depth = 0;
    std::optional<std::uint64_t> seed;
    std::string mode;  // bounds mode, empty for other commands
    std::size_t oracle_limit = 0;
    std::string simd;

    friend bool operator==(const ConfigEcho&, const ConfigEcho&) = default;
};

struct VerifyResult {
    Verdict verdict = Verdict::Safe;
    std::string detail;
    std::optional<Counterexample> counterexample;
    VerifyStats stats;

    friend bool operator==(const VerifyResult&, const VerifyResult&) = default;
};

struct RunReport {
    std::string command;  // verify | bounds | oracle
    std::string network;
    std::string property;
    ConfigEcho config;
    std::string started;   // ISO-8601 UTC
    std::string finished;
    std::optional<VerifyResult> result;
    // Keyed by mode: nia, sia, slr, exact.
    std::map<std::string, std::vector<ConcreteInterval>> bounds;
    std::optional<std::size_t> feasible_patterns;

    friend bool operator==(const RunReport&, const RunReport&) = default;
};

std::vector<double> widths(const std::vector<ConcreteInterval>& ranges);

// (sum NIA width / sum SLR width - 1) * 100; nullopt when the SLR width is zero.
std::optional<double> improvement_percent(const std::vector<ConcreteInterval>& nia,
                                          const std::vector<ConcreteInterval>& slr);

std::string now_utc();

VerifyResult to_result(const VerdictReport& report);

std::string write_report(const RunReport& report);
// Validates against the report schema, then decodes. Throws ReportError.
RunReport parse_report(std::string_view text);
// Throws ReportError naming the first offending JSON path.
void validate_report(std::string_view text);

}  // namespace symrelax
