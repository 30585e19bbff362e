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

// symrelax: verify properties, compare bound propagators and enumerate exact
// output ranges from the command line.

#include "symrelax/engine.hpp"
#include "symrelax/network.hpp"
#include "symrelax/propagation.hpp"
#include "symrelax/property.hpp"
#include "symrelax/report.hpp"
#include "symrelax/simd/kernels.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <thread>

namespace {

using namespace symrelax;

// Exit codes. 0-3 mirror the verdict; usage and input errors follow sysexits.
constexpr int kExitSafe = 0;
constexpr int kExitViolated = 1;
constexpr int kExitTimeout = 2;
constexpr int kExitSolverFailure = 3;
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoInput = 66;
constexpr int kExitSoftware = 70;

struct Options {
    std::string network;
    std::string property;
    double timeout = 3600.0;
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());
    std::size_t max_depth = 0;
    std::optional<std::uint64_t> seed;
    std::string mode = "all";
    std::size_t limit = ExactRangeOptions{}.relu_limit;
};

struct Loaded {
    Network net;
    std::optional<PropertySpec> spec;
    InputRegion region;  // normalized space
};

InputRegion prepare_region(const Network& net, const PropertySpec& spec) {
    InputRegion region = spec.region;
    if (!spec.normalized && net.normalization()) region = normalize_region(region, *net.normalization());
    if (region_dim(region) != net.input_dim()) {
        throw PropertyError("property region has " + std::to_string(region_dim(region)) + " inputs, network has " +
                            std::to_string(net.input_dim()));
    }
    return region;
}

Loaded load(const Options& o, bool property_required) {
    Network net = load_network(o.network);
    std::optional<PropertySpec> spec;
    InputRegion region;
    if (!o.property.empty()) {
        spec = parse_property(read_file(o.property));
        region = prepare_region(net, *spec);
    } else if (property_required) {
        throw CLI::RequiredError("--property");
    } else if (net.normalization() && net.normalization()->input_min.size() == net.input_dim()) {
        const auto& n = *net.normalization();
        region = normalize_region(BoxRegion{n.input_min, n.input_max}, n);
    } else {
        throw PropertyError("no --property given and the network carries no input range");
    }
    return {std::move(net), std::move(spec), std::move(region)};
}

RunReport base_report(const std::string& command, const Options& o) {
    RunReport r;
    r.command = command;
    r.network = o.network;
    r.property = o.property;
    r.config.timeout_seconds = o.timeout;
    r.config.threads = o.threads;
    r.config.max_depth = o.max_depth;
    r.config.seed = o.seed;
    r.config.simd = std::string(simd::active().name);
    r.started = now_utc();
    return r;
}

int emit(RunReport& r) {
    r.finished = now_utc();
    std::cout << write_report(r) << '\n';
    return 0;
}

int cmd_verify(const Options& o) {
    RunReport report = base_report("verify", o);
    Loaded in = load(o, true);
    EngineConfig cfg;
    cfg.timeout_seconds = o.timeout;
    cfg.workers = o.threads;
    cfg.max_depth = o.max_depth;
    const VerdictReport v = verify(in.net, in.region, in.spec->property, cfg);
    report.result = to_result(v);
    emit(report);
    std::cerr << "verdict: " << to_string(v.verdict()) << " (tasks " << v.stats().tasks_explored << ", max depth "
              << v.stats().max_depth << ", LP calls " << v.stats().lp_calls << ")\n";
    if (const auto& ce = v.counterexample()) {
        std::cerr << "witness:";
        for (double x : ce->witness) std::cerr << ' ' << x;
        std::cerr << '\n';
    }
    switch (v.verdict()) {
        case Verdict::Safe:
            return kExitSafe;
        case Verdict::Violated:
            return kExitViolated;
        case Verdict::Timeout:
            return kExitTimeout;
        case Verdict::SolverFailure:
            return kExitSolverFailure;
    }
    return kExitSoftware;
}

int cmd_bounds(const Options& o) {
    RunReport report = base_report("bounds", o);
    report.config.mode = o.mode;
    Loaded in = load(o, true);
    const InputBox box = region_to_box(in.region).box;
    const bool all = o.mode == "all";
    if (all || o.mode == "nia") report.bounds["nia"] = nia_forward(in.net, box);
    if (all || o.mode == "sia") report.bounds["sia"] = sia_forward(in.net, box).output_ranges();
    if (all || o.mode == "slr") report.bounds["slr"] = slr_forward(in.net, box).output_ranges();
    emit(report);
    for (const auto& [mode, ranges] : report.bounds) {
        std::cerr << mode << " widths:";
        for (double w : widths(ranges)) std::cerr << ' ' << w;
        std::cerr << '\n';
    }
    if (all) {
        const auto pct = improvement_percent(report.bounds["nia"], report.bounds["slr"]);
        std::cerr << "NIA/SLR improvement: " << (pct ? std::to_string(*pct) + "%" : std::string("inf")) << '\n';
    }
    return 0;
}

int cmd_oracle(const Options& o) {
    RunReport report = base_report("oracle", o);
    report.config.oracle_limit = o.limit;
    Loaded in = load(o, false);
    const InputBox box = region_to_box(in.region).box;
    const ExactRange exact = exact_output_range(in.net, box, {o.limit});
    report.bounds["exact"] = exact.outputs;
    report.feasible_patterns = exact.feasible_patterns;
    emit(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verify safety properties of ReLU networks with symbolic linear relaxation and LP refinement"};
    app.require_subcommand(1);
    Options o;

    auto* verify_cmd = app.add_subcommand("verify", "Prove or refute a property; prints a JSON report");
    verify_cmd->add_option("--network", o.network, "Network file (.nnet or .json)")->required();
    verify_cmd->add_option("--property", o.property, "Property JSON file")->required();
    verify_cmd->add_option("--timeout", o.timeout, "Time limit in seconds")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber);
    verify_cmd->add_option("--max-depth", o.max_depth, "Split depth limit (0 = number of ReLUs)");
    verify_cmd->add_option("--seed", o.seed, "Recorded in the report; verification is deterministic");

    auto* bounds_cmd = app.add_subcommand("bounds", "Compare NIA, SIA and SLR output bounds on a property region");
    bounds_cmd->add_option("--network", o.network, "Network file (.nnet or .json)")->required();
    bounds_cmd->add_option("--property", o.property, "Property JSON file (region only)")->required();
    bounds_cmd->add_option("--mode", o.mode, "all | nia | sia | slr")
        ->check(CLI::IsMember({"all", "nia", "sia", "slr"}));

    auto* oracle_cmd = app.add_subcommand("oracle", "Exact output range by activation-pattern enumeration");
    oracle_cmd->add_option("--network", o.network, "Network file (.nnet or .json)")->required();
    oracle_cmd->add_option("--property", o.property, "Property JSON file (region only); defaults to the input range");
    oracle_cmd->add_option("--limit", o.limit, "Refuse networks with more ReLUs than this");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    try {
        if (verify_cmd->parsed()) return cmd_verify(o);
        if (bounds_cmd->parsed()) return cmd_bounds(o);
        if (oracle_cmd->parsed()) return cmd_oracle(o);
    } catch (const CLI::RequiredError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNoInput;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const OracleLimitError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::invalid_argument& e) {
        // Parse, schema, dimension and configuration errors.
        std::cerr << "error: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitSoftware;
    }
    return kExitUsage;
}
