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

// Directed constraint refinement: a branch-and-bound search over overestimated
// ReLU nodes that discharges each branch with an LP and validates every
// candidate counterexample on the concrete network.

#include "symrelax/lp.hpp"
#include "symrelax/network.hpp"
#include "symrelax/propagation.hpp"
#include "symrelax/property.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace symrelax {

struct EngineConfig {
    double timeout_seconds = 3600.0;
    std::size_t max_depth = 0;  // 0 selects the network's ReLU count
    std::size_t workers = 1;
    std::size_t rebalance_interval = 32;
    // Brightness and contrast regions bisect their scalar parameter up to this
    // many times before splitting ReLU nodes.
    std::size_t scalar_bisect_depth = 8;
    // A violation system whose minimum is at most this value is treated as feasible.
    double violation_tol = 1e-7;
    lp::Settings lp;

    // Throws std::invalid_argument on non-positive values.
    void validate() const;
};

struct RefinementTask {
    ForcedMap forced;
    std::vector<SplitRow> split_rows;
    std::size_t depth = 0;  // number of forced nodes
    // Parameter range for brightness/contrast regions.
    std::optional<ConcreteInterval> slice;
    std::size_t slice_depth = 0;
};

enum class Verdict { Safe, Violated, Timeout, SolverFailure };

const char* to_string(Verdict v) noexcept;

struct Counterexample {
    std::vector<double> witness;
    std::vector<double> outputs;

    friend bool operator==(const Counterexample&, const Counterexample&) = default;
};

struct VerifyStats {
    std::size_t lp_calls = 0;
    std::size_t tasks_explored = 0;
    std::size_t max_depth = 0;
    double avg_depth = 0.0;  // over terminal tasks
    double wall_time = 0.0;  // seconds

    friend bool operator==(const VerifyStats&, const VerifyStats&) = default;
};

class VerdictReport {
public:
    static VerdictReport safe(VerifyStats stats);
    static VerdictReport timeout(VerifyStats stats, std::string detail = {});
    static VerdictReport solver_failure(VerifyStats stats, std::string detail = {});
    // Re-runs the network on the witness; throws std::logic_error unless it lies
    // in the region and violates the property.
    static VerdictReport violated(const Network& net, const InputRegion& region, const OutputProperty& prop,
                                  std::vector<double> witness, VerifyStats stats);

    Verdict verdict() const noexcept { return verdict_; }
    const std::optional<Counterexample>& counterexample() const noexcept { return counterexample_; }
    const VerifyStats& stats() const noexcept { return stats_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    VerdictReport(Verdict v, VerifyStats s, std::string detail)
        : verdict_(v), stats_(s), detail_(std::move(detail)) {}

    Verdict verdict_;
    std::optional<Counterexample> counterexample_;
    VerifyStats stats_;
    std::string detail_;
};

// True iff the witness lies in the region (tolerance 1e-7) and the network's
// concrete output on it violates the property.
bool validate_counterexample(const Network& net, const InputRegion& region, const OutputProperty& prop,
                             std::span<const double> witness);

VerdictReport verify(const Network& net, const InputRegion& region, const OutputProperty& prop,
                     const EngineConfig& cfg = {});

// Rows restricting the inputs to the points where every forced node takes its
// forced phase, built from the pre-activation bounds of `trace`.
std::vector<SplitRow> forced_rows(const PropagationTrace& trace, const ForcedMap& forced);

// One refinement step as recorded by refine_output_range. A child is empty when
// its split rows are infeasible.
struct SplitRecord {
    NodeId node;
    std::size_t depth = 0;
    std::vector<ConcreteInterval> parent;
    std::optional<std::vector<ConcreteInterval>> inactive_child;
    std::optional<std::vector<ConcreteInterval>> active_child;
};

struct RefinedRange {
    std::vector<ConcreteInterval> outputs;
    std::vector<SplitRecord> splits;
    std::size_t leaves = 0;
    std::size_t lp_calls = 0;
    // Child endpoints where the parent's bound was tighter than the child's own.
    std::size_t inherited_endpoints = 0;
};

// Splits overestimated nodes in network order up to cfg.max_depth and returns the
// union of the leaf bounds. Each task's bounds are LP minima of eq_low and
// maxima of eq_up under its split rows, intersected with its parent's bounds.
RefinedRange refine_output_range(const Network& net, const InputBox& box, const EngineConfig& cfg = {});

}  // namespace symrelax
