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

// Dense two-phase simplex over box-bounded variables. Used by the refinement
// search to discharge violation systems and by the exact-range oracle.

#include "symrelax/interval.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace symrelax::lp {

enum class Relation { LessEqual, GreaterEqual, Equal };

struct Constraint {
    LinearExpression row;  // constant term is folded into the right-hand side
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

enum class Sense { Minimize, Maximize };

struct LinearProgram {
    LinearExpression objective;
    Sense sense = Sense::Minimize;
    std::vector<Constraint> constraints;
    std::vector<double> lower;  // finite per-variable bounds
    std::vector<double> upper;

    std::size_t num_vars() const noexcept { return lower.size(); }
    // Throws std::invalid_argument when sizes disagree, a bound is inverted or a
    // coefficient is not finite.
    void validate() const;
};

struct Settings {
    double feasibility_tol = 1e-7;
    double optimality_tol = 1e-6;
    double pivot_tol = 1e-9;
    std::size_t max_pivots = 50'000;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpOutcome {
    Status status = Status::Infeasible;
    std::vector<double> solution;  // Optimal only
    double value = 0.0;            // objective at `solution`, constant included
    std::size_t pivots = 0;

    bool optimal() const noexcept { return status == Status::Optimal; }
};

LpOutcome solve(const LinearProgram& lp, const Settings& settings = {});

struct FeasibilityResult {
    Status status = Status::Infeasible;  // Optimal means feasible
    std::vector<double> witness;

    bool feasible() const noexcept { return status == Status::Optimal; }
};

// Phase 1 only; the witness is the first feasible vertex found.
FeasibilityResult feasible(const LinearProgram& lp, const Settings& settings = {});

// Largest violation of any constraint or bound at `x` (0 when satisfied).
double max_violation(const LinearProgram& lp, std::span<const double> x);

// CPLEX-style LP text, for cross-checking with external solvers.
std::string dump_lp(const LinearProgram& lp);

const char* to_string(Status s) noexcept;

}  // namespace symrelax::lp
