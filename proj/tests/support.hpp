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

// Shared fixtures and independent oracles for the test suites.

#include "symrelax/lp.hpp"
#include "symrelax/network.hpp"
#include "symrelax/property.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace symrelax::testing {

std::string fixture(const std::string& name);

struct RandomNetShape {
    std::size_t min_inputs = 2;
    std::size_t max_inputs = 3;
    std::size_t min_dense = 2;  // dense layers, including the output layer
    std::size_t max_dense = 4;
    std::size_t max_relus = 16;
    std::size_t max_outputs = 3;
    std::size_t min_outputs = 1;
};

// Dense ReLU network with U[-1,1] weights and biases.
Network random_network(std::mt19937_64& rng, const RandomNetShape& shape = {});

// Box of half-width in [0.05, 1] around a center in [-1, 1]^d.
InputBox random_box(std::mt19937_64& rng, std::size_t dim);

std::vector<double> sample_point(std::mt19937_64& rng, const InputBox& box);

// Forward pass that adds `delta` to one ReLU pre-activation (flat network order).
std::vector<double> forward_perturbed(const Network& net, std::span<const double> x, std::size_t flat_node,
                                      double delta);

// Exhaustive vertex enumeration: every feasible intersection of num_vars
// hyperplanes drawn from the constraints and variable bounds.
struct VertexResult {
    bool feasible = false;
    double value = 0.0;
    std::vector<double> point;
};
VertexResult vertex_optimum(const lp::LinearProgram& lp, double tol = 1e-9);

// Min/max of each output over a regular grid of `per_axis` points per input.
std::vector<ConcreteInterval> grid_range(const Network& net, const InputBox& box, std::size_t per_axis);

// First grid point violating the property, if any.
std::optional<std::vector<double>> grid_violation(const Network& net, const InputBox& box,
                                                  const OutputProperty& prop, std::size_t per_axis);

}  // namespace symrelax::testing
