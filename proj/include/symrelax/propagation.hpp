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

// Output-bound propagators: naive interval arithmetic (NIA), symbolic
// interval analysis with concretization (SIA) and symbolic linear relaxation
// (SLR), together with overestimated-node bookkeeping and interval gradients.

#include "symrelax/interval.hpp"
#include "symrelax/network.hpp"

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace symrelax {

enum class NodeStatus { Active, Inactive, Overestimated, ForcedActive, ForcedInactive };

const char* to_string(NodeStatus s) noexcept;

// Split decisions imposed on ReLU nodes by the refinement search.
using ForcedMap = std::map<NodeId, Activation>;

// Degenerate pre-activation ranges narrower than this collapse to one linear piece.
inline constexpr double kDivisionGuard = 1e-12;

struct ReluLayerTrace {
    std::size_t layer = 0;
    std::vector<NodeStatus> status;
    std::vector<BoundPair> pre;
    std::vector<BoundPair> post;
};

struct PropagationTrace {
    InputBox box;
    std::vector<ReluLayerTrace> relu_layers;
    std::vector<BoundPair> output;
    std::vector<NodeId> overestimated;  // network order

    const ReluLayerTrace& layer_trace(std::size_t layer) const;
    NodeStatus status(const NodeId& id) const;
    const BoundPair& pre(const NodeId& id) const;

    std::vector<ConcreteInterval> output_ranges() const;
};

struct Relaxation {
    BoundPair pair;
    NodeStatus status = NodeStatus::Active;
};

// Linear relaxation of ReLU over a symbolic interval. The lower and upper
// equations are handled independently: each keeps its equation when its range
// is non-negative, becomes zero when non-positive, and otherwise takes the
// chord slope u/(u-l) (upper: u/(u-l) * (eq - l), lower: u/(u-l) * eq).
Relaxation relax_relu(const BoundPair& pair);

// Largest pointwise gap introduced by relaxing a range [l, u] with l < 0 < u.
double max_relaxation_error(double l, double u) noexcept;

PropagationTrace slr_forward(const Network& net, const InputBox& box, const ForcedMap& forced = {});
PropagationTrace sia_forward(const Network& net, const InputBox& box);
std::vector<ConcreteInterval> nia_forward(const Network& net, const InputBox& box);

std::vector<BoundPair> conv_map(std::span<const BoundPair> inputs, const ConvLayer& layer, const InputBox& box);

struct GradientInterval {
    // Per ReLU layer (same order as PropagationTrace::relu_layers), the range
    // of d objective / d pre-activation for every node.
    std::vector<std::vector<ConcreteInterval>> nodes;
    std::vector<ConcreteInterval> inputs;

    const ConcreteInterval& at(const PropagationTrace& trace, const NodeId& id) const;
};

// Backward interval pass of `objective . output` through the statuses
// recorded in the trace.
GradientInterval interval_gradient(const Network& net, const PropagationTrace& trace,
                                   std::span<const double> objective);

// Gradient magnitude times the node's maximum relaxation error.
double split_priority(const ConcreteInterval& gradient, const BoundPair& pre) noexcept;

// Highest-priority overestimated node, ties broken by (layer, node).
std::optional<NodeId> select_split_node(const PropagationTrace& trace, const GradientInterval& gradient);

std::pair<InputBox, InputBox> bisect_region(const InputBox& box, std::size_t axis);

}  // namespace symrelax
