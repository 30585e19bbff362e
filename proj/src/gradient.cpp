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

#include "symrelax/propagation.hpp"
#include "symrelax/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace symrelax {
namespace {

// acc += w * g, outward rounded.
void accumulate(ConcreteInterval& acc, double w, const ConcreteInterval& g) {
    if (w == 0.0) return;
    const double a = w >= 0.0 ? g.lo : g.hi;
    const double b = w >= 0.0 ? g.hi : g.lo;
    acc.lo = add_down(acc.lo, mul_down(w, a));
    acc.hi = add_up(acc.hi, mul_up(w, b));
}

ConcreteInterval through_relu(const ConcreteInterval& g, NodeStatus s) {
    switch (s) {
        case NodeStatus::Active:
        case NodeStatus::ForcedActive:
            return g;
        case NodeStatus::Inactive:
        case NodeStatus::ForcedInactive:
            return {0.0, 0.0};
        case NodeStatus::Overestimated:
            return {std::min(g.lo, 0.0), std::max(g.hi, 0.0)};
    }
    return g;
}

}  // namespace

const ConcreteInterval& GradientInterval::at(const PropagationTrace& trace, const NodeId& id) const {
    for (std::size_t k = 0; k < trace.relu_layers.size(); ++k) {
        if (trace.relu_layers[k].layer == id.layer) return nodes.at(k).at(id.node);
    }
    throw std::out_of_range("gradient: no ReLU layer " + std::to_string(id.layer));
}

GradientInterval interval_gradient(const Network& net, const PropagationTrace& trace,
                                   std::span<const double> objective) {
    if (objective.size() != net.output_dim()) throw DimensionError("interval_gradient: objective width mismatch");
    if (trace.relu_layers.size() != net.relu_layers().size() || trace.output.size() != net.output_dim()) {
        throw std::invalid_argument("interval_gradient: trace does not belong to this network");
    }
    GradientInterval out;
    out.nodes.resize(trace.relu_layers.size());

    std::vector<ConcreteInterval> g(objective.size());
    for (std::size_t j = 0; j < objective.size(); ++j) g[j] = {objective[j], objective[j]};

    std::size_t relu_slot = trace.relu_layers.size();
    const auto& layers = net.layers();
    for (std::size_t li = layers.size(); li-- > 0;) {
        if (const auto* dense = std::get_if<DenseLayer>(&layers[li])) {
            std::vector<ConcreteInterval> prev(dense->weights.cols());
            for (std::size_t j = 0; j < dense->weights.rows(); ++j) {
                const auto row = dense->weights.row(j);
                for (std::size_t i = 0; i < row.size(); ++i) accumulate(prev[i], row[i], g[j]);
            }
            g = std::move(prev);
        } else if (const auto* conv = std::get_if<ConvLayer>(&layers[li])) {
            std::vector<ConcreteInterval> prev(conv->input_size());
            const std::size_t oh = conv->out_h();
            const std::size_t ow = conv->out_w();
            for (std::size_t oc = 0; oc < conv->out_channels; ++oc) {
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        const auto& go = g[(oc * oh + oy) * ow + ox];
                        for (std::size_t ic = 0; ic < conv->in_channels; ++ic) {
                            for (std::size_t ky = 0; ky < conv->kernel_h; ++ky) {
                                for (std::size_t kx = 0; kx < conv->kernel_w; ++kx) {
                                    const std::size_t src = (ic * conv->in_h + oy * conv->stride + ky) * conv->in_w +
                                                            ox * conv->stride + kx;
                                    accumulate(prev[src], conv->kernel(oc, ic, ky, kx), go);
                                }
                            }
                        }
                    }
                }
            }
            g = std::move(prev);
        } else {
            --relu_slot;
            const auto& lt = trace.relu_layers[relu_slot];
            if (lt.layer != li || lt.status.size() != g.size()) {
                throw std::invalid_argument("interval_gradient: trace does not belong to this network");
            }
            for (std::size_t j = 0; j < g.size(); ++j) g[j] = through_relu(g[j], lt.status[j]);
            out.nodes[relu_slot] = g;
        }
    }
    out.inputs = std::move(g);
    return out;
}

double split_priority(const ConcreteInterval& gradient, const BoundPair& pre) noexcept {
    const double magnitude = std::max(std::abs(gradient.lo), std::abs(gradient.hi));
    return magnitude * max_relaxation_error(pre.conc_low.lo, pre.conc_up.hi);
}

std::optional<NodeId> select_split_node(const PropagationTrace& trace, const GradientInterval& gradient) {
    std::optional<NodeId> best;
    double best_score = -1.0;
    // overestimated is already in (layer, node) order, so strict > keeps the first tie.
    for (const auto& id : trace.overestimated) {
        const double score = split_priority(gradient.at(trace, id), trace.pre(id));
        if (score > best_score) {
            best_score = score;
            best = id;
        }
    }
    return best;
}

}  // namespace symrelax
