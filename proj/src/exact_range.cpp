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

#include "symrelax/lp.hpp"
#include "symrelax/network.hpp"

#include <algorithm>
#include <limits>

namespace symrelax {
namespace {

// Every node value as an affine function of the inputs under the current
// partial activation pattern: value_i(x) = rows[i] . x + offset[i].
struct AffineState {
    std::vector<std::vector<double>> rows;
    std::vector<double> offset;
    std::vector<lp::Constraint> constraints;
};

class PatternEnumerator {
public:
    PatternEnumerator(const Network& net, const InputBox& box, const Matrix& objective)
        : net_(net), box_(box), objective_(objective) {
        result_.outputs.assign(objective.rows(),
                               {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    }

    ExactRange run() {
        AffineState s;
        const std::size_t d = net_.input_dim();
        for (std::size_t i = 0; i < d; ++i) {
            std::vector<double> r(d, 0.0);
            r[i] = 1.0;
            s.rows.push_back(std::move(r));
            s.offset.push_back(0.0);
        }
        descend(0, 0, std::move(s));
        return std::move(result_);
    }

private:
    lp::LinearProgram program(const AffineState& s) const {
        lp::LinearProgram p;
        p.objective = LinearExpression::zero(net_.input_dim());
        p.constraints = s.constraints;
        p.lower = box_.lo;
        p.upper = box_.hi;
        return p;
    }

    bool feasible(const AffineState& s) {
        ++result_.lp_calls;
        return lp::feasible(program(s)).feasible();
    }

    static AffineState apply_dense(const DenseLayer& layer, AffineState s) {
        const std::size_t d = s.rows.empty() ? 0 : s.rows.front().size();
        AffineState out;
        out.constraints = std::move(s.constraints);
        for (std::size_t j = 0; j < layer.weights.rows(); ++j) {
            std::vector<double> r(d, 0.0);
            double off = layer.bias[j];
            for (std::size_t i = 0; i < s.rows.size(); ++i) {
                const double w = layer.weights(j, i);
                if (w == 0.0) continue;
                for (std::size_t k = 0; k < d; ++k) r[k] += w * s.rows[i][k];
                off += w * s.offset[i];
            }
            out.rows.push_back(std::move(r));
            out.offset.push_back(off);
        }
        return out;
    }

    static AffineState apply_conv(const ConvLayer& layer, AffineState s) {
        const std::size_t d = s.rows.empty() ? 0 : s.rows.front().size();
        AffineState out;
        out.constraints = std::move(s.constraints);
        out.offset = conv_apply(layer, s.offset);
        out.rows.assign(out.offset.size(), std::vector<double>(d, 0.0));
        ConvLayer linear = layer;
        std::fill(linear.bias.begin(), linear.bias.end(), 0.0);
        std::vector<double> column(s.rows.size());
        for (std::size_t k = 0; k < d; ++k) {
            for (std::size_t i = 0; i < s.rows.size(); ++i) column[i] = s.rows[i][k];
            const auto mapped = conv_apply(linear, column);
            for (std::size_t j = 0; j < mapped.size(); ++j) out.rows[j][k] = mapped[j];
        }
        return out;
    }

    void descend(std::size_t layer, std::size_t node, AffineState s) {
        const auto& layers = net_.layers();
        while (layer < layers.size() && !std::holds_alternative<ReluLayer>(layers[layer])) {
            if (const auto* dense = std::get_if<DenseLayer>(&layers[layer])) {
                s = apply_dense(*dense, std::move(s));
            } else {
                s = apply_conv(std::get<ConvLayer>(layers[layer]), std::move(s));
            }
            ++layer;
            node = 0;
        }
        if (layer == layers.size()) {
            leaf(s);
            return;
        }
        if (node == s.rows.size()) {
            descend(layer + 1, 0, std::move(s));
            return;
        }

        // Concrete range of this pre-activation over the box.
        double lo = s.offset[node];
        double hi = s.offset[node];
        for (std::size_t k = 0; k < box_.dim(); ++k) {
            const double a = s.rows[node][k] * box_.lo[k];
            const double b = s.rows[node][k] * box_.hi[k];
            lo += std::min(a, b);
            hi += std::max(a, b);
        }
        LinearExpression pre(s.rows[node], 0.0);
        const double rhs = -s.offset[node];

        if (lo >= 0.0) {
            descend(layer, node + 1, std::move(s));
            return;
        }
        if (hi <= 0.0) {
            zero_node(s, node);
            descend(layer, node + 1, std::move(s));
            return;
        }

        AffineState inactive = s;
        inactive.constraints.push_back({pre, lp::Relation::LessEqual, rhs});
        if (feasible(inactive)) {
            zero_node(inactive, node);
            descend(layer, node + 1, std::move(inactive));
        }
        s.constraints.push_back({std::move(pre), lp::Relation::GreaterEqual, rhs});
        if (feasible(s)) descend(layer, node + 1, std::move(s));
    }

    static void zero_node(AffineState& s, std::size_t node) {
        std::fill(s.rows[node].begin(), s.rows[node].end(), 0.0);
        s.offset[node] = 0.0;
    }

    void leaf(const AffineState& s) {
        ++result_.feasible_patterns;
        auto p = program(s);
        const std::size_t d = net_.input_dim();
        for (std::size_t q = 0; q < objective_.rows(); ++q) {
            LinearExpression f = LinearExpression::zero(d);
            for (std::size_t j = 0; j < s.rows.size(); ++j) {
                const double w = objective_(q, j);
                if (w == 0.0) continue;
                for (std::size_t k = 0; k < d; ++k) f.coeffs[k] += w * s.rows[j][k];
                f.constant += w * s.offset[j];
            }
            p.objective = f;
            for (auto sense : {lp::Sense::Minimize, lp::Sense::Maximize}) {
                p.sense = sense;
                ++result_.lp_calls;
                const auto r = lp::solve(p);
                if (r.status == lp::Status::Infeasible) return;
                if (!r.optimal()) throw std::runtime_error(std::string("exact range: LP ") + lp::to_string(r.status));
                auto& iv = result_.outputs[q];
                if (sense == lp::Sense::Minimize) {
                    iv.lo = std::min(iv.lo, r.value);
                } else {
                    iv.hi = std::max(iv.hi, r.value);
                }
            }
        }
    }

    const Network& net_;
    const InputBox& box_;
    const Matrix& objective_;
    ExactRange result_;
};

}  // namespace

ExactRange exact_objective_range(const Network& net, const InputBox& box, const Matrix& objective,
                                 const ExactRangeOptions& opts) {
    if (net.relu_count() > opts.relu_limit) {
        throw OracleLimitError("exact range: network has " + std::to_string(net.relu_count()) +
                               " ReLU nodes, oracle limit is " + std::to_string(opts.relu_limit));
    }
    if (box.dim() != net.input_dim()) throw DimensionError("exact range: box dimension mismatch");
    if (objective.cols() != net.output_dim()) throw DimensionError("exact range: objective width mismatch");
    return PatternEnumerator(net, box, objective).run();
}

ExactRange exact_output_range(const Network& net, const InputBox& box, const ExactRangeOptions& opts) {
    return exact_objective_range(net, box, Matrix::identity(net.output_dim()), opts);
}

}  // namespace symrelax
