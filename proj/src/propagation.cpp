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
#include "symrelax/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace symrelax {

const char* to_string(NodeStatus s) noexcept {
    switch (s) {
        case NodeStatus::Active:
            return "active";
        case NodeStatus::Inactive:
            return "inactive";
        case NodeStatus::Overestimated:
            return "overestimated";
        case NodeStatus::ForcedActive:
            return "forced_active";
        case NodeStatus::ForcedInactive:
            return "forced_inactive";
    }
    return "unknown";
}

const ReluLayerTrace& PropagationTrace::layer_trace(std::size_t layer) const {
    for (const auto& t : relu_layers) {
        if (t.layer == layer) return t;
    }
    throw std::out_of_range("trace: no ReLU layer " + std::to_string(layer));
}

NodeStatus PropagationTrace::status(const NodeId& id) const { return layer_trace(id.layer).status.at(id.node); }

const BoundPair& PropagationTrace::pre(const NodeId& id) const { return layer_trace(id.layer).pre.at(id.node); }

std::vector<ConcreteInterval> PropagationTrace::output_ranges() const {
    std::vector<ConcreteInterval> out;
    out.reserve(output.size());
    for (const auto& p : output) out.push_back(p.range());
    return out;
}

double max_relaxation_error(double l, double u) noexcept {
    if (!(l < 0.0 && u > 0.0)) return 0.0;
    return -u * l / (u - l);
}

namespace {

BoundPair zero_pair(std::size_t d) {
    BoundPair p;
    p.eq_low = LinearExpression::zero(d);
    p.eq_up = p.eq_low;
    return p;
}

BoundPair constant_pair(std::size_t d, double lo, double hi) {
    BoundPair p = zero_pair(d);
    p.eq_low.constant = lo;
    p.eq_up.constant = hi;
    p.conc_low = {lo, lo};
    p.conc_up = {hi, hi};
    return p;
}

// Upper side: ReLU(eq_up) <= k * (eq_up - l) with k = u / (u - l).
void relax_upper(const BoundPair& in, BoundPair& out) {
    const double l = in.conc_up.lo;
    const double u = in.conc_up.hi;
    if (l >= 0.0) {
        out.eq_up = in.eq_up;
        out.conc_up = in.conc_up;
        return;
    }
    if (u <= 0.0) {
        out.eq_up = LinearExpression::zero(in.eq_up.dim());
        out.conc_up = {0.0, 0.0};
        return;
    }
    if (u - l < kDivisionGuard) {
        // Slope-one limit of the chord: eq_up - l dominates ReLU on [l, u].
        out.eq_up = in.eq_up;
        out.eq_up.constant = add_up(out.eq_up.constant, -l);
        out.conc_up = {0.0, add_up(u, -l)};
        return;
    }
    const double k = u / (u - l);
    out.eq_up = in.eq_up.scaled(k);
    out.eq_up.constant = add_up(out.eq_up.constant, mul_up(-k, l));
    out.conc_up = {0.0, mul_up(k, add_up(u, -l))};
}

// Lower side: ReLU(eq_low) >= k * eq_low with k = u / (u - l).
void relax_lower(const BoundPair& in, BoundPair& out) {
    const double l = in.conc_low.lo;
    const double u = in.conc_low.hi;
    if (l >= 0.0) {
        out.eq_low = in.eq_low;
        out.conc_low = in.conc_low;
        return;
    }
    if (u <= 0.0 || u - l < kDivisionGuard) {
        out.eq_low = LinearExpression::zero(in.eq_low.dim());
        out.conc_low = {0.0, 0.0};
        return;
    }
    const double k = u / (u - l);
    out.eq_low = in.eq_low.scaled(k);
    out.conc_low = {mul_down(k, l), mul_up(k, u)};
}

// Node-level classification shared by SIA and SLR.
NodeStatus classify(const BoundPair& pair) noexcept {
    const double l = pair.conc_low.lo;
    const double u = pair.conc_up.hi;
    if (l >= 0.0) return NodeStatus::Active;
    if (u <= 0.0) return NodeStatus::Inactive;
    if (u - l < kDivisionGuard) return u > 0.0 ? NodeStatus::Active : NodeStatus::Inactive;
    return NodeStatus::Overestimated;
}

}  // namespace

Relaxation relax_relu(const BoundPair& pair) {
    Relaxation r;
    r.status = classify(pair);
    switch (r.status) {
        case NodeStatus::Active:
            r.pair = pair;
            break;
        case NodeStatus::Inactive:
            r.pair = zero_pair(pair.eq_low.dim());
            break;
        default:
            relax_upper(pair, r.pair);
            relax_lower(pair, r.pair);
            break;
    }
    return r;
}

std::vector<BoundPair> conv_map(std::span<const BoundPair> inputs, const ConvLayer& layer, const InputBox& box) {
    if (inputs.size() != layer.input_size()) {
        throw DimensionError("conv_map: layer expects " + std::to_string(layer.input_size()) + " inputs, got " +
                             std::to_string(inputs.size()));
    }
    const std::size_t d = box.dim();
    const std::size_t oh = layer.out_h();
    const std::size_t ow = layer.out_w();
    std::vector<BoundPair> out(layer.output_size());
    for (std::size_t oc = 0; oc < layer.out_channels; ++oc) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                LinearExpression low = LinearExpression::zero(d);
                LinearExpression up = LinearExpression::zero(d);
                for (std::size_t ic = 0; ic < layer.in_channels; ++ic) {
                    for (std::size_t ky = 0; ky < layer.kernel_h; ++ky) {
                        for (std::size_t kx = 0; kx < layer.kernel_w; ++kx) {
                            const double w = layer.kernel(oc, ic, ky, kx);
                            if (w == 0.0) continue;
                            const auto& in =
                                inputs[(ic * layer.in_h + oy * layer.stride + ky) * layer.in_w + ox * layer.stride + kx];
                            low.add_scaled(w, w > 0.0 ? in.eq_low : in.eq_up);
                            up.add_scaled(w, w > 0.0 ? in.eq_up : in.eq_low);
                        }
                    }
                }
                low.constant += layer.bias[oc];
                up.constant += layer.bias[oc];
                out[(oc * oh + oy) * ow + ox] = make_bound_pair(std::move(low), std::move(up), box);
            }
        }
    }
    return out;
}

namespace {

enum class Mode { Slr, Sia };

PropagationTrace propagate(const Network& net, const InputBox& box, const ForcedMap& forced, Mode mode) {
    if (box.dim() != net.input_dim()) {
        throw DimensionError("propagation: box has " + std::to_string(box.dim()) + " dimensions, network expects " +
                             std::to_string(net.input_dim()));
    }
    for (const auto& [id, _] : forced) (void)net.flat_index(id);

    const std::size_t d = box.dim();
    PropagationTrace trace;
    trace.box = box;
    std::vector<BoundPair> values = identity_bounds(box);
    const auto& layers = net.layers();
    for (std::size_t li = 0; li < layers.size(); ++li) {
        if (const auto* dense = std::get_if<DenseLayer>(&layers[li])) {
            values = linear_map(values, dense->weights, dense->bias, box);
            continue;
        }
        if (const auto* conv = std::get_if<ConvLayer>(&layers[li])) {
            values = conv_map(values, *conv, box);
            continue;
        }
        ReluLayerTrace lt;
        lt.layer = li;
        lt.status.resize(values.size());
        lt.post.resize(values.size());
        for (std::size_t j = 0; j < values.size(); ++j) {
            const BoundPair& pre = values[j];
            const auto f = forced.find(NodeId{li, j});
            if (f != forced.end()) {
                if (f->second == Activation::Inactive) {
                    lt.status[j] = NodeStatus::ForcedInactive;
                    lt.post[j] = zero_pair(d);
                } else {
                    lt.status[j] = NodeStatus::ForcedActive;
                    if (pre.exact()) {
                        lt.post[j] = pre;
                    } else {
                        // Only the region eq_up >= 0 is kept, which does not pin
                        // eq_low's sign: keep the relaxed lower side.
                        BoundPair p = relax_relu(pre).pair;
                        p.eq_up = pre.eq_up;
                        p.conc_up = pre.conc_up;
                        lt.post[j] = std::move(p);
                    }
                }
                continue;
            }
            if (mode == Mode::Slr) {
                auto r = relax_relu(pre);
                lt.status[j] = r.status;
                lt.post[j] = std::move(r.pair);
            } else {
                const NodeStatus s = classify(pre);
                lt.status[j] = s;
                if (s == NodeStatus::Active) {
                    lt.post[j] = pre;
                } else if (s == NodeStatus::Inactive) {
                    lt.post[j] = zero_pair(d);
                } else {
                    lt.post[j] = constant_pair(d, 0.0, pre.conc_up.hi);
                }
            }
            if (lt.status[j] == NodeStatus::Overestimated) trace.overestimated.push_back(NodeId{li, j});
        }
        lt.pre = std::move(values);
        values = lt.post;
        trace.relu_layers.push_back(std::move(lt));
    }
    trace.output = std::move(values);
    return trace;
}

}  // namespace

PropagationTrace slr_forward(const Network& net, const InputBox& box, const ForcedMap& forced) {
    return propagate(net, box, forced, Mode::Slr);
}

PropagationTrace sia_forward(const Network& net, const InputBox& box) { return propagate(net, box, {}, Mode::Sia); }

std::vector<ConcreteInterval> nia_forward(const Network& net, const InputBox& box) {
    if (box.dim() != net.input_dim()) throw DimensionError("nia_forward: box dimension mismatch");
    std::vector<double> lo = box.lo;
    std::vector<double> hi = box.hi;
    const auto& k = simd::active();
    for (const auto& layer : net.layers()) {
        if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
            std::vector<double> nlo(dense->weights.rows());
            std::vector<double> nhi(dense->weights.rows());
            for (std::size_t j = 0; j < nlo.size(); ++j) {
                double slo = 0.0;
                double shi = 0.0;
                k.bound_sum(dense->weights.row(j).data(), lo.data(), hi.data(), lo.size(), &slo, &shi);
                nlo[j] = add_down(slo, dense->bias[j]);
                nhi[j] = add_up(shi, dense->bias[j]);
            }
            lo = std::move(nlo);
            hi = std::move(nhi);
        } else if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
            const std::size_t oh = conv->out_h();
            const std::size_t ow = conv->out_w();
            const std::size_t field = conv->in_channels * conv->kernel_h * conv->kernel_w;
            std::vector<double> w(field);
            std::vector<double> flo(field);
            std::vector<double> fhi(field);
            std::vector<double> nlo(conv->output_size());
            std::vector<double> nhi(conv->output_size());
            for (std::size_t oc = 0; oc < conv->out_channels; ++oc) {
                for (std::size_t oy = 0; oy < oh; ++oy) {
                    for (std::size_t ox = 0; ox < ow; ++ox) {
                        std::size_t q = 0;
                        for (std::size_t ic = 0; ic < conv->in_channels; ++ic) {
                            for (std::size_t ky = 0; ky < conv->kernel_h; ++ky) {
                                for (std::size_t kx = 0; kx < conv->kernel_w; ++kx, ++q) {
                                    const std::size_t src =
                                        (ic * conv->in_h + oy * conv->stride + ky) * conv->in_w + ox * conv->stride + kx;
                                    w[q] = conv->kernel(oc, ic, ky, kx);
                                    flo[q] = lo[src];
                                    fhi[q] = hi[src];
                                }
                            }
                        }
                        double slo = 0.0;
                        double shi = 0.0;
                        k.bound_sum(w.data(), flo.data(), fhi.data(), field, &slo, &shi);
                        const std::size_t dst = (oc * oh + oy) * ow + ox;
                        nlo[dst] = add_down(slo, conv->bias[oc]);
                        nhi[dst] = add_up(shi, conv->bias[oc]);
                    }
                }
            }
            lo = std::move(nlo);
            hi = std::move(nhi);
        } else {
            for (std::size_t j = 0; j < lo.size(); ++j) {
                lo[j] = std::max(lo[j], 0.0);
                hi[j] = std::max(hi[j], 0.0);
            }
        }
    }
    std::vector<ConcreteInterval> out(lo.size());
    for (std::size_t j = 0; j < lo.size(); ++j) out[j] = {lo[j], hi[j]};
    return out;
}

std::pair<InputBox, InputBox> bisect_region(const InputBox& box, std::size_t axis) {
    if (axis >= box.dim()) throw DimensionError("bisect_region: axis out of range");
    if (!(box.hi[axis] > box.lo[axis])) {
        throw std::invalid_argument("bisect_region: axis " + std::to_string(axis) + " has zero width");
    }
    const double mid = 0.5 * (box.lo[axis] + box.hi[axis]);
    InputBox left = box;
    InputBox right = box;
    left.hi[axis] = mid;
    right.lo[axis] = mid;
    return {std::move(left), std::move(right)};
}

}  // namespace symrelax
