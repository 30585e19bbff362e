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

#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace symrelax::testing {

std::string fixture(const std::string& name) { return std::string(SYMRELAX_FIXTURE_DIR) + "/" + name; }

Network random_network(std::mt19937_64& rng, const RandomNetShape& shape) {
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    auto pick = [&](std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
    };
    const std::size_t d = pick(shape.min_inputs, shape.max_inputs);
    const std::size_t dense = pick(shape.min_dense, shape.max_dense);
    const std::size_t hidden = dense - 1;
    std::size_t budget = shape.max_relus;
    std::vector<std::size_t> widths;
    for (std::size_t h = 0; h < hidden; ++h) {
        const std::size_t remaining_layers = hidden - h;
        const std::size_t cap = std::max<std::size_t>(1, std::min<std::size_t>(8, budget - (remaining_layers - 1)));
        const std::size_t width = pick(1, cap);
        widths.push_back(width);
        budget -= width;
    }
    widths.push_back(pick(shape.min_outputs, shape.max_outputs));

    std::vector<Layer> layers;
    std::size_t in = d;
    for (std::size_t k = 0; k < widths.size(); ++k) {
        Matrix m(widths[k], in);
        for (std::size_t r = 0; r < widths[k]; ++r) {
            for (std::size_t c = 0; c < in; ++c) m(r, c) = w(rng);
        }
        std::vector<double> b(widths[k]);
        for (auto& v : b) v = w(rng);
        layers.emplace_back(DenseLayer{std::move(m), std::move(b)});
        if (k + 1 < widths.size()) layers.emplace_back(ReluLayer{});
        in = widths[k];
    }
    return Network(d, std::move(layers));
}

InputBox random_box(std::mt19937_64& rng, std::size_t dim) {
    std::uniform_real_distribution<double> c(-1.0, 1.0);
    std::uniform_real_distribution<double> r(0.05, 1.0);
    std::vector<double> center(dim);
    for (auto& v : center) v = c(rng);
    return InputBox::around(center, r(rng));
}

std::vector<double> sample_point(std::mt19937_64& rng, const InputBox& box) {
    std::vector<double> x(box.dim());
    for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] = std::uniform_real_distribution<double>(box.lo[i], box.hi[i])(rng);
    }
    return x;
}

std::vector<double> forward_perturbed(const Network& net, std::span<const double> x, std::size_t flat_node,
                                      double delta) {
    std::vector<double> v(x.begin(), x.end());
    std::size_t offset = 0;
    for (const auto& layer : net.layers()) {
        if (const auto* d = std::get_if<DenseLayer>(&layer)) {
            v = dense_apply(*d, v);
        } else if (const auto* c = std::get_if<ConvLayer>(&layer)) {
            v = conv_apply(*c, v);
        } else {
            for (std::size_t j = 0; j < v.size(); ++j) {
                if (offset + j == flat_node) v[j] += delta;
                v[j] = std::max(v[j], 0.0);
            }
            offset += v.size();
        }
    }
    return v;
}

namespace {

// Solves A x = b (n x n) by partial-pivot elimination; false when singular.
bool solve_square(std::vector<std::vector<double>> a, std::vector<double> b, std::vector<double>& x) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        }
        if (std::abs(a[piv][col]) < 1e-10) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            const double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    x.resize(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return true;
}

}  // namespace

VertexResult vertex_optimum(const lp::LinearProgram& prog, double tol) {
    const std::size_t n = prog.num_vars();
    struct Plane {
        std::vector<double> a;
        double b;
    };
    std::vector<Plane> planes;
    for (const auto& c : prog.constraints) planes.push_back({c.row.coeffs, c.rhs - c.row.constant});
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> e(n, 0.0);
        e[i] = 1.0;
        planes.push_back({e, prog.lower[i]});
        planes.push_back({e, prog.upper[i]});
    }
    VertexResult best;
    const bool minimize = prog.sense == lp::Sense::Minimize;
    std::vector<std::size_t> pick(n);
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t depth) {
        if (depth == n) {
            std::vector<std::vector<double>> a;
            std::vector<double> b;
            for (auto p : pick) {
                a.push_back(planes[p].a);
                b.push_back(planes[p].b);
            }
            std::vector<double> x;
            if (!solve_square(a, b, x)) return;
            if (lp::max_violation(prog, x) > tol) return;
            const double v = evaluate(prog.objective, x);
            if (!best.feasible || (minimize ? v < best.value : v > best.value)) {
                best.feasible = true;
                best.value = v;
                best.point = x;
            }
            return;
        }
        for (std::size_t p = start; p < planes.size(); ++p) {
            pick[depth] = p;
            rec(p + 1, depth + 1);
        }
    };
    rec(0, 0);
    return best;
}

namespace {

void for_each_grid_point(const InputBox& box, std::size_t per_axis,
                         const std::function<bool(const std::vector<double>&)>& visit) {
    const std::size_t d = box.dim();
    std::vector<std::size_t> idx(d, 0);
    std::vector<double> x(d);
    while (true) {
        for (std::size_t i = 0; i < d; ++i) {
            const double t = per_axis == 1 ? 0.5 : static_cast<double>(idx[i]) / static_cast<double>(per_axis - 1);
            x[i] = box.lo[i] + t * (box.hi[i] - box.lo[i]);
        }
        if (!visit(x)) return;
        std::size_t k = 0;
        while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
        if (k == d) return;
    }
}

}  // namespace

std::vector<ConcreteInterval> grid_range(const Network& net, const InputBox& box, std::size_t per_axis) {
    std::vector<ConcreteInterval> out(net.output_dim(),
                                      {std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()});
    for_each_grid_point(box, per_axis, [&](const std::vector<double>& x) {
        const auto y = forward(net, x);
        for (std::size_t j = 0; j < y.size(); ++j) {
            out[j].lo = std::min(out[j].lo, y[j]);
            out[j].hi = std::max(out[j].hi, y[j]);
        }
        return true;
    });
    return out;
}

std::optional<std::vector<double>> grid_violation(const Network& net, const InputBox& box,
                                                  const OutputProperty& prop, std::size_t per_axis) {
    std::optional<std::vector<double>> found;
    for_each_grid_point(box, per_axis, [&](const std::vector<double>& x) {
        if (!property_holds(prop, forward(net, x))) {
            found = x;
            return false;
        }
        return true;
    });
    return found;
}

}  // namespace symrelax::testing
