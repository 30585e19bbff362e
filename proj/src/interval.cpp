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

#include "symrelax/interval.hpp"

#include "symrelax/rounding.hpp"
#include "symrelax/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace symrelax {

ConcreteInterval hull(const ConcreteInterval& a, const ConcreteInterval& b) noexcept {
    return {std::min(a.lo, b.lo), std::max(a.hi, b.hi)};
}

InputBox::InputBox(std::vector<double> lower, std::vector<double> upper)
    : lo(std::move(lower)), hi(std::move(upper)) {
    if (lo.size() != hi.size()) throw DimensionError("input box: lower/upper length mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (!(lo[i] <= hi[i])) {
            throw std::invalid_argument("input box: lo > hi on axis " + std::to_string(i));
        }
    }
}

InputBox InputBox::around(std::span<const double> center, double eps) {
    if (eps < 0.0) throw std::invalid_argument("input box: negative radius");
    std::vector<double> lower(center.size());
    std::vector<double> upper(center.size());
    for (std::size_t i = 0; i < center.size(); ++i) {
        lower[i] = center[i] - eps;
        upper[i] = center[i] + eps;
    }
    return InputBox(std::move(lower), std::move(upper));
}

std::vector<double> InputBox::midpoint() const {
    std::vector<double> m(lo.size());
    for (std::size_t i = 0; i < lo.size(); ++i) m[i] = 0.5 * (lo[i] + hi[i]);
    return m;
}

bool InputBox::contains(std::span<const double> point, double tol) const {
    if (point.size() != lo.size()) return false;
    for (std::size_t i = 0; i < lo.size(); ++i) {
        if (point[i] < lo[i] - tol || point[i] > hi[i] + tol) return false;
    }
    return true;
}

LinearExpression LinearExpression::zero(std::size_t dim) { return {std::vector<double>(dim, 0.0), 0.0}; }

LinearExpression LinearExpression::variable(std::size_t dim, std::size_t index) {
    if (index >= dim) throw DimensionError("variable index out of range");
    LinearExpression e = zero(dim);
    e.coeffs[index] = 1.0;
    return e;
}

bool LinearExpression::is_finite() const noexcept {
    if (!std::isfinite(constant)) return false;
    return std::all_of(coeffs.begin(), coeffs.end(), [](double c) { return std::isfinite(c); });
}

LinearExpression LinearExpression::scaled(double factor) const {
    LinearExpression out;
    out.coeffs.resize(coeffs.size());
    simd::active().scale(factor, coeffs.data(), out.coeffs.data(), coeffs.size());
    out.constant = factor * constant;
    return out;
}

void LinearExpression::add_scaled(double factor, const LinearExpression& other) {
    if (other.coeffs.size() != coeffs.size()) throw DimensionError("expression dimension mismatch");
    simd::active().axpy(factor, other.coeffs.data(), coeffs.data(), coeffs.size());
    constant += factor * other.constant;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major)
    : rows_(rows), cols_(cols), data_(std::move(row_major)) {
    if (data_.size() != rows * cols) throw DimensionError("matrix: data size does not match shape");
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    const std::size_t r = rows.size();
    const std::size_t c = r == 0 ? 0 : rows.front().size();
    Matrix m(r, c);
    for (std::size_t i = 0; i < r; ++i) {
        if (rows[i].size() != c) throw DimensionError("matrix: ragged rows");
        std::copy(rows[i].begin(), rows[i].end(), m.row(i).begin());
    }
    return m;
}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

double evaluate(const LinearExpression& expr, std::span<const double> point) {
    if (point.size() != expr.coeffs.size()) {
        throw DimensionError("evaluate: point has " + std::to_string(point.size()) + " entries, expression has " +
                             std::to_string(expr.coeffs.size()));
    }
    return expr.constant + simd::active().dot(expr.coeffs.data(), point.data(), point.size());
}

ConcreteInterval concrete_bounds(const LinearExpression& expr, const InputBox& box) {
    if (box.dim() != expr.dim()) throw DimensionError("concrete_bounds: box/expression dimension mismatch");
    double slo = 0.0;
    double shi = 0.0;
    simd::active().bound_sum(expr.coeffs.data(), box.lo.data(), box.hi.data(), expr.dim(), &slo, &shi);
    return {add_down(slo, expr.constant), add_up(shi, expr.constant)};
}

ConcreteInterval outward_round(const ConcreteInterval& iv) noexcept { return {round_down(iv.lo), round_up(iv.hi)}; }

BoundPair make_bound_pair(LinearExpression low, LinearExpression up, const InputBox& box) {
    BoundPair p;
    p.conc_low = concrete_bounds(low, box);
    p.conc_up = concrete_bounds(up, box);
    p.eq_low = std::move(low);
    p.eq_up = std::move(up);
    return p;
}

std::vector<BoundPair> identity_bounds(const InputBox& box) {
    std::vector<BoundPair> out;
    out.reserve(box.dim());
    for (std::size_t i = 0; i < box.dim(); ++i) {
        auto e = LinearExpression::variable(box.dim(), i);
        BoundPair p;
        p.eq_low = e;
        p.eq_up = std::move(e);
        p.conc_low = {box.lo[i], box.hi[i]};
        p.conc_up = p.conc_low;
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<BoundPair> linear_map(std::span<const BoundPair> inputs, const Matrix& weights,
                                  std::span<const double> bias, const InputBox& box) {
    if (weights.cols() != inputs.size()) {
        throw DimensionError("linear_map: weights have " + std::to_string(weights.cols()) + " columns, layer has " +
                             std::to_string(inputs.size()) + " inputs");
    }
    if (bias.size() != weights.rows()) throw DimensionError("linear_map: bias length mismatch");
    const std::size_t d = box.dim();
    std::vector<BoundPair> out;
    out.reserve(weights.rows());
    for (std::size_t j = 0; j < weights.rows(); ++j) {
        LinearExpression low = LinearExpression::zero(d);
        LinearExpression up = LinearExpression::zero(d);
        const auto w = weights.row(j);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const double wi = w[i];
            if (wi == 0.0) continue;
            if (wi > 0.0) {
                low.add_scaled(wi, inputs[i].eq_low);
                up.add_scaled(wi, inputs[i].eq_up);
            } else {
                low.add_scaled(wi, inputs[i].eq_up);
                up.add_scaled(wi, inputs[i].eq_low);
            }
        }
        low.constant += bias[j];
        up.constant += bias[j];
        out.push_back(make_bound_pair(std::move(low), std::move(up), box));
    }
    return out;
}

std::string to_string(const ConcreteInterval& iv) {
    std::ostringstream os;
    os.precision(17);
    os << '[' << iv.lo << ", " << iv.hi << ']';
    return os.str();
}

}  // namespace symrelax
