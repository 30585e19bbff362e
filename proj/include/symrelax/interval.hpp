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

// Affine expressions over the network inputs, concrete enclosures with
// outward rounding, and the dense matrix type used by every layer.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace symrelax {

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct ConcreteInterval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const noexcept { return hi - lo; }
    bool contains(double v, double tol = 0.0) const noexcept { return v >= lo - tol && v <= hi + tol; }
    bool contains(const ConcreteInterval& other, double tol = 0.0) const noexcept {
        return other.lo >= lo - tol && other.hi <= hi + tol;
    }

    friend bool operator==(const ConcreteInterval&, const ConcreteInterval&) = default;
};

ConcreteInterval hull(const ConcreteInterval& a, const ConcreteInterval& b) noexcept;

// Axis-aligned region of input space; one interval per input feature.
struct InputBox {
    std::vector<double> lo;
    std::vector<double> hi;

    InputBox() = default;
    InputBox(std::vector<double> lower, std::vector<double> upper);

    static InputBox around(std::span<const double> center, double eps);

    std::size_t dim() const noexcept { return lo.size(); }
    std::vector<double> midpoint() const;
    bool contains(std::span<const double> point, double tol = 0.0) const;
};

// coeffs . x + constant, with one coefficient per network input.
struct LinearExpression {
    std::vector<double> coeffs;
    double constant = 0.0;

    LinearExpression() = default;
    LinearExpression(std::vector<double> c, double k) : coeffs(std::move(c)), constant(k) {}

    static LinearExpression zero(std::size_t dim);
    static LinearExpression variable(std::size_t dim, std::size_t index);

    std::size_t dim() const noexcept { return coeffs.size(); }
    bool is_finite() const noexcept;

    LinearExpression scaled(double factor) const;
    // this += factor * other
    void add_scaled(double factor, const LinearExpression& other);

    friend bool operator==(const LinearExpression&, const LinearExpression&) = default;
};

// Symbolic interval of one node: eq_low(x) <= value(x) <= eq_up(x) on the box,
// with outward-rounded ranges of both equations.
struct BoundPair {
    LinearExpression eq_low;
    LinearExpression eq_up;
    ConcreteInterval conc_low;
    ConcreteInterval conc_up;

    // Concrete enclosure of the node value: [min eq_low, max eq_up].
    ConcreteInterval range() const noexcept { return {conc_low.lo, conc_up.hi}; }
    // Lower and upper equations coincide, so the node is tracked without error.
    bool exact() const noexcept { return eq_low == eq_up; }
};

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> row_major);
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);
    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

double evaluate(const LinearExpression& expr, std::span<const double> point);

// Outward-rounded [min, max] of expr over the box.
ConcreteInterval concrete_bounds(const LinearExpression& expr, const InputBox& box);

// Widens each endpoint by one representable step; exact zeros are kept.
ConcreteInterval outward_round(const ConcreteInterval& iv) noexcept;

BoundPair make_bound_pair(LinearExpression low, LinearExpression up, const InputBox& box);

// The input layer: node i is exactly x_i.
std::vector<BoundPair> identity_bounds(const InputBox& box);

// Affine layer on symbolic intervals. Positive weights take the matching
// equation, negative weights swap lower and upper.
std::vector<BoundPair> linear_map(std::span<const BoundPair> inputs, const Matrix& weights,
                                  std::span<const double> bias, const InputBox& box);

std::string to_string(const ConcreteInterval& iv);

}  // namespace symrelax
