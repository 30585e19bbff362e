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

// Safety properties: input regions, output requirements, and their encoding
// into propagation boxes and LP rows.

#include "symrelax/interval.hpp"
#include "symrelax/lp.hpp"
#include "symrelax/network.hpp"
#include "symrelax/propagation.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace symrelax {

class PropertyError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct LInfRegion {
    std::vector<double> center;
    double eps = 0.0;
};

struct L1Region {
    std::vector<double> center;
    double eps = 0.0;
};

// x = center + delta * (1, ..., 1), |delta| <= eps.
struct BrightnessRegion {
    std::vector<double> center;
    double eps = 0.0;
};

// x = s * center, lo_scale <= s <= hi_scale.
struct ContrastRegion {
    std::vector<double> center;
    double lo_scale = 1.0;
    double hi_scale = 1.0;
};

struct BoxRegion {
    std::vector<double> lo;
    std::vector<double> hi;
};

using InputRegion = std::variant<LInfRegion, L1Region, BrightnessRegion, ContrastRegion, BoxRegion>;

std::size_t region_dim(const InputRegion& region);
// Throws PropertyError on negative radii, inverted scales or boxes.
void validate_region(const InputRegion& region);

// Membership in the region itself (not its closure or box envelope).
bool region_contains(const InputRegion& region, std::span<const double> x, double tol = 1e-7);

// Brightness/contrast regions are one-parameter families; this is the range of
// that parameter.
std::optional<ConcreteInterval> scalar_parameter(const InputRegion& region);

enum class Comparison { Less, LessEqual, Greater, GreaterEqual };

const char* to_string(Comparison c) noexcept;

struct OutputRow {
    std::vector<double> coeffs;  // over network outputs
    Comparison comparison = Comparison::LessEqual;
    double rhs = 0.0;
};

// Safe iff output true_label strictly exceeds every other output.
struct Classification {
    std::size_t true_label = 0;
};

// Safe iff every row holds for every reachable output.
struct LinearSafe {
    std::vector<OutputRow> rows;
};

// Safe iff |output[0] - center_output| <= max_dev.
struct RegressionBand {
    double center_output = 0.0;
    double max_dev = 0.0;
};

using OutputProperty = std::variant<Classification, LinearSafe, RegressionBand>;

void validate_property(const OutputProperty& prop, std::size_t output_dim);

// Exact semantics on concrete outputs.
bool property_holds(const OutputProperty& prop, std::span<const double> outputs);

// Propagation box plus the LP side of a region. LP variables are the d inputs
// followed by `aux_lower.size()` auxiliaries.
struct RegionEncoding {
    InputBox box;
    std::vector<double> aux_lower;
    std::vector<double> aux_upper;
    std::vector<lp::Constraint> rows;

    std::size_t num_vars() const noexcept { return box.dim() + aux_lower.size(); }
};

RegionEncoding region_to_box(const InputRegion& region);

// Encoding of a brightness/contrast region restricted to parameter values in `slice`.
RegionEncoding region_slice(const InputRegion& region, const ConcreteInterval& slice);

// One LP whose feasibility signals a potential violation: violation(x) <= 0
// together with the region and split rows.
struct ViolationSystem {
    std::string label;
    LinearExpression violation;            // over inputs
    std::vector<double> output_direction;  // objective row for gradient priority
    std::vector<lp::Constraint> rows;      // over all LP variables
    std::vector<double> lower;
    std::vector<double> upper;

    // Minimizes the violation expression subject to the rows.
    lp::LinearProgram program() const;
    // The rows plus "violation <= 0".
    lp::LinearProgram feasibility_program() const;
};

// A split constraint over the network inputs.
struct SplitRow {
    LinearExpression expr;
    bool non_negative = false;  // expr >= 0 when true, expr <= 0 otherwise
};

std::vector<ViolationSystem> build_violation_systems(const OutputProperty& prop, const PropagationTrace& trace,
                                                     const RegionEncoding& region,
                                                     std::span<const SplitRow> split_rows = {});

struct PropertySpec {
    InputRegion region;
    OutputProperty property;
    bool normalized = false;
};

// JSON: {"region": {linf|l1|brightness|contrast|box: {...}},
//        "property": {classification|linear_safe|regression_band: {...}},
//        "normalized": bool}
PropertySpec parse_property(std::string_view text);
std::string write_property(const PropertySpec& spec);

// Maps a region from raw input units into the network's normalized space.
// Box and L-infinity regions are supported (the latter becomes a box).
InputRegion normalize_region(const InputRegion& region, const Normalization& norm);

// Pads an input-space expression with zero coefficients for auxiliaries.
LinearExpression pad(const LinearExpression& expr, std::size_t num_vars);

}  // namespace symrelax
