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

#include "symrelax/property.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace symrelax {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

std::size_t region_dim(const InputRegion& region) {
    return std::visit(overloaded{[](const BoxRegion& b) { return b.lo.size(); },
                                 [](const auto& r) { return r.center.size(); }},
                      region);
}

void validate_region(const InputRegion& region) {
    std::visit(overloaded{
                   [](const LInfRegion& r) {
                       if (!(r.eps >= 0.0)) throw PropertyError("linf region: eps must be non-negative");
                   },
                   [](const L1Region& r) {
                       if (!(r.eps >= 0.0)) throw PropertyError("l1 region: eps must be non-negative");
                   },
                   [](const BrightnessRegion& r) {
                       if (!(r.eps >= 0.0)) throw PropertyError("brightness region: eps must be non-negative");
                   },
                   [](const ContrastRegion& r) {
                       if (!(r.lo_scale > 0.0)) throw PropertyError("contrast region: lo_scale must be positive");
                       if (!(r.lo_scale <= r.hi_scale)) throw PropertyError("contrast region: lo_scale > hi_scale");
                   },
                   [](const BoxRegion& r) {
                       if (r.lo.size() != r.hi.size()) throw PropertyError("box region: lo/hi length mismatch");
                       for (std::size_t i = 0; i < r.lo.size(); ++i) {
                           if (!(r.lo[i] <= r.hi[i])) throw PropertyError("box region: lo > hi on axis " + std::to_string(i));
                       }
                   },
               },
               region);
    if (region_dim(region) == 0) throw PropertyError("region: empty input vector");
}

bool region_contains(const InputRegion& region, std::span<const double> x, double tol) {
    if (x.size() != region_dim(region)) return false;
    return std::visit(
        overloaded{
            [&](const LInfRegion& r) {
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (std::abs(x[i] - r.center[i]) > r.eps + tol) return false;
                }
                return true;
            },
            [&](const L1Region& r) {
                double s = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x[i] - r.center[i]);
                return s <= r.eps + tol;
            },
            [&](const BrightnessRegion& r) {
                double delta = 0.0;
                for (std::size_t i = 0; i < x.size(); ++i) delta += x[i] - r.center[i];
                delta /= static_cast<double>(x.size());
                if (std::abs(delta) > r.eps + tol) return false;
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (std::abs(x[i] - r.center[i] - delta) > tol) return false;
                }
                return true;
            },
            [&](const ContrastRegion& r) {
                const double cc = std::inner_product(r.center.begin(), r.center.end(), r.center.begin(), 0.0);
                const double s = cc == 0.0 ? r.lo_scale
                                           : std::inner_product(x.begin(), x.end(), r.center.begin(), 0.0) / cc;
                const double sc = std::clamp(s, r.lo_scale, r.hi_scale);
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (std::abs(x[i] - sc * r.center[i]) > tol) return false;
                }
                return true;
            },
            [&](const BoxRegion& r) {
                for (std::size_t i = 0; i < x.size(); ++i) {
                    if (x[i] < r.lo[i] - tol || x[i] > r.hi[i] + tol) return false;
                }
                return true;
            },
        },
        region);
}

std::optional<ConcreteInterval> scalar_parameter(const InputRegion& region) {
    if (const auto* b = std::get_if<BrightnessRegion>(&region)) return ConcreteInterval{-b->eps, b->eps};
    if (const auto* c = std::get_if<ContrastRegion>(&region)) return ConcreteInterval{c->lo_scale, c->hi_scale};
    return std::nullopt;
}

const char* to_string(Comparison c) noexcept {
    switch (c) {
        case Comparison::Less:
            return "<";
        case Comparison::LessEqual:
            return "<=";
        case Comparison::Greater:
            return ">";
        case Comparison::GreaterEqual:
            return ">=";
    }
    return "?";
}

void validate_property(const OutputProperty& prop, std::size_t output_dim) {
    std::visit(overloaded{
                   [&](const Classification& c) {
                       if (c.true_label >= output_dim) {
                           throw PropertyError("classification: true_label " + std::to_string(c.true_label) +
                                               " outside " + std::to_string(output_dim) + " outputs");
                       }
                       if (output_dim < 2) throw PropertyError("classification: needs at least two outputs");
                   },
                   [&](const LinearSafe& s) {
                       if (s.rows.empty()) throw PropertyError("linear_safe: no rows");
                       for (std::size_t i = 0; i < s.rows.size(); ++i) {
                           if (s.rows[i].coeffs.size() != output_dim) {
                               throw PropertyError("linear_safe: row " + std::to_string(i) + " has " +
                                                   std::to_string(s.rows[i].coeffs.size()) + " coefficients, network has " +
                                                   std::to_string(output_dim) + " outputs");
                           }
                       }
                   },
                   [&](const RegressionBand& r) {
                       if (output_dim < 1) throw PropertyError("regression_band: network has no outputs");
                       if (!(r.max_dev >= 0.0)) throw PropertyError("regression_band: max_dev must be non-negative");
                   },
               },
               prop);
}

bool property_holds(const OutputProperty& prop, std::span<const double> y) {
    return std::visit(overloaded{
                          [&](const Classification& c) {
                              for (std::size_t o = 0; o < y.size(); ++o) {
                                  if (o != c.true_label && !(y[c.true_label] > y[o])) return false;
                              }
                              return true;
                          },
                          [&](const LinearSafe& s) {
                              for (const auto& row : s.rows) {
                                  const double v = std::inner_product(row.coeffs.begin(), row.coeffs.end(), y.begin(), 0.0);
                                  bool ok = false;
                                  switch (row.comparison) {
                                      case Comparison::Less:
                                          ok = v < row.rhs;
                                          break;
                                      case Comparison::LessEqual:
                                          ok = v <= row.rhs;
                                          break;
                                      case Comparison::Greater:
                                          ok = v > row.rhs;
                                          break;
                                      case Comparison::GreaterEqual:
                                          ok = v >= row.rhs;
                                          break;
                                  }
                                  if (!ok) return false;
                              }
                              return true;
                          },
                          [&](const RegressionBand& r) { return std::abs(y[0] - r.center_output) <= r.max_dev; },
                      },
                      prop);
}

LinearExpression pad(const LinearExpression& expr, std::size_t num_vars) {
    if (expr.dim() > num_vars) throw DimensionError("pad: expression wider than the LP");
    LinearExpression out = expr;
    out.coeffs.resize(num_vars, 0.0);
    return out;
}

namespace {

// Rows x_i - c_i * t = offset_i tying every input to a scalar auxiliary t.
RegionEncoding scalar_family(std::span<const double> center, bool brightness, const ConcreteInterval& param) {
    const std::size_t d = center.size();
    RegionEncoding enc;
    std::vector<double> lo(d);
    std::vector<double> hi(d);
    for (std::size_t i = 0; i < d; ++i) {
        if (brightness) {
            lo[i] = center[i] + param.lo;
            hi[i] = center[i] + param.hi;
        } else {
            const double a = center[i] * param.lo;
            const double b = center[i] * param.hi;
            lo[i] = std::min(a, b);
            hi[i] = std::max(a, b);
        }
    }
    enc.box = InputBox(std::move(lo), std::move(hi));
    enc.aux_lower = {param.lo};
    enc.aux_upper = {param.hi};
    for (std::size_t i = 0; i < d; ++i) {
        LinearExpression row = LinearExpression::zero(d + 1);
        row.coeffs[i] = 1.0;
        row.coeffs[d] = brightness ? -1.0 : -center[i];
        enc.rows.push_back({std::move(row), lp::Relation::Equal, brightness ? center[i] : 0.0});
    }
    return enc;
}

}  // namespace

RegionEncoding region_to_box(const InputRegion& region) {
    validate_region(region);
    return std::visit(
        overloaded{
            [](const LInfRegion& r) {
                RegionEncoding enc;
                enc.box = InputBox::around(r.center, r.eps);
                return enc;
            },
            [](const L1Region& r) {
                const std::size_t d = r.center.size();
                RegionEncoding enc;
                enc.box = InputBox::around(r.center, r.eps);
                enc.aux_lower.assign(d, 0.0);
                enc.aux_upper.assign(d, r.eps);
                LinearExpression budget = LinearExpression::zero(2 * d);
                for (std::size_t i = 0; i < d; ++i) {
                    // t_i >= x_i - c_i  and  t_i >= c_i - x_i
                    LinearExpression above = LinearExpression::zero(2 * d);
                    above.coeffs[d + i] = 1.0;
                    above.coeffs[i] = -1.0;
                    enc.rows.push_back({above, lp::Relation::GreaterEqual, -r.center[i]});
                    LinearExpression below = LinearExpression::zero(2 * d);
                    below.coeffs[d + i] = 1.0;
                    below.coeffs[i] = 1.0;
                    enc.rows.push_back({below, lp::Relation::GreaterEqual, r.center[i]});
                    budget.coeffs[d + i] = 1.0;
                }
                enc.rows.push_back({std::move(budget), lp::Relation::LessEqual, r.eps});
                return enc;
            },
            [](const BrightnessRegion& r) { return scalar_family(r.center, true, {-r.eps, r.eps}); },
            [](const ContrastRegion& r) { return scalar_family(r.center, false, {r.lo_scale, r.hi_scale}); },
            [](const BoxRegion& r) {
                RegionEncoding enc;
                enc.box = InputBox(r.lo, r.hi);
                return enc;
            },
        },
        region);
}

RegionEncoding region_slice(const InputRegion& region, const ConcreteInterval& slice) {
    validate_region(region);
    if (const auto* b = std::get_if<BrightnessRegion>(&region)) return scalar_family(b->center, true, slice);
    if (const auto* c = std::get_if<ContrastRegion>(&region)) return scalar_family(c->center, false, slice);
    throw PropertyError("region_slice: only brightness and contrast regions have a scalar parameter");
}

lp::LinearProgram ViolationSystem::program() const {
    lp::LinearProgram p;
    p.objective = pad(violation, lower.size());
    p.sense = lp::Sense::Minimize;
    p.constraints = rows;
    p.lower = lower;
    p.upper = upper;
    return p;
}

lp::LinearProgram ViolationSystem::feasibility_program() const {
    lp::LinearProgram p = program();
    p.constraints.push_back({pad(violation, lower.size()), lp::Relation::LessEqual, 0.0});
    p.objective = LinearExpression::zero(lower.size());
    return p;
}

namespace {

// Sum of c_j * output_j using the lower or upper equation that bounds the
// product from the requested side.
LinearExpression combine(const std::vector<double>& c, const std::vector<BoundPair>& outputs, bool upper) {
    LinearExpression e = LinearExpression::zero(outputs.front().eq_low.dim());
    for (std::size_t j = 0; j < c.size(); ++j) {
        if (c[j] == 0.0) continue;
        const bool take_up = (c[j] > 0.0) == upper;
        e.add_scaled(c[j], take_up ? outputs[j].eq_up : outputs[j].eq_low);
    }
    return e;
}

}  // namespace

std::vector<ViolationSystem> build_violation_systems(const OutputProperty& prop, const PropagationTrace& trace,
                                                     const RegionEncoding& region,
                                                     std::span<const SplitRow> split_rows) {
    const auto& out = trace.output;
    if (out.empty()) throw PropertyError("violation systems: trace has no outputs");
    validate_property(prop, out.size());
    const std::size_t n_out = out.size();
    const std::size_t nv = region.num_vars();

    ViolationSystem base;
    base.rows = region.rows;
    for (const auto& s : split_rows) {
        base.rows.push_back({pad(s.expr, nv), s.non_negative ? lp::Relation::GreaterEqual : lp::Relation::LessEqual, 0.0});
    }
    base.lower = region.box.lo;
    base.lower.insert(base.lower.end(), region.aux_lower.begin(), region.aux_lower.end());
    base.upper = region.box.hi;
    base.upper.insert(base.upper.end(), region.aux_upper.begin(), region.aux_upper.end());

    std::vector<ViolationSystem> systems;
    auto add = [&](std::string label, LinearExpression violation, std::vector<double> direction) {
        ViolationSystem s = base;
        s.label = std::move(label);
        s.violation = std::move(violation);
        s.output_direction = std::move(direction);
        systems.push_back(std::move(s));
    };

    std::visit(overloaded{
                   [&](const Classification& c) {
                       const std::size_t t = c.true_label;
                       for (std::size_t o = 0; o < n_out; ++o) {
                           if (o == t) continue;
                           // eq_low^t - eq_up^o <= 0: class o may reach class t.
                           LinearExpression v = out[t].eq_low;
                           v.add_scaled(-1.0, out[o].eq_up);
                           std::vector<double> dir(n_out, 0.0);
                           dir[t] = 1.0;
                           dir[o] = -1.0;
                           add("class " + std::to_string(o) + " vs " + std::to_string(t), std::move(v), std::move(dir));
                       }
                   },
                   [&](const LinearSafe& s) {
                       for (std::size_t i = 0; i < s.rows.size(); ++i) {
                           const auto& row = s.rows[i];
                           const bool bounded_above = row.comparison == Comparison::Less || row.comparison == Comparison::LessEqual;
                           LinearExpression v;
                           if (bounded_above) {
                               // violated when c.y >= rhs: rhs - upper(c.y) <= 0
                               v = combine(row.coeffs, out, true).scaled(-1.0);
                               v.constant += row.rhs;
                           } else {
                               // violated when c.y <= rhs: lower(c.y) - rhs <= 0
                               v = combine(row.coeffs, out, false);
                               v.constant -= row.rhs;
                           }
                           add("row " + std::to_string(i), std::move(v), row.coeffs);
                       }
                   },
                   [&](const RegressionBand& r) {
                       std::vector<double> dir(n_out, 0.0);
                       dir[0] = 1.0;
                       LinearExpression above = out[0].eq_up.scaled(-1.0);
                       above.constant += r.center_output + r.max_dev;
                       add("above band", std::move(above), dir);
                       LinearExpression below = out[0].eq_low;
                       below.constant -= r.center_output - r.max_dev;
                       dir[0] = -1.0;
                       add("below band", std::move(below), dir);
                   },
               },
               prop);
    return systems;
}

InputRegion normalize_region(const InputRegion& region, const Normalization& norm) {
    auto map_box = [&](std::vector<double> lo, std::vector<double> hi) {
        if (lo.size() > norm.mean.size() || lo.size() > norm.range.size()) {
            throw PropertyError("normalization: region wider than the normalization metadata");
        }
        for (std::size_t i = 0; i < lo.size(); ++i) {
            // NNet inputs are clipped to [input_min, input_max] before normalization.
            if (i < norm.input_min.size()) lo[i] = std::max(lo[i], norm.input_min[i]);
            if (i < norm.input_max.size()) hi[i] = std::min(hi[i], norm.input_max[i]);
            if (lo[i] > hi[i]) {
                throw PropertyError("normalization: region misses the input range on axis " + std::to_string(i));
            }
            const double a = norm.normalize(i, lo[i]);
            const double b = norm.normalize(i, hi[i]);
            lo[i] = std::min(a, b);
            hi[i] = std::max(a, b);
        }
        return InputRegion{BoxRegion{std::move(lo), std::move(hi)}};
    };
    if (const auto* b = std::get_if<BoxRegion>(&region)) return map_box(b->lo, b->hi);
    if (const auto* r = std::get_if<LInfRegion>(&region)) {
        const auto box = InputBox::around(r->center, r->eps);
        return map_box(box.lo, box.hi);
    }
    throw PropertyError("normalization: only box and linf regions can be given in raw units; "
                        "supply normalized coordinates and set \"normalized\": true");
}

// ---------------------------------------------------------------------------
// JSON

namespace {

[[noreturn]] void schema_error(const std::string& path, const std::string& what) {
    throw PropertyError("property schema: " + path + ": " + what);
}

const json& member(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) schema_error(path, "expected an object");
    if (!obj.contains(key)) schema_error(path + "." + key, "missing");
    return obj.at(key);
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) schema_error(path, "expected a number");
    return j.get<double>();
}

std::vector<double> numbers(const json& j, const std::string& path) {
    if (!j.is_array()) schema_error(path, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], path + "[" + std::to_string(i) + "]"));
    return v;
}

// Exactly one key, naming the variant.
std::pair<std::string, const json*> tagged(const json& j, const std::string& path) {
    if (!j.is_object()) schema_error(path, "expected an object");
    if (j.size() != 1) schema_error(path, "expected exactly one kind, found " + std::to_string(j.size()));
    return {j.begin().key(), &j.begin().value()};
}

void only_keys(const json& j, std::initializer_list<const char*> keys, const std::string& path) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
            schema_error(path + "." + it.key(), "unknown field");
        }
    }
}

Comparison comparison(const json& j, const std::string& path) {
    if (!j.is_string()) schema_error(path, "expected one of \"<\", \"<=\", \">\", \">=\"");
    const auto s = j.get<std::string>();
    if (s == "<") return Comparison::Less;
    if (s == "<=") return Comparison::LessEqual;
    if (s == ">") return Comparison::Greater;
    if (s == ">=") return Comparison::GreaterEqual;
    schema_error(path, "unknown relation '" + s + "'");
}

}  // namespace

PropertySpec parse_property(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw PropertyError(std::string("property: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) schema_error("$", "expected an object");
    only_keys(doc, {"region", "property", "normalized"}, "$");

    PropertySpec spec;
    {
        const auto [kind, body] = tagged(member(doc, "region", "$"), "$.region");
        const std::string p = "$.region." + kind;
        if (kind == "linf" || kind == "l1" || kind == "brightness") {
            only_keys(*body, {"center", "eps"}, p);
            auto center = numbers(member(*body, "center", p), p + ".center");
            const double eps = number(member(*body, "eps", p), p + ".eps");
            if (eps < 0.0) schema_error(p + ".eps", "must be non-negative");
            if (kind == "linf") {
                spec.region = LInfRegion{std::move(center), eps};
            } else if (kind == "l1") {
                spec.region = L1Region{std::move(center), eps};
            } else {
                spec.region = BrightnessRegion{std::move(center), eps};
            }
        } else if (kind == "contrast") {
            only_keys(*body, {"center", "lo_scale", "hi_scale"}, p);
            ContrastRegion r;
            r.center = numbers(member(*body, "center", p), p + ".center");
            r.lo_scale = number(member(*body, "lo_scale", p), p + ".lo_scale");
            r.hi_scale = number(member(*body, "hi_scale", p), p + ".hi_scale");
            if (r.lo_scale <= 0.0) schema_error(p + ".lo_scale", "must be positive");
            if (r.lo_scale > r.hi_scale) schema_error(p + ".hi_scale", "must not be below lo_scale");
            spec.region = std::move(r);
        } else if (kind == "box") {
            only_keys(*body, {"lo", "hi"}, p);
            BoxRegion r{numbers(member(*body, "lo", p), p + ".lo"), numbers(member(*body, "hi", p), p + ".hi")};
            if (r.lo.size() != r.hi.size()) schema_error(p + ".hi", "length differs from lo");
            for (std::size_t i = 0; i < r.lo.size(); ++i) {
                if (r.lo[i] > r.hi[i]) schema_error(p + ".lo[" + std::to_string(i) + "]", "exceeds hi");
            }
            spec.region = std::move(r);
        } else {
            schema_error(p, "unknown region kind (expected linf, l1, brightness, contrast or box)");
        }
        if (region_dim(spec.region) == 0) schema_error(p, "empty input vector");
    }
    {
        const auto [kind, body] = tagged(member(doc, "property", "$"), "$.property");
        const std::string p = "$.property." + kind;
        if (kind == "classification") {
            only_keys(*body, {"true_label"}, p);
            const auto& label = member(*body, "true_label", p);
            if (!label.is_number_unsigned()) schema_error(p + ".true_label", "expected a non-negative integer");
            spec.property = Classification{label.get<std::size_t>()};
        } else if (kind == "linear_safe") {
            only_keys(*body, {"rows"}, p);
            const auto& rows = member(*body, "rows", p);
            if (!rows.is_array() || rows.empty()) schema_error(p + ".rows", "expected a non-empty array");
            LinearSafe s;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const std::string rp = p + ".rows[" + std::to_string(i) + "]";
                only_keys(rows[i], {"coeffs", "relation", "rhs"}, rp);
                s.rows.push_back({numbers(member(rows[i], "coeffs", rp), rp + ".coeffs"),
                                  comparison(member(rows[i], "relation", rp), rp + ".relation"),
                                  number(member(rows[i], "rhs", rp), rp + ".rhs")});
            }
            spec.property = std::move(s);
        } else if (kind == "regression_band") {
            only_keys(*body, {"center_output", "max_dev"}, p);
            RegressionBand r{number(member(*body, "center_output", p), p + ".center_output"),
                             number(member(*body, "max_dev", p), p + ".max_dev")};
            if (r.max_dev < 0.0) schema_error(p + ".max_dev", "must be non-negative");
            spec.property = r;
        } else {
            schema_error(p, "unknown property kind (expected classification, linear_safe or regression_band)");
        }
    }
    if (doc.contains("normalized")) {
        if (!doc["normalized"].is_boolean()) schema_error("$.normalized", "expected a boolean");
        spec.normalized = doc["normalized"].get<bool>();
    }
    return spec;
}

std::string write_property(const PropertySpec& spec) {
    json doc;
    std::visit(overloaded{
                   [&](const LInfRegion& r) { doc["region"]["linf"] = {{"center", r.center}, {"eps", r.eps}}; },
                   [&](const L1Region& r) { doc["region"]["l1"] = {{"center", r.center}, {"eps", r.eps}}; },
                   [&](const BrightnessRegion& r) { doc["region"]["brightness"] = {{"center", r.center}, {"eps", r.eps}}; },
                   [&](const ContrastRegion& r) {
                       doc["region"]["contrast"] = {{"center", r.center}, {"lo_scale", r.lo_scale}, {"hi_scale", r.hi_scale}};
                   },
                   [&](const BoxRegion& r) { doc["region"]["box"] = {{"lo", r.lo}, {"hi", r.hi}}; },
               },
               spec.region);
    std::visit(overloaded{
                   [&](const Classification& c) { doc["property"]["classification"] = {{"true_label", c.true_label}}; },
                   [&](const LinearSafe& s) {
                       json rows = json::array();
                       for (const auto& r : s.rows) {
                           rows.push_back({{"coeffs", r.coeffs}, {"relation", to_string(r.comparison)}, {"rhs", r.rhs}});
                       }
                       doc["property"]["linear_safe"] = {{"rows", rows}};
                   },
                   [&](const RegressionBand& r) {
                       doc["property"]["regression_band"] = {{"center_output", r.center_output}, {"max_dev", r.max_dev}};
                   },
               },
               spec.property);
    doc["normalized"] = spec.normalized;
    return doc.dump(2);
}

}  // namespace symrelax
