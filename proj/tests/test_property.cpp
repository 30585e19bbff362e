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

#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

namespace symrelax {
namespace {

using testing::fixture;

TEST(ParseProperty, LinfClassification) {
    const auto spec =
        parse_property(R"({"region":{"linf":{"center":[0,0],"eps":0.1}},"property":{"classification":{"true_label":1}}})");
    const auto& r = std::get<LInfRegion>(spec.region);
    EXPECT_EQ(r.center, (std::vector<double>{0.0, 0.0}));
    EXPECT_EQ(r.eps, 0.1);
    EXPECT_EQ(std::get<Classification>(spec.property).true_label, 1u);
    EXPECT_FALSE(spec.normalized);
}

TEST(ParseProperty, UnknownNormNamesTheField) {
    try {
        parse_property(R"({"region":{"l3":{"center":[0],"eps":1}},"property":{"classification":{"true_label":0}}})");
        FAIL();
    } catch (const PropertyError& e) {
        EXPECT_NE(std::string(e.what()).find("$.region.l3"), std::string::npos) << e.what();
    }
}

TEST(ParseProperty, AcasStyleCustomBox) {
    const auto spec = parse_property(read_file(fixture("acas_shaped.property.json")));
    const auto& box = std::get<BoxRegion>(spec.region);
    EXPECT_EQ(box.lo.size(), 5u);
    const auto& rows = std::get<LinearSafe>(spec.property).rows;
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].comparison, Comparison::LessEqual);
    EXPECT_EQ(rows[1].comparison, Comparison::GreaterEqual);
    EXPECT_EQ(rows[1].rhs, -100.0);
}

TEST(ParseProperty, DocumentedFixtures) {
    std::size_t valid = 0, invalid = 0;
    for (const auto& entry : std::filesystem::directory_iterator(fixture("properties"))) {
        const std::string name = entry.path().filename().string();
        const std::string text = read_file(entry.path().string());
        if (name.rfind("valid_", 0) == 0) {
            EXPECT_NO_THROW(parse_property(text)) << name;
            ++valid;
        } else if (name.rfind("invalid_", 0) == 0) {
            EXPECT_THROW(parse_property(text), PropertyError) << name;
            ++invalid;
        }
    }
    EXPECT_EQ(valid, 5u);
    EXPECT_EQ(invalid, 9u);
}

TEST(ParseProperty, RoundTrip) {
    for (const auto& entry : std::filesystem::directory_iterator(fixture("properties"))) {
        if (entry.path().filename().string().rfind("valid_", 0) != 0) continue;
        const auto spec = parse_property(read_file(entry.path().string()));
        const std::string once = write_property(spec);
        EXPECT_EQ(write_property(parse_property(once)), once);
    }
}

TEST(RegionToBox, LinfHasNoRows) {
    const auto enc = region_to_box(LInfRegion{{0.0, 0.0}, 1.0});
    EXPECT_EQ(enc.box.lo, (std::vector<double>{-1.0, -1.0}));
    EXPECT_EQ(enc.box.hi, (std::vector<double>{1.0, 1.0}));
    EXPECT_TRUE(enc.rows.empty());
    EXPECT_EQ(enc.num_vars(), 2u);
}

TEST(RegionToBox, L1HasFiveRowsOverTwoAuxiliaries) {
    const auto enc = region_to_box(L1Region{{0.0, 0.0}, 1.0});
    EXPECT_EQ(enc.box.lo, (std::vector<double>{-1.0, -1.0}));
    EXPECT_EQ(enc.rows.size(), 5u);
    EXPECT_EQ(enc.aux_lower, (std::vector<double>{0.0, 0.0}));
    EXPECT_EQ(enc.aux_upper, (std::vector<double>{1.0, 1.0}));
    EXPECT_EQ(enc.num_vars(), 4u);
}

TEST(RegionToBox, BrightnessTiesInputsToOneOffset) {
    const auto enc = region_to_box(BrightnessRegion{{0.2, 0.4, 0.6}, 0.1});
    EXPECT_EQ(enc.rows.size(), 3u);
    EXPECT_EQ(enc.num_vars(), 4u);
    EXPECT_NEAR(enc.box.lo[1], 0.3, 1e-15);
    EXPECT_NEAR(enc.box.hi[1], 0.5, 1e-15);
}

TEST(RegionToBox, BrightnessZeroEpsIsAPoint) {
    const auto enc = region_to_box(BrightnessRegion{{0.2, 0.4}, 0.0});
    EXPECT_EQ(enc.box.lo, enc.box.hi);
}

TEST(RegionToBox, ContrastEnvelope) {
    const auto enc = region_to_box(ContrastRegion{{0.5, -1.0}, 0.5, 2.0});
    EXPECT_EQ(enc.box.lo, (std::vector<double>{0.25, -2.0}));
    EXPECT_EQ(enc.box.hi, (std::vector<double>{1.0, -0.5}));
    EXPECT_THROW(region_to_box(ContrastRegion{{0.5}, 0.0, 2.0}), PropertyError);
    EXPECT_THROW(region_to_box(ContrastRegion{{0.5}, 2.0, 1.0}), PropertyError);
}

TEST(RegionToBox, NegativeEpsRejected) {
    EXPECT_THROW(region_to_box(LInfRegion{{0.0}, -1.0}), PropertyError);
    EXPECT_THROW(region_to_box(L1Region{{0.0}, -1.0}), PropertyError);
}

// Every point satisfying the LP rows lies in the propagation box and in the region.
TEST(RegionToBox, LpPointsLieInRegion) {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const std::vector<InputRegion> regions{L1Region{{0.1, -0.3, 0.5}, 0.4}, BrightnessRegion{{0.1, -0.3, 0.5}, 0.2},
                                           ContrastRegion{{0.1, -0.3, 0.5}, 0.7, 1.3}, LInfRegion{{0.0, 0.0, 0.0}, 0.2}};
    for (const auto& region : regions) {
        const auto enc = region_to_box(region);
        for (int trial = 0; trial < 30; ++trial) {
            lp::LinearProgram p;
            std::vector<double> c(enc.num_vars(), 0.0);
            for (std::size_t i = 0; i < 3; ++i) c[i] = u(rng);
            p.objective = LinearExpression(c, 0.0);
            p.constraints = enc.rows;
            p.lower = enc.box.lo;
            p.lower.insert(p.lower.end(), enc.aux_lower.begin(), enc.aux_lower.end());
            p.upper = enc.box.hi;
            p.upper.insert(p.upper.end(), enc.aux_upper.begin(), enc.aux_upper.end());
            const auto out = lp::solve(p);
            ASSERT_TRUE(out.optimal());
            const std::vector<double> x(out.solution.begin(), out.solution.begin() + 3);
            EXPECT_TRUE(enc.box.contains(x, 1e-9));
            EXPECT_TRUE(region_contains(region, x)) << region.index();
        }
    }
}

TEST(RegionContains, Definitions) {
    const std::vector<double> c{0.0, 0.0};
    EXPECT_TRUE(region_contains(LInfRegion{c, 0.5}, std::vector<double>{0.5, -0.5}));
    EXPECT_FALSE(region_contains(LInfRegion{c, 0.5}, std::vector<double>{0.6, 0.0}));
    EXPECT_TRUE(region_contains(L1Region{c, 0.5}, std::vector<double>{0.25, -0.25}));
    EXPECT_FALSE(region_contains(L1Region{c, 0.5}, std::vector<double>{0.5, -0.5}));
    EXPECT_TRUE(region_contains(BrightnessRegion{{0.1, 0.2}, 0.1}, std::vector<double>{0.15, 0.25}));
    EXPECT_FALSE(region_contains(BrightnessRegion{{0.1, 0.2}, 0.1}, std::vector<double>{0.15, 0.2}));
    EXPECT_TRUE(region_contains(ContrastRegion{{0.1, 0.2}, 0.5, 1.0}, std::vector<double>{0.05, 0.1}));
    EXPECT_FALSE(region_contains(ContrastRegion{{0.1, 0.2}, 0.5, 1.0}, std::vector<double>{0.2, 0.4}));
    EXPECT_FALSE(region_contains(LInfRegion{c, 0.5}, std::vector<double>{0.0}));
}

TEST(PropertyHolds, StrictClassificationCountsTiesAsViolations) {
    const OutputProperty p = Classification{1};
    EXPECT_TRUE(property_holds(p, std::vector<double>{0.0, 1.0, 0.5}));
    EXPECT_FALSE(property_holds(p, std::vector<double>{1.0, 1.0, 0.5}));
    const OutputProperty band = RegressionBand{0.0, 0.5};
    EXPECT_TRUE(property_holds(band, std::vector<double>{0.5}));
    EXPECT_FALSE(property_holds(band, std::vector<double>{-0.51}));
}

TEST(ViolationSystems, OnePerWrongClass) {
    std::vector<Layer> layers{DenseLayer{Matrix(10, 2, 0.1), std::vector<double>(10, 0.0)}};
    const Network net(2, std::move(layers));
    const auto enc = region_to_box(LInfRegion{{0.0, 0.0}, 0.1});
    const auto systems = build_violation_systems(Classification{7}, slr_forward(net, enc.box), enc);
    EXPECT_EQ(systems.size(), 9u);
    EXPECT_THROW(build_violation_systems(Classification{10}, slr_forward(net, enc.box), enc), PropertyError);
}

TEST(ViolationSystems, LinearSafeGreaterIsOneLowerBoundRow) {
    const Network net = load_network(fixture("two_by_three.json"));
    const auto spec = parse_property(read_file(fixture("two_by_three_safe.property.json")));
    const auto enc = region_to_box(spec.region);
    const auto trace = slr_forward(net, enc.box);
    const auto systems = build_violation_systems(spec.property, trace, enc);
    ASSERT_EQ(systems.size(), 1u);
    // violation = Eq_low - 3.3, feasible iff Eq_low <= 3.3 somewhere
    LinearExpression expect = trace.output[0].eq_low;
    expect.constant -= 3.3;
    EXPECT_EQ(systems[0].violation, expect);
    EXPECT_EQ(systems[0].output_direction, (std::vector<double>{1.0}));
}

TEST(ViolationSystems, RegressionBandHasTwoSides) {
    const Network net = load_network(fixture("x_minus_x.json"));
    const auto enc = region_to_box(BoxRegion{{0.0}, {1.0}});
    const auto systems = build_violation_systems(RegressionBand{0.0, 0.5}, slr_forward(net, enc.box), enc);
    EXPECT_EQ(systems.size(), 2u);
}

TEST(ViolationSystems, SplitRowsAppended) {
    const Network net = load_network(fixture("two_by_three.json"));
    const auto enc = region_to_box(BoxRegion{{0.0, 0.0}, {0.5, 1.0}});
    const std::vector<SplitRow> rows{{LinearExpression({2.0, -3.0}, 0.0), true}};
    const auto systems = build_violation_systems(LinearSafe{{{{1.0}, Comparison::Greater, 3.3}}},
                                                 slr_forward(net, enc.box), enc, rows);
    ASSERT_EQ(systems[0].rows.size(), 1u);
    EXPECT_EQ(systems[0].rows[0].relation, lp::Relation::GreaterEqual);
}

TEST(NormalizeRegion, BoxAndLinfOnly) {
    Normalization n;
    n.input_min = {0.0, -10.0};
    n.input_max = {100.0, 10.0};
    n.mean = {50.0, 0.0, 0.0};
    n.range = {100.0, 20.0, 1.0};
    const auto r = normalize_region(BoxRegion{{25.0, -20.0}, {75.0, 5.0}}, n);
    const auto& b = std::get<BoxRegion>(r);
    EXPECT_EQ(b.lo, (std::vector<double>{-0.25, -0.5}));
    EXPECT_EQ(b.hi, (std::vector<double>{0.25, 0.25}));
    EXPECT_NO_THROW(normalize_region(LInfRegion{{50.0, 0.0}, 1.0}, n));
    EXPECT_THROW(normalize_region(L1Region{{50.0, 0.0}, 1.0}, n), PropertyError);
}

}  // namespace
}  // namespace symrelax
