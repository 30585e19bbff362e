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

#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace symrelax {
namespace {

TEST(IntervalGradient, LinearNetworkIsChainRule) {
    const Matrix w1 = Matrix::from_rows({{1.0, 2.0}, {-1.0, 0.5}, {0.0, 3.0}});
    const Matrix w2 = Matrix::from_rows({{2.0, -1.0, 0.5}});
    const Network net(2, {DenseLayer{w1, {0, 0, 0}}, DenseLayer{w2, {1.0}}});
    const auto t = slr_forward(net, InputBox({-1, -1}, {1, 1}));
    const std::vector<double> obj{1.0};
    const auto g = interval_gradient(net, t, obj);
    // w2 * w1 = [2*1 + -1*-1 + 0, 2*2 + -1*0.5 + 0.5*3]
    EXPECT_NEAR(g.inputs[0].lo, 3.0, 1e-12);
    EXPECT_NEAR(g.inputs[0].hi, 3.0, 1e-12);
    EXPECT_NEAR(g.inputs[1].lo, 5.0, 1e-12);
    EXPECT_NEAR(g.inputs[1].hi, 5.0, 1e-12);
}

TEST(IntervalGradient, InactiveLayerZeroesUpstream) {
    const Network net(2, {DenseLayer{Matrix::from_rows({{1.0, 1.0}, {1.0, -1.0}}), {-10.0, -10.0}}, ReluLayer{},
                          DenseLayer{Matrix::from_rows({{1.0, 1.0}}), {0.0}}});
    const auto t = slr_forward(net, InputBox({-1, -1}, {1, 1}));
    const std::vector<double> obj{1.0};
    const auto g = interval_gradient(net, t, obj);
    for (const auto& iv : g.inputs) {
        EXPECT_EQ(iv.lo, 0.0);
        EXPECT_EQ(iv.hi, 0.0);
    }
    for (const auto& iv : g.nodes[0]) {
        EXPECT_EQ(iv.lo, 0.0);
        EXPECT_EQ(iv.hi, 0.0);
    }
}

TEST(IntervalGradient, RejectsWrongObjectiveWidth) {
    const Network net = load_network(testing::fixture("two_by_three.json"));
    const auto t = slr_forward(net, InputBox({0, 0}, {0.5, 1}));
    const std::vector<double> obj{1.0, 2.0};
    EXPECT_THROW(interval_gradient(net, t, obj), DimensionError);
}

// Central differences at points away from every kink.
TEST(IntervalGradient, ContainsFiniteDifferences) {
    std::mt19937_64 rng(77);
    const double h = 1e-5;
    int checked = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const Network net = testing::random_network(rng);
        const InputBox box = testing::random_box(rng, net.input_dim());
        const auto t = slr_forward(net, box);
        std::vector<double> obj(net.output_dim());
        for (auto& c : obj) c = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
        const auto g = interval_gradient(net, t, obj);
        auto objective = [&](const std::vector<double>& y) {
            double s = 0.0;
            for (std::size_t j = 0; j < y.size(); ++j) s += obj[j] * y[j];
            return s;
        };
        for (int s = 0; s < 30; ++s) {
            const auto x = testing::sample_point(rng, box);
            std::vector<double> pre;
            forward_recording(net, x, pre);
            if (std::any_of(pre.begin(), pre.end(), [](double z) { return std::abs(z) < 1e-3; })) continue;
            ++checked;
            for (std::size_t i = 0; i < x.size(); ++i) {
                auto xp = x, xm = x;
                xp[i] += h;
                xm[i] -= h;
                const double fd = (objective(forward(net, xp)) - objective(forward(net, xm))) / (2 * h);
                EXPECT_TRUE(g.inputs[i].contains(fd, 1e-6)) << to_string(g.inputs[i]) << " vs " << fd;
            }
            std::size_t flat = 0;
            for (std::size_t k = 0; k < t.relu_layers.size(); ++k) {
                for (std::size_t j = 0; j < t.relu_layers[k].status.size(); ++j, ++flat) {
                    const double fd = (objective(testing::forward_perturbed(net, x, flat, h)) -
                                       objective(testing::forward_perturbed(net, x, flat, -h))) /
                                      (2 * h);
                    EXPECT_TRUE(g.nodes[k][j].contains(fd, 1e-6)) << to_string(g.nodes[k][j]) << " vs " << fd;
                }
            }
        }
    }
    EXPECT_GT(checked, 300);
}

TEST(SplitPriority, GradientTimesRelaxationError) {
    const InputBox box({0.0, 0.0}, {0.5, 4.0 / 3.0});
    const LinearExpression e({2.0, -3.0}, 0.0);
    const auto pair = make_bound_pair(e, e, box);
    EXPECT_NEAR(split_priority({-2.0, 1.0}, pair), 2.0 * 0.8, 1e-9);
    EXPECT_EQ(split_priority({0.0, 0.0}, pair), 0.0);
}

TEST(SelectSplitNode, PicksHighestScoreAndBreaksTiesByOrder) {
    // Two identical straddling nodes feeding the output with weights 1 and 2.
    const Network net(1, {DenseLayer{Matrix::from_rows({{1.0}, {1.0}, {1.0}}), {0.0, 0.0, 0.0}}, ReluLayer{},
                          DenseLayer{Matrix::from_rows({{1.0, 2.0, 2.0}}), {0.0}}});
    const auto t = slr_forward(net, InputBox({-1.0}, {1.0}));
    ASSERT_EQ(t.overestimated.size(), 3u);
    const std::vector<double> obj{1.0};
    const auto g = interval_gradient(net, t, obj);
    const auto pick = select_split_node(t, g);
    ASSERT_TRUE(pick);
    EXPECT_EQ(*pick, (NodeId{1, 1}));
    const std::vector<double> neg{-1.0};
    EXPECT_EQ(*select_split_node(t, interval_gradient(net, t, neg)), (NodeId{1, 1}));
}

TEST(SelectSplitNode, NoneWithoutOverestimation) {
    const Network net(1, {DenseLayer{Matrix::from_rows({{1.0}}), {5.0}}, ReluLayer{},
                          DenseLayer{Matrix::from_rows({{1.0}}), {0.0}}});
    const auto t = slr_forward(net, InputBox({-1.0}, {1.0}));
    const std::vector<double> obj{1.0};
    EXPECT_FALSE(select_split_node(t, interval_gradient(net, t, obj)));
}

}  // namespace
}  // namespace symrelax
