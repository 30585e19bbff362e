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

#include "symrelax/network.hpp"
#include "symrelax/propagation.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <random>

namespace symrelax {
namespace {

using testing::fixture;

constexpr const char* kMinimalNnet =
    "// minimal network\n"
    "2,2,1,2,\n"
    "2,2,1,\n"
    "0,\n"
    "-1,-1,\n"
    "1,1,\n"
    "0,0,0,\n"
    "1,1,1,\n"
    "1,2,\n"
    "3,4,\n"
    "0.5,\n"
    "-0.5,\n"
    "1,-1,\n"
    "0.25,\n";

TEST(ParseNnet, MinimalFile) {
    const Network net = parse_nnet(kMinimalNnet);
    EXPECT_EQ(net.input_dim(), 2u);
    EXPECT_EQ(net.output_dim(), 1u);
    ASSERT_EQ(net.layers().size(), 3u);
    EXPECT_TRUE(std::holds_alternative<DenseLayer>(net.layers()[0]));
    EXPECT_TRUE(std::holds_alternative<ReluLayer>(net.layers()[1]));
    EXPECT_TRUE(std::holds_alternative<DenseLayer>(net.layers()[2]));
    const auto& d0 = std::get<DenseLayer>(net.layers()[0]);
    EXPECT_EQ(d0.weights, Matrix::from_rows({{1, 2}, {3, 4}}));
    EXPECT_EQ(d0.bias, (std::vector<double>{0.5, -0.5}));
    EXPECT_EQ(net.relu_count(), 2u);
    ASSERT_TRUE(net.normalization());
    EXPECT_EQ(net.normalization()->input_min, (std::vector<double>{-1, -1}));
    const std::vector<double> x{1.0, 0.0};
    // relu(1.5), relu(2.5) -> 1.5 - 2.5 + 0.25
    EXPECT_DOUBLE_EQ(forward(net, x)[0], -0.75);
}

TEST(ParseNnet, ShortMinsLineNamesTheLine) {
    const std::string text =
        "// five inputs declared, four mins given\n"
        "1,5,1,5,\n"
        "5,1,\n"
        "0,\n"
        "0,0,0,0,\n"
        "1,1,1,1,1,\n"
        "0,0,0,0,0,0,\n"
        "1,1,1,1,1,1,\n"
        "1,1,1,1,1,\n"
        "0,\n";
    try {
        parse_nnet(text);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 5u);
        EXPECT_NE(std::string(e.what()).find("line 5"), std::string::npos) << e.what();
    }
}

TEST(ParseNnet, NonNumericTokenNamesTheLine) {
    std::string text = kMinimalNnet;
    text.replace(text.find("3,4,"), 4, "3,x,");
    try {
        parse_nnet(text);
        FAIL() << "expected a parse error";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 10u);
    }
}

TEST(ParseNnet, InconsistentSizesRejected) {
    std::string text = kMinimalNnet;
    text.replace(text.find("2,2,1,\n"), 7, "2,3,1,\n");
    EXPECT_THROW(parse_nnet(text), ParseError);
}

TEST(ParseNnet, TruncatedBodyRejected) {
    std::string text = kMinimalNnet;
    text.erase(text.find("0.25,\n"));
    EXPECT_THROW(parse_nnet(text), ParseError);
}

TEST(ParseNnet, AcasShapedFixtureHas300Relus) {
    const Network net = load_nnet(fixture("acas_shaped.nnet"));
    EXPECT_EQ(net.input_dim(), 5u);
    EXPECT_EQ(net.output_dim(), 5u);
    EXPECT_EQ(net.relu_count(), 300u);
    EXPECT_EQ(net.relu_layers().size(), 6u);
}

TEST(WriteNnet, RoundTripIsBitExact) {
    const Network net = load_nnet(fixture("acas_shaped.nnet"));
    const Network again = parse_nnet(write_nnet(net));
    ASSERT_EQ(again.layers().size(), net.layers().size());
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        if (const auto* d = std::get_if<DenseLayer>(&net.layers()[i])) {
            const auto& e = std::get<DenseLayer>(again.layers()[i]);
            EXPECT_EQ(d->weights, e.weights);
            EXPECT_EQ(d->bias, e.bias);
        }
    }
    EXPECT_EQ(again.normalization()->mean, net.normalization()->mean);
    EXPECT_EQ(again.normalization()->range, net.normalization()->range);
    EXPECT_EQ(write_nnet(again), write_nnet(net));
}

TEST(NetworkJson, RoundTrip) {
    const Network net = load_network(fixture("two_by_three.json"));
    EXPECT_EQ(net.relu_count(), 3u);
    const Network again = parse_network_json(write_network_json(net));
    EXPECT_EQ(write_network_json(again), write_network_json(net));
    const std::vector<double> x{0.25, 1.0};
    EXPECT_EQ(forward(net, x), forward(again, x));
}

TEST(NetworkJson, ErrorsCarryJsonPath) {
    try {
        parse_network_json(R"({"input_dim": 2, "layers": [{"type": "dense", "weights": [[1, 2]], "bias": [0]}, {"type": "tanh"}]})");
        FAIL();
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find("$.layers[1].type"), std::string::npos) << e.what();
    }
}

TEST(Network, AlternationAndFinalLayerEnforced) {
    DenseLayer d{Matrix::from_rows({{1.0}}), {0.0}};
    EXPECT_THROW(Network(1, {ReluLayer{}, d}), NetworkError);
    EXPECT_THROW(Network(1, {d, ReluLayer{}, ReluLayer{}, d}), NetworkError);
    EXPECT_THROW(Network(1, {d, ReluLayer{}}), NetworkError);
    EXPECT_THROW(Network(2, {d}), NetworkError);
}

TEST(Forward, Examples) {
    const Network ident(2, {DenseLayer{Matrix::identity(2), {0.0, 0.0}}});
    const std::vector<double> x12{1.0, 2.0};
    EXPECT_EQ(forward(ident, x12), x12);

    const Network clamp(2, {DenseLayer{Matrix::from_rows({{2.0, -3.0}}), {0.0}}, ReluLayer{},
                            DenseLayer{Matrix::identity(1), {0.0}}});
    EXPECT_EQ(forward(clamp, std::vector<double>{0.0, 1.0})[0], 0.0);
    EXPECT_EQ(forward(clamp, std::vector<double>{0.5, 0.0})[0], 1.0);
    EXPECT_THROW(forward(clamp, std::vector<double>{0.5}), DimensionError);
}

TEST(Forward, ConvolutionMatchesHandComputation) {
    // 1x3x3 input, one 2x2 kernel, stride 1 -> 1x2x2 output.
    ConvLayer conv;
    conv.out_channels = 1;
    conv.in_channels = 1;
    conv.kernel_h = 2;
    conv.kernel_w = 2;
    conv.stride = 1;
    conv.kernels = {1.0, 2.0, 3.0, 4.0};
    conv.bias = {0.5};
    const Network net(9, {conv, ReluLayer{}, DenseLayer{Matrix::from_rows({{1, 1, 1, 1}}), {0.0}}},
                      GridShape{1, 3, 3});
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9};
    // Output cells: 1+4+12+20+.5, 2+6+15+24+.5, 4+10+21+32+.5, 5+12+24+36+.5
    const double expect = 37.5 + 47.5 + 67.5 + 77.5;
    EXPECT_DOUBLE_EQ(forward(net, x)[0], expect);
}

TEST(Forward, ChannelMajorFlattening) {
    ConvLayer conv;
    conv.out_channels = 2;
    conv.in_channels = 2;
    conv.kernel_h = 1;
    conv.kernel_w = 1;
    conv.stride = 1;
    conv.bias = {0.0, 0.0};
    conv.kernels = {0.0, 1.0, 1.0, 0.0};  // swap the two channels
    const Network net(4, {conv, DenseLayer{Matrix::identity(4), {0, 0, 0, 0}}}, GridShape{2, 2, 1});
    EXPECT_EQ(forward(net, std::vector<double>{1, 2, 3, 4}), (std::vector<double>{3, 4, 1, 2}));
}

TEST(ExactRange, NoReluMatchesCornerBounds) {
    const Network net(2, {DenseLayer{Matrix::from_rows({{1.0, -2.0}, {0.5, 0.5}}), {1.0, 0.0}}});
    const InputBox box({0.0, -1.0}, {1.0, 1.0});
    const auto r = exact_output_range(net, box);
    EXPECT_EQ(r.feasible_patterns, 1u);
    EXPECT_NEAR(r.outputs[0].lo, -1.0, 1e-9);
    EXPECT_NEAR(r.outputs[0].hi, 4.0, 1e-9);
    EXPECT_NEAR(r.outputs[1].lo, -0.5, 1e-9);
    EXPECT_NEAR(r.outputs[1].hi, 1.0, 1e-9);
}

TEST(ExactRange, SingleRelu) {
    const Network net(1, {DenseLayer{Matrix::identity(1), {0.0}}, ReluLayer{}, DenseLayer{Matrix::identity(1), {0.0}}});
    const auto r = exact_output_range(net, InputBox({-1.0}, {1.0}));
    EXPECT_NEAR(r.outputs[0].lo, 0.0, 1e-9);
    EXPECT_NEAR(r.outputs[0].hi, 1.0, 1e-9);
}

TEST(ExactRange, SmallNetFixture) {
    const Network net = load_network(fixture("two_by_three.json"));
    const auto r = exact_output_range(net, InputBox({0.0, 0.0}, {0.5, 4.0 / 3.0}));
    EXPECT_NEAR(r.outputs[0].lo, 3.5, 1e-9);
    EXPECT_NEAR(r.outputs[0].hi, 9.0, 1e-9);
}

TEST(ExactRange, AgreesWithDenseGrid) {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> w(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix w1(4, 2), w2(1, 4);
        std::vector<double> b1(4), b2(1);
        for (std::size_t r = 0; r < 4; ++r) {
            w1(r, 0) = w(rng);
            w1(r, 1) = w(rng);
            b1[r] = w(rng);
            w2(0, r) = w(rng);
        }
        b2[0] = w(rng);
        const Network net(2, {DenseLayer{w1, b1}, ReluLayer{}, DenseLayer{w2, b2}});
        const InputBox box({-1.0, -1.0}, {1.0, 1.0});
        const auto exact = exact_output_range(net, box);
        const auto grid = testing::grid_range(net, box, 200);
        EXPECT_NEAR(exact.outputs[0].lo, grid[0].lo, 1e-3);
        EXPECT_NEAR(exact.outputs[0].hi, grid[0].hi, 1e-3);
        EXPECT_LE(exact.outputs[0].lo, grid[0].lo + 1e-9);
        EXPECT_GE(exact.outputs[0].hi, grid[0].hi - 1e-9);
    }
}

TEST(ExactRange, ContainedInEveryPropagator) {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const Network net = testing::random_network(rng, {.max_relus = 10});
        const InputBox box = testing::random_box(rng, net.input_dim());
        const auto exact = exact_output_range(net, box).outputs;
        const auto nia = nia_forward(net, box);
        const auto sia = sia_forward(net, box).output_ranges();
        const auto slr = slr_forward(net, box).output_ranges();
        for (std::size_t j = 0; j < exact.size(); ++j) {
            EXPECT_TRUE(nia[j].contains(exact[j], 1e-9));
            EXPECT_TRUE(sia[j].contains(exact[j], 1e-9));
            EXPECT_TRUE(slr[j].contains(exact[j], 1e-9));
        }
    }
}

TEST(ExactRange, RefusesOverLimit) {
    std::vector<Layer> layers{DenseLayer{Matrix(20, 1, 1.0), std::vector<double>(20, 0.0)}, ReluLayer{},
                              DenseLayer{Matrix(1, 20, 1.0), {0.0}}};
    const Network net(1, std::move(layers));
    EXPECT_THROW(exact_output_range(net, InputBox({-1.0}, {1.0})), OracleLimitError);
}

}  // namespace
}  // namespace symrelax
