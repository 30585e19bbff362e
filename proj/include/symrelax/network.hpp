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

#include "symrelax/interval.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace symrelax {

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Reads a whole file; throws IoError when it cannot be opened.
std::string read_file(const std::string& path);

class NetworkError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct DenseLayer {
    Matrix weights;  // out x in
    std::vector<double> bias;
};

// Valid (unpadded) convolution. Kernels are stored out x in x kh x kw,
// row-major; the input and output grids are flattened channel-major.
struct ConvLayer {
    std::size_t out_channels = 0;
    std::size_t in_channels = 0;
    std::size_t kernel_h = 0;
    std::size_t kernel_w = 0;
    std::size_t stride = 1;
    std::vector<double> kernels;
    std::vector<double> bias;

    // Filled in by Network from the incoming grid shape.
    std::size_t in_h = 0;
    std::size_t in_w = 0;

    std::size_t out_h() const noexcept { return (in_h - kernel_h) / stride + 1; }
    std::size_t out_w() const noexcept { return (in_w - kernel_w) / stride + 1; }
    std::size_t input_size() const noexcept { return in_channels * in_h * in_w; }
    std::size_t output_size() const noexcept { return out_channels * out_h() * out_w(); }
    double kernel(std::size_t oc, std::size_t ic, std::size_t ky, std::size_t kx) const noexcept {
        return kernels[((oc * in_channels + ic) * kernel_h + ky) * kernel_w + kx];
    }
};

struct ReluLayer {};

using Layer = std::variant<DenseLayer, ConvLayer, ReluLayer>;

// Per-input affine normalization metadata carried by NNet files.
struct Normalization {
    std::vector<double> input_min;
    std::vector<double> input_max;
    std::vector<double> mean;   // input means, then the output mean
    std::vector<double> range;  // input ranges, then the output range

    double normalize(std::size_t i, double raw) const { return (raw - mean[i]) / range[i]; }
};

// Channels x height x width.
using GridShape = std::array<std::size_t, 3>;

struct NodeId {
    std::size_t layer = 0;  // index of the ReLU layer in Network::layers()
    std::size_t node = 0;

    friend auto operator<=>(const NodeId&, const NodeId&) = default;
};

std::string to_string(const NodeId& id);

enum class Activation { Inactive, Active };

// One sign decision per ReLU node, in network order.
using ActivationPattern = std::vector<Activation>;

class Network {
public:
    Network(std::size_t input_dim, std::vector<Layer> layers, std::optional<GridShape> input_shape = std::nullopt,
            std::optional<Normalization> normalization = std::nullopt);

    std::size_t input_dim() const noexcept { return input_dim_; }
    std::size_t output_dim() const noexcept { return sizes_.back(); }
    const std::optional<GridShape>& input_shape() const noexcept { return input_shape_; }
    const std::vector<Layer>& layers() const noexcept { return layers_; }
    const std::optional<Normalization>& normalization() const noexcept { return normalization_; }

    // Width of the vector entering layer i; layer_input_size(layers().size()) is the output.
    std::size_t layer_input_size(std::size_t i) const noexcept { return sizes_[i]; }
    std::size_t layer_output_size(std::size_t i) const noexcept { return sizes_[i + 1]; }

    std::size_t relu_count() const noexcept { return relu_count_; }
    std::vector<std::size_t> relu_layers() const;
    // Position of the node in a flat ActivationPattern.
    std::size_t flat_index(const NodeId& id) const;

private:
    std::size_t input_dim_;
    std::vector<Layer> layers_;
    std::optional<GridShape> input_shape_;
    std::optional<Normalization> normalization_;
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> relu_offsets_;  // per layer, flat index of its first ReLU node
    std::size_t relu_count_ = 0;
};

std::vector<double> dense_apply(const DenseLayer& layer, std::span<const double> x);
std::vector<double> conv_apply(const ConvLayer& layer, std::span<const double> x);

// Concrete execution; x is already in normalized input space.
std::vector<double> forward(const Network& net, std::span<const double> x);

// Forward pass that records every ReLU pre-activation in network order.
std::vector<double> forward_recording(const Network& net, std::span<const double> x,
                                      std::vector<double>& pre_activations);

// NNet text: "//" comments, then numLayers,inputSize,outputSize,maxLayerSize;
// layer sizes; a flag line; input mins; input maxes; means; ranges; then per
// layer the weight rows followed by one bias per line.
Network parse_nnet(std::string_view text);
Network load_nnet(const std::string& path);
// Dense-only networks. Doubles are written with 17 significant digits so a
// re-parse is bit-exact.
std::string write_nnet(const Network& net);

// {"input_dim":d, "input_shape":[c,h,w]?, "layers":[{"type":"dense","weights":[[..]],"bias":[..]},
//  {"type":"relu"}, {"type":"conv","kernels":[[[[..]]]],"stride":s,"bias":[..]}],
//  "normalization":{"mean":[..],"range":[..]}?}
Network parse_network_json(std::string_view text);
std::string write_network_json(const Network& net);

// Picks the parser from the extension (.json) or content.
Network load_network(const std::string& path);

struct ExactRangeOptions {
    std::size_t relu_limit = 16;
};

class OracleLimitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExactRange {
    std::vector<ConcreteInterval> outputs;
    std::size_t feasible_patterns = 0;
    std::size_t lp_calls = 0;
};

// Ground truth by activation-pattern enumeration: for every feasible sign
// assignment the network is affine, and each output is minimized and
// maximized by LP under the pattern's pre-activation sign constraints.
ExactRange exact_output_range(const Network& net, const InputBox& box, const ExactRangeOptions& opts = {});

// The same enumeration for a set of linear functionals of the outputs
// (rows of `objective`, one functional per row).
ExactRange exact_objective_range(const Network& net, const InputBox& box, const Matrix& objective,
                                 const ExactRangeOptions& opts = {});

}  // namespace symrelax
