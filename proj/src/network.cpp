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

#include "symrelax/simd/kernels.hpp"

#include <algorithm>

namespace symrelax {

std::string to_string(const NodeId& id) {
    return "(" + std::to_string(id.layer) + "," + std::to_string(id.node) + ")";
}

Network::Network(std::size_t input_dim, std::vector<Layer> layers, std::optional<GridShape> input_shape,
                 std::optional<Normalization> normalization)
    : input_dim_(input_dim),
      layers_(std::move(layers)),
      input_shape_(input_shape),
      normalization_(std::move(normalization)) {
    if (input_dim_ == 0) throw NetworkError("network: input dimension must be positive");
    if (layers_.empty()) throw NetworkError("network: no layers");
    if (!std::holds_alternative<DenseLayer>(layers_.back())) throw NetworkError("network: final layer must be dense");
    if (input_shape_ && (*input_shape_)[0] * (*input_shape_)[1] * (*input_shape_)[2] != input_dim_) {
        throw NetworkError("network: input_shape does not match input_dim");
    }

    bool has_grid = input_shape_.has_value();
    GridShape grid = input_shape_.value_or(GridShape{});
    std::size_t size = input_dim_;
    sizes_.push_back(size);
    relu_offsets_.assign(layers_.size(), 0);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const std::string where = "network: layer " + std::to_string(i) + ": ";
        if (auto* dense = std::get_if<DenseLayer>(&layers_[i])) {
            if (dense->weights.cols() != size) {
                throw NetworkError(where + "dense layer expects " + std::to_string(dense->weights.cols()) +
                                   " inputs, previous layer produces " + std::to_string(size));
            }
            if (dense->bias.size() != dense->weights.rows()) throw NetworkError(where + "bias length mismatch");
            size = dense->weights.rows();
            has_grid = false;
        } else if (auto* conv = std::get_if<ConvLayer>(&layers_[i])) {
            if (!has_grid) throw NetworkError(where + "convolution needs a (channels, height, width) input grid");
            const auto [c, h, w] = grid;
            if (conv->in_channels != c) throw NetworkError(where + "convolution channel mismatch");
            if (conv->stride == 0) throw NetworkError(where + "stride must be positive");
            if (conv->kernel_h == 0 || conv->kernel_w == 0 || conv->kernel_h > h || conv->kernel_w > w) {
                throw NetworkError(where + "kernel does not fit the input grid");
            }
            if (conv->kernels.size() != conv->out_channels * conv->in_channels * conv->kernel_h * conv->kernel_w) {
                throw NetworkError(where + "kernel tensor size mismatch");
            }
            if (conv->bias.size() != conv->out_channels) throw NetworkError(where + "bias length mismatch");
            conv->in_h = h;
            conv->in_w = w;
            grid = GridShape{conv->out_channels, conv->out_h(), conv->out_w()};
            size = conv->output_size();
        } else {
            if (i == 0 || std::holds_alternative<ReluLayer>(layers_[i - 1])) {
                throw NetworkError(where + "ReLU must follow a dense or convolutional layer");
            }
            relu_offsets_[i] = relu_count_;
            relu_count_ += size;
        }
        sizes_.push_back(size);
    }

    if (normalization_) {
        const auto& n = *normalization_;
        if (n.mean.size() < input_dim_ || n.range.size() < input_dim_) {
            throw NetworkError("network: normalization needs a mean and range per input");
        }
        if (std::any_of(n.range.begin(), n.range.begin() + static_cast<std::ptrdiff_t>(input_dim_),
                        [](double r) { return r == 0.0; })) {
            throw NetworkError("network: normalization range must be non-zero");
        }
    }
}

std::vector<std::size_t> Network::relu_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        if (std::holds_alternative<ReluLayer>(layers_[i])) out.push_back(i);
    }
    return out;
}

std::size_t Network::flat_index(const NodeId& id) const {
    if (id.layer >= layers_.size() || !std::holds_alternative<ReluLayer>(layers_[id.layer]) ||
        id.node >= sizes_[id.layer]) {
        throw NetworkError("network: no ReLU node " + to_string(id));
    }
    return relu_offsets_[id.layer] + id.node;
}

std::vector<double> dense_apply(const DenseLayer& layer, std::span<const double> x) {
    if (x.size() != layer.weights.cols()) throw DimensionError("dense layer input size mismatch");
    std::vector<double> y(layer.weights.rows());
    const auto& k = simd::active();
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = k.dot(layer.weights.row(j).data(), x.data(), x.size()) + layer.bias[j];
    return y;
}

std::vector<double> conv_apply(const ConvLayer& layer, std::span<const double> x) {
    if (x.size() != layer.input_size()) throw DimensionError("convolution input size mismatch");
    const std::size_t oh = layer.out_h();
    const std::size_t ow = layer.out_w();
    std::vector<double> y(layer.output_size());
    for (std::size_t oc = 0; oc < layer.out_channels; ++oc) {
        for (std::size_t oy = 0; oy < oh; ++oy) {
            for (std::size_t ox = 0; ox < ow; ++ox) {
                double s = layer.bias[oc];
                for (std::size_t ic = 0; ic < layer.in_channels; ++ic) {
                    for (std::size_t ky = 0; ky < layer.kernel_h; ++ky) {
                        for (std::size_t kx = 0; kx < layer.kernel_w; ++kx) {
                            const std::size_t iy = oy * layer.stride + ky;
                            const std::size_t ix = ox * layer.stride + kx;
                            s += layer.kernel(oc, ic, ky, kx) * x[(ic * layer.in_h + iy) * layer.in_w + ix];
                        }
                    }
                }
                y[(oc * oh + oy) * ow + ox] = s;
            }
        }
    }
    return y;
}

std::vector<double> forward_recording(const Network& net, std::span<const double> x,
                                      std::vector<double>& pre_activations) {
    if (x.size() != net.input_dim()) {
        throw DimensionError("forward: expected " + std::to_string(net.input_dim()) + " inputs, got " +
                             std::to_string(x.size()));
    }
    pre_activations.clear();
    std::vector<double> v(x.begin(), x.end());
    for (const auto& layer : net.layers()) {
        if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
            v = dense_apply(*dense, v);
        } else if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
            v = conv_apply(*conv, v);
        } else {
            pre_activations.insert(pre_activations.end(), v.begin(), v.end());
            for (double& e : v) e = std::max(e, 0.0);
        }
    }
    return v;
}

std::vector<double> forward(const Network& net, std::span<const double> x) {
    std::vector<double> scratch;
    return forward_recording(net, x, scratch);
}

}  // namespace symrelax
