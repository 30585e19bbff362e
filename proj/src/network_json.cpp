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

#include <json.hpp>

#include <filesystem>

namespace symrelax {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ParseError("network json " + path + ": " + what, 0);
}

std::vector<double> vec(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    std::vector<double> out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(path + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(j[i].get<double>());
    }
    return out;
}

std::size_t count(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() || j.get<std::size_t>() == 0) fail(path, "expected a positive integer");
    return j.get<std::size_t>();
}

}  // namespace

Network parse_network_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("network json: ") + e.what(), 0);
    }
    if (!doc.is_object()) fail("$", "expected an object");
    if (!doc.contains("input_dim")) fail("$.input_dim", "missing");
    if (!doc.contains("layers") || !doc["layers"].is_array()) fail("$.layers", "expected an array");
    const std::size_t d = count(doc["input_dim"], "$.input_dim");

    std::optional<GridShape> shape;
    if (doc.contains("input_shape") && !doc["input_shape"].is_null()) {
        const auto& s = doc["input_shape"];
        if (!s.is_array() || s.size() != 3) fail("$.input_shape", "expected [channels, height, width]");
        shape = GridShape{count(s[0], "$.input_shape[0]"), count(s[1], "$.input_shape[1]"),
                          count(s[2], "$.input_shape[2]")};
    }

    std::vector<Layer> layers;
    const auto& jl = doc["layers"];
    for (std::size_t i = 0; i < jl.size(); ++i) {
        const std::string path = "$.layers[" + std::to_string(i) + "]";
        const auto& l = jl[i];
        if (!l.is_object() || !l.contains("type") || !l["type"].is_string()) fail(path + ".type", "missing layer type");
        const auto type = l["type"].get<std::string>();
        if (type == "relu") {
            layers.emplace_back(ReluLayer{});
        } else if (type == "dense") {
            if (!l.contains("weights") || !l["weights"].is_array()) fail(path + ".weights", "expected a matrix");
            std::vector<std::vector<double>> rows;
            for (std::size_t r = 0; r < l["weights"].size(); ++r) {
                rows.push_back(vec(l["weights"][r], path + ".weights[" + std::to_string(r) + "]"));
            }
            if (!l.contains("bias")) fail(path + ".bias", "missing");
            try {
                layers.emplace_back(DenseLayer{Matrix::from_rows(rows), vec(l["bias"], path + ".bias")});
            } catch (const DimensionError& e) {
                fail(path + ".weights", e.what());
            }
        } else if (type == "conv") {
            ConvLayer conv;
            if (!l.contains("kernels") || !l["kernels"].is_array() || l["kernels"].empty()) {
                fail(path + ".kernels", "expected a 4-d array");
            }
            const auto& k = l["kernels"];
            conv.out_channels = k.size();
            for (std::size_t oc = 0; oc < k.size(); ++oc) {
                const std::string kp = path + ".kernels[" + std::to_string(oc) + "]";
                if (!k[oc].is_array() || k[oc].empty()) fail(kp, "expected in_channels x kh x kw");
                if (oc == 0) conv.in_channels = k[oc].size();
                if (k[oc].size() != conv.in_channels) fail(kp, "inconsistent input channel count");
                for (std::size_t ic = 0; ic < k[oc].size(); ++ic) {
                    const auto& plane = k[oc][ic];
                    const std::string pp = kp + "[" + std::to_string(ic) + "]";
                    if (!plane.is_array() || plane.empty()) fail(pp, "expected kh x kw");
                    if (oc == 0 && ic == 0) conv.kernel_h = plane.size();
                    if (plane.size() != conv.kernel_h) fail(pp, "inconsistent kernel height");
                    for (std::size_t ky = 0; ky < plane.size(); ++ky) {
                        auto row = vec(plane[ky], pp + "[" + std::to_string(ky) + "]");
                        if (oc == 0 && ic == 0 && ky == 0) conv.kernel_w = row.size();
                        if (row.size() != conv.kernel_w) fail(pp, "inconsistent kernel width");
                        conv.kernels.insert(conv.kernels.end(), row.begin(), row.end());
                    }
                }
            }
            conv.stride = l.contains("stride") ? count(l["stride"], path + ".stride") : 1;
            if (!l.contains("bias")) fail(path + ".bias", "missing");
            conv.bias = vec(l["bias"], path + ".bias");
            layers.emplace_back(std::move(conv));
        } else {
            fail(path + ".type", "unknown layer type '" + type + "'");
        }
    }

    std::optional<Normalization> norm;
    if (doc.contains("normalization") && !doc["normalization"].is_null()) {
        const auto& n = doc["normalization"];
        Normalization v;
        v.mean = vec(n.value("mean", json::array()), "$.normalization.mean");
        v.range = vec(n.value("range", json::array()), "$.normalization.range");
        if (n.contains("input_min")) v.input_min = vec(n["input_min"], "$.normalization.input_min");
        if (n.contains("input_max")) v.input_max = vec(n["input_max"], "$.normalization.input_max");
        norm = std::move(v);
    }

    try {
        return Network(d, std::move(layers), shape, std::move(norm));
    } catch (const NetworkError& e) {
        fail("$", e.what());
    }
}

std::string write_network_json(const Network& net) {
    json doc;
    doc["input_dim"] = net.input_dim();
    if (net.input_shape()) {
        const auto& s = *net.input_shape();
        doc["input_shape"] = {s[0], s[1], s[2]};
    }
    json layers = json::array();
    for (const auto& layer : net.layers()) {
        if (const auto* dense = std::get_if<DenseLayer>(&layer)) {
            json rows = json::array();
            for (std::size_t r = 0; r < dense->weights.rows(); ++r) {
                const auto row = dense->weights.row(r);
                rows.push_back(std::vector<double>(row.begin(), row.end()));
            }
            layers.push_back({{"type", "dense"}, {"weights", rows}, {"bias", dense->bias}});
        } else if (const auto* conv = std::get_if<ConvLayer>(&layer)) {
            json k = json::array();
            for (std::size_t oc = 0; oc < conv->out_channels; ++oc) {
                json in = json::array();
                for (std::size_t ic = 0; ic < conv->in_channels; ++ic) {
                    json plane = json::array();
                    for (std::size_t ky = 0; ky < conv->kernel_h; ++ky) {
                        json row = json::array();
                        for (std::size_t kx = 0; kx < conv->kernel_w; ++kx) row.push_back(conv->kernel(oc, ic, ky, kx));
                        plane.push_back(row);
                    }
                    in.push_back(plane);
                }
                k.push_back(in);
            }
            layers.push_back({{"type", "conv"}, {"kernels", k}, {"stride", conv->stride}, {"bias", conv->bias}});
        } else {
            layers.push_back({{"type", "relu"}});
        }
    }
    doc["layers"] = layers;
    if (net.normalization()) {
        const auto& n = *net.normalization();
        doc["normalization"] = {{"mean", n.mean}, {"range", n.range}};
        if (!n.input_min.empty()) doc["normalization"]["input_min"] = n.input_min;
        if (!n.input_max.empty()) doc["normalization"]["input_max"] = n.input_max;
    }
    return doc.dump(1);
}

Network load_network(const std::string& path) {
    const std::string text = read_file(path);
    const bool json_ext = std::filesystem::path(path).extension() == ".json";
    const auto first = text.find_first_not_of(" \t\r\n");
    if (json_ext || (first != std::string::npos && text[first] == '{')) return parse_network_json(text);
    return parse_nnet(text);
}

}  // namespace symrelax
