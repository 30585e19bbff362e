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

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace symrelax {
namespace {

struct Line {
    std::size_t number;
    std::string_view text;
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

class LineReader {
public:
    explicit LineReader(std::string_view text) {
        std::size_t number = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const auto end = text.find('\n', pos);
            const auto raw = text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos);
            ++number;
            const auto t = trim(raw);
            if (!t.empty() && !t.starts_with("//")) lines_.push_back({number, t});
            if (end == std::string_view::npos) break;
            pos = end + 1;
        }
        last_line_ = number;
    }

    const Line& next(const char* what) {
        if (cursor_ >= lines_.size()) throw ParseError(std::string("unexpected end of file, expected ") + what, last_line_);
        return lines_[cursor_++];
    }

    bool done() const noexcept { return cursor_ >= lines_.size(); }
    const Line& peek() const { return lines_[cursor_]; }

private:
    std::vector<Line> lines_;
    std::size_t cursor_ = 0;
    std::size_t last_line_ = 0;
};

std::vector<double> numbers(const Line& line) {
    std::vector<double> out;
    std::size_t pos = 0;
    const auto text = line.text;
    while (pos <= text.size()) {
        const auto end = text.find(',', pos);
        const auto tok = trim(text.substr(pos, end == std::string_view::npos ? std::string_view::npos : end - pos));
        if (!tok.empty()) {
            double v = 0.0;
            const char* first = tok.data();
            if (*first == '+') ++first;
            const auto res = std::from_chars(first, tok.data() + tok.size(), v);
            if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
                throw ParseError("non-numeric token '" + std::string(tok) + "'", line.number);
            }
            out.push_back(v);
        }
        if (end == std::string_view::npos) break;
        pos = end + 1;
    }
    return out;
}

std::vector<double> expect(const Line& line, std::size_t count, const char* what) {
    auto v = numbers(line);
    if (v.size() != count) {
        throw ParseError(std::string(what) + ": expected " + std::to_string(count) + " values, found " +
                             std::to_string(v.size()),
                         line.number);
    }
    return v;
}

std::size_t as_count(double v, const Line& line, const char* what) {
    if (!(v >= 1.0) || v != static_cast<double>(static_cast<std::size_t>(v))) {
        throw ParseError(std::string(what) + " must be a positive integer", line.number);
    }
    return static_cast<std::size_t>(v);
}

}  // namespace

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Network parse_nnet(std::string_view text) {
    LineReader reader(text);

    const Line& header = reader.next("header line");
    const auto h = expect(header, 4, "header (numLayers, inputSize, outputSize, maxLayerSize)");
    const std::size_t num_layers = as_count(h[0], header, "numLayers");
    const std::size_t input_size = as_count(h[1], header, "inputSize");
    const std::size_t output_size = as_count(h[2], header, "outputSize");
    const std::size_t max_layer = as_count(h[3], header, "maxLayerSize");

    const Line& sizes_line = reader.next("layer sizes");
    const auto size_values = expect(sizes_line, num_layers + 1, "layer sizes");
    std::vector<std::size_t> sizes;
    for (double v : size_values) sizes.push_back(as_count(v, sizes_line, "layer size"));
    if (sizes.front() != input_size) throw ParseError("first layer size differs from inputSize", sizes_line.number);
    if (sizes.back() != output_size) throw ParseError("last layer size differs from outputSize", sizes_line.number);
    if (*std::max_element(sizes.begin(), sizes.end()) != max_layer) {
        throw ParseError("maxLayerSize does not match the layer sizes", header.number);
    }

    reader.next("flag line");

    Normalization norm;
    norm.input_min = expect(reader.next("input minimums"), input_size, "input minimums");
    norm.input_max = expect(reader.next("input maximums"), input_size, "input maximums");
    norm.mean = expect(reader.next("means"), input_size + 1, "means");
    norm.range = expect(reader.next("ranges"), input_size + 1, "ranges");

    std::vector<Layer> layers;
    for (std::size_t k = 0; k < num_layers; ++k) {
        const std::size_t rows = sizes[k + 1];
        const std::size_t cols = sizes[k];
        std::vector<double> w;
        w.reserve(rows * cols);
        for (std::size_t r = 0; r < rows; ++r) {
            const auto row = expect(reader.next("weight row"), cols, "weight row");
            w.insert(w.end(), row.begin(), row.end());
        }
        std::vector<double> b;
        b.reserve(rows);
        for (std::size_t r = 0; r < rows; ++r) b.push_back(expect(reader.next("bias"), 1, "bias")[0]);
        layers.emplace_back(DenseLayer{Matrix(rows, cols, std::move(w)), std::move(b)});
        if (k + 1 < num_layers) layers.emplace_back(ReluLayer{});
    }
    if (!reader.done()) throw ParseError("trailing data after the last layer", reader.peek().number);

    try {
        return Network(input_size, std::move(layers), std::nullopt, std::move(norm));
    } catch (const NetworkError& e) {
        throw ParseError(e.what(), 0);
    }
}

Network load_nnet(const std::string& path) { return parse_nnet(read_file(path)); }

std::string write_nnet(const Network& net) {
    std::vector<const DenseLayer*> dense;
    for (std::size_t i = 0; i < net.layers().size(); ++i) {
        const auto& layer = net.layers()[i];
        const bool relu_slot = i % 2 == 1;
        if (relu_slot != std::holds_alternative<ReluLayer>(layer) || std::holds_alternative<ConvLayer>(layer)) {
            throw NetworkError("write_nnet: only alternating dense/ReLU networks are representable");
        }
        if (const auto* d = std::get_if<DenseLayer>(&layer)) dense.push_back(d);
    }
    std::vector<std::size_t> sizes{net.input_dim()};
    for (const auto* d : dense) sizes.push_back(d->weights.rows());
    const std::size_t d = net.input_dim();

    std::string out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g,", v);
        out += buf;
    };
    auto row = [&](const std::vector<double>& v) {
        for (double x : v) num(x);
        out += '\n';
    };

    out += "// written by symrelax\n";
    out += std::to_string(dense.size()) + "," + std::to_string(d) + "," + std::to_string(net.output_dim()) + "," +
           std::to_string(*std::max_element(sizes.begin(), sizes.end())) + ",\n";
    for (auto s : sizes) out += std::to_string(s) + ",";
    out += "\n0,\n";

    Normalization norm;
    if (net.normalization()) {
        norm = *net.normalization();
    } else {
        norm.input_min.assign(d, -std::numeric_limits<double>::max());
        norm.input_max.assign(d, std::numeric_limits<double>::max());
        norm.mean.assign(d + 1, 0.0);
        norm.range.assign(d + 1, 1.0);
    }
    norm.input_min.resize(d, -std::numeric_limits<double>::max());
    norm.input_max.resize(d, std::numeric_limits<double>::max());
    norm.mean.resize(d + 1, 0.0);
    norm.range.resize(d + 1, 1.0);
    row(norm.input_min);
    row(norm.input_max);
    row(norm.mean);
    row(norm.range);

    for (const auto* layer : dense) {
        for (std::size_t r = 0; r < layer->weights.rows(); ++r) {
            for (double x : layer->weights.row(r)) num(x);
            out += '\n';
        }
        for (double b : layer->bias) {
            num(b);
            out += '\n';
        }
    }
    return out;
}

}  // namespace symrelax
