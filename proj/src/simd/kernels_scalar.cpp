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

#include "symrelax/rounding.hpp"
#include "symrelax/simd/kernels.hpp"

#include <algorithm>

namespace symrelax::simd {
namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] = a * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

void bound_sum(const double* c, const double* lo, const double* hi, std::size_t n, double* sum_lo,
               double* sum_hi) {
    double slo = 0.0;
    double shi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double w = c[i];
        if (w == 0.0) continue;
        const double a = w >= 0.0 ? lo[i] : hi[i];
        const double b = w >= 0.0 ? hi[i] : lo[i];
        slo = add_down(slo, mul_down(w, a));
        shi = add_up(shi, mul_up(w, b));
    }
    *sum_lo = slo;
    *sum_hi = shi;
}

constexpr KernelTable kTable{Isa::Scalar, "scalar", &axpy, &scale, &dot, &bound_sum};

}  // namespace

const KernelTable& scalar_kernels() noexcept { return kTable; }

}  // namespace symrelax::simd
