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

// Data-parallel inner loops shared by every propagator and the simplex
// tableau. Each instruction set provides the same table; the scalar table is
// the reference the vector tables are tested against.

#include <cstddef>
#include <string_view>
#include <vector>

namespace symrelax::simd {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
    Isa isa;
    const char* name;

    // y[i] += a * x[i]
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    // y[i] = a * x[i]
    void (*scale)(double a, const double* x, double* y, std::size_t n);
    double (*dot)(const double* a, const double* b, std::size_t n);
    // Outward-rounded enclosure of sum_i c[i] * [lo[i], hi[i]]. Every product
    // and every partial sum is widened by one ulp unless it is an exact zero.
    void (*bound_sum)(const double* c, const double* lo, const double* hi, std::size_t n,
                      double* sum_lo, double* sum_hi);
};

const KernelTable& scalar_kernels() noexcept;
#if defined(SYMRELAX_ENABLE_AVX2)
const KernelTable& avx2_kernels() noexcept;
#endif

bool cpu_supports(Isa isa) noexcept;

// Tables usable on this machine, scalar first.
std::vector<const KernelTable*> available_kernels();

// Runtime-selected table. SYMRELAX_SIMD=scalar forces the reference path.
const KernelTable& active() noexcept;

std::string_view isa_name(Isa isa) noexcept;

}  // namespace symrelax::simd
