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

#include "symrelax/simd/kernels.hpp"

#include <cstdlib>
#include <string>

namespace symrelax::simd {

bool cpu_supports(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar:
            return true;
        case Isa::Avx2:
#if defined(SYMRELAX_ENABLE_AVX2) && (defined(__GNUC__) || defined(__clang__))
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

std::vector<const KernelTable*> available_kernels() {
    std::vector<const KernelTable*> out{&scalar_kernels()};
#if defined(SYMRELAX_ENABLE_AVX2)
    if (cpu_supports(Isa::Avx2)) out.push_back(&avx2_kernels());
#endif
    return out;
}

namespace {

const KernelTable& select() noexcept {
    if (const char* forced = std::getenv("SYMRELAX_SIMD"); forced != nullptr) {
        if (std::string(forced) == "scalar") return scalar_kernels();
    }
#if defined(SYMRELAX_ENABLE_AVX2)
    if (cpu_supports(Isa::Avx2)) return avx2_kernels();
#endif
    return scalar_kernels();
}

}  // namespace

const KernelTable& active() noexcept {
    static const KernelTable& table = select();
    return table;
}

std::string_view isa_name(Isa isa) noexcept {
    switch (isa) {
        case Isa::Scalar:
            return "scalar";
        case Isa::Avx2:
            return "avx2";
    }
    return "unknown";
}

}  // namespace symrelax::simd
