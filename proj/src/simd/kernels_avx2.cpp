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

#include <immintrin.h>

#include <cstdint>
#include <limits>

namespace symrelax::simd {
namespace {

// Per-lane nextafter toward -inf / +inf, leaving zeros untouched. Operates on
// the IEEE bit pattern: for finite non-zero doubles, stepping the magnitude by
// one integer unit is exactly one ulp.
inline __m256d step_down(__m256d v) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256i pos = _mm256_castpd_si256(_mm256_cmp_pd(v, zero, _CMP_GT_OQ));
    const __m256i neg = _mm256_castpd_si256(_mm256_cmp_pd(v, zero, _CMP_LT_OQ));
    __m256i bits = _mm256_castpd_si256(v);
    bits = _mm256_add_epi64(bits, pos);  // pos lanes hold -1
    bits = _mm256_sub_epi64(bits, neg);
    return _mm256_castsi256_pd(bits);
}

inline __m256d step_up(__m256d v) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256i pos = _mm256_castpd_si256(_mm256_cmp_pd(v, zero, _CMP_GT_OQ));
    const __m256i neg = _mm256_castpd_si256(_mm256_cmp_pd(v, zero, _CMP_LT_OQ));
    __m256i bits = _mm256_castpd_si256(v);
    bits = _mm256_sub_epi64(bits, pos);
    bits = _mm256_add_epi64(bits, neg);
    return _mm256_castsi256_pd(bits);
}

// Lanes where a*b underflowed to zero although neither factor is zero.
inline __m256d underflow_mask(__m256d p, __m256d a, __m256d b) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d pz = _mm256_cmp_pd(p, zero, _CMP_EQ_OQ);
    const __m256d anz = _mm256_cmp_pd(a, zero, _CMP_NEQ_OQ);
    const __m256d bnz = _mm256_cmp_pd(b, zero, _CMP_NEQ_OQ);
    return _mm256_and_pd(pz, _mm256_and_pd(anz, bnz));
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d vx = _mm256_loadu_pd(x + i);
        const __m256d vy = _mm256_loadu_pd(y + i);
        _mm256_storeu_pd(y + i, _mm256_add_pd(vy, _mm256_mul_pd(va, vx)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) _mm256_storeu_pd(y + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
    for (; i < n; ++i) y[i] = a * x[i];
}

double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double s = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

void bound_sum(const double* c, const double* lo, const double* hi, std::size_t n, double* sum_lo,
               double* sum_hi) {
    const __m256d zero = _mm256_setzero_pd();
    const __m256d tiny = _mm256_set1_pd(std::numeric_limits<double>::denorm_min());
    const __m256d neg_tiny = _mm256_set1_pd(-std::numeric_limits<double>::denorm_min());
    __m256d acc_lo = zero;
    __m256d acc_hi = zero;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d w = _mm256_loadu_pd(c + i);
        const __m256d l = _mm256_loadu_pd(lo + i);
        const __m256d h = _mm256_loadu_pd(hi + i);
        const __m256d wneg = _mm256_cmp_pd(w, zero, _CMP_LT_OQ);
        const __m256d wzero = _mm256_cmp_pd(w, zero, _CMP_EQ_OQ);
        const __m256d a = _mm256_blendv_pd(l, h, wneg);
        const __m256d b = _mm256_blendv_pd(h, l, wneg);

        const __m256d plo_raw = _mm256_mul_pd(w, a);
        const __m256d phi_raw = _mm256_mul_pd(w, b);
        const __m256d plo = _mm256_blendv_pd(step_down(plo_raw), neg_tiny, underflow_mask(plo_raw, w, a));
        const __m256d phi = _mm256_blendv_pd(step_up(phi_raw), tiny, underflow_mask(phi_raw, w, b));

        acc_lo = _mm256_blendv_pd(step_down(_mm256_add_pd(acc_lo, plo)), acc_lo, wzero);
        acc_hi = _mm256_blendv_pd(step_up(_mm256_add_pd(acc_hi, phi)), acc_hi, wzero);
    }
    alignas(32) double lanes_lo[4];
    alignas(32) double lanes_hi[4];
    _mm256_store_pd(lanes_lo, acc_lo);
    _mm256_store_pd(lanes_hi, acc_hi);
    double slo = lanes_lo[0];
    double shi = lanes_hi[0];
    for (int k = 1; k < 4; ++k) {
        slo = add_down(slo, lanes_lo[k]);
        shi = add_up(shi, lanes_hi[k]);
    }
    for (; i < n; ++i) {
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

constexpr KernelTable kTable{Isa::Avx2, "avx2", &axpy, &scale, &dot, &bound_sum};

}  // namespace

const KernelTable& avx2_kernels() noexcept { return kTable; }

}  // namespace symrelax::simd
