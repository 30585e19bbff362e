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

#include <cmath>
#include <limits>

namespace symrelax {

// One representable step toward -inf. Exact zeros stay put: a rounded sum
// is zero only when it is exact, and products are handled by the callers.
inline double round_down(double v) noexcept {
    if (v == 0.0) return v;
    return std::nextafter(v, -std::numeric_limits<double>::infinity());
}

inline double round_up(double v) noexcept {
    if (v == 0.0) return v;
    return std::nextafter(v, std::numeric_limits<double>::infinity());
}

// Lower/upper enclosure of a*b computed in round-to-nearest.
inline double mul_down(double a, double b) noexcept {
    const double p = a * b;
    if (p == 0.0 && a != 0.0 && b != 0.0) return -std::numeric_limits<double>::denorm_min();
    return round_down(p);
}

inline double mul_up(double a, double b) noexcept {
    const double p = a * b;
    if (p == 0.0 && a != 0.0 && b != 0.0) return std::numeric_limits<double>::denorm_min();
    return round_up(p);
}

inline double add_down(double a, double b) noexcept { return round_down(a + b); }
inline double add_up(double a, double b) noexcept { return round_up(a + b); }

}  // namespace symrelax
