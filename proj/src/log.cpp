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

#include "symrelax/log.hpp"

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <string>

namespace symrelax::log {
namespace {

bool from_environment() {
    const char* v = std::getenv("NEURIFY_STYLE_LOG");
    return v != nullptr && std::string_view(v) == "debug";
}

std::atomic<bool>& flag() {
    static std::atomic<bool> enabled{from_environment()};
    return enabled;
}

std::mutex& sink() {
    static std::mutex m;
    return m;
}

}  // namespace

bool debug_enabled() noexcept { return flag().load(std::memory_order_relaxed); }

void set_debug(bool enabled) noexcept { flag().store(enabled); }

void debug(std::string_view message) {
    if (!debug_enabled()) return;
    std::lock_guard lock(sink());
    std::cerr << "[debug] " << message << '\n';
}

}  // namespace symrelax::log
