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

#include "symrelax/engine.hpp"

#include "symrelax/log.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace symrelax {

void EngineConfig::validate() const {
    if (!(timeout_seconds > 0.0)) throw std::invalid_argument("engine: timeout must be positive");
    if (workers == 0) throw std::invalid_argument("engine: workers must be positive");
    if (rebalance_interval == 0) throw std::invalid_argument("engine: rebalance_interval must be positive");
    if (!(violation_tol >= 0.0)) throw std::invalid_argument("engine: violation_tol must be non-negative");
}

const char* to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Safe:
            return "safe";
        case Verdict::Violated:
            return "violated";
        case Verdict::Timeout:
            return "timeout";
        case Verdict::SolverFailure:
            return "solver_failure";
    }
    return "?";
}

VerdictReport VerdictReport::safe(VerifyStats stats) { return {Verdict::Safe, stats, {}}; }

VerdictReport VerdictReport::timeout(VerifyStats stats, std::string detail) {
    return {Verdict::Timeout, stats, std::move(detail)};
}

VerdictReport VerdictReport::solver_failure(VerifyStats stats, std::string detail) {
    return {Verdict::SolverFailure, stats, std::move(detail)};
}

VerdictReport VerdictReport::violated(const Network& net, const InputRegion& region, const OutputProperty& prop,
                                      std::vector<double> witness, VerifyStats stats) {
    if (!validate_counterexample(net, region, prop, witness)) {
        throw std::logic_error("counterexample does not violate the property inside the region");
    }
    VerdictReport r(Verdict::Violated, stats, {});
    auto outputs = forward(net, witness);
    r.counterexample_ = Counterexample{std::move(witness), std::move(outputs)};
    return r;
}

bool validate_counterexample(const Network& net, const InputRegion& region, const OutputProperty& prop,
                             std::span<const double> witness) {
    if (witness.size() != net.input_dim() || witness.size() != region_dim(region)) return false;
    if (!region_contains(region, witness, 1e-7)) return false;
    const auto y = forward(net, witness);
    return !property_holds(prop, y);
}

std::vector<SplitRow> forced_rows(const PropagationTrace& trace, const ForcedMap& forced) {
    std::vector<SplitRow> rows;
    rows.reserve(forced.size());
    for (const auto& [id, phase] : forced) {
        const BoundPair& p = trace.pre(id);
        if (phase == Activation::Active) {
            rows.push_back({p.eq_up, true});
        } else {
            rows.push_back({p.eq_low, false});
        }
    }
    return rows;
}

namespace {

using Clock = std::chrono::steady_clock;

// Per-worker deques. Owners pop from the back (depth first); thieves take the
// older half from the front of the longest queue.
class WorkPool {
public:
    WorkPool(std::size_t workers, std::size_t rebalance_interval)
        : queues_(workers), rebalance_interval_(rebalance_interval) {}

    void push(std::size_t w, RefinementTask task) {
        pending_.fetch_add(1);
        {
            std::lock_guard lock(queues_[w].m);
            queues_[w].tasks.push_back(std::move(task));
        }
        cv_.notify_one();
    }

    std::optional<RefinementTask> take(std::size_t w) {
        if (auto t = pop_back(w)) return t;
        if (steal_into(w)) return pop_back(w);
        return std::nullopt;
    }

    void finish_one() {
        const auto done = completed_.fetch_add(1) + 1;
        if (queues_.size() > 1 && done % rebalance_interval_ == 0) rebalance();
        if (pending_.fetch_sub(1) == 1) cv_.notify_all();
    }

    std::size_t pending() const noexcept { return pending_.load(); }

    void wait_briefly() {
        std::unique_lock lock(wait_m_);
        cv_.wait_for(lock, std::chrono::milliseconds(1));
    }

    void wake_all() { cv_.notify_all(); }

private:
    struct Queue {
        std::mutex m;
        std::deque<RefinementTask> tasks;
    };

    std::optional<RefinementTask> pop_back(std::size_t w) {
        std::lock_guard lock(queues_[w].m);
        auto& q = queues_[w].tasks;
        if (q.empty()) return std::nullopt;
        RefinementTask t = std::move(q.back());
        q.pop_back();
        return t;
    }

    bool steal_into(std::size_t w) {
        std::size_t victim = w;
        std::size_t longest = 0;
        for (std::size_t i = 0; i < queues_.size(); ++i) {
            if (i == w) continue;
            std::lock_guard lock(queues_[i].m);
            if (queues_[i].tasks.size() > longest) {
                longest = queues_[i].tasks.size();
                victim = i;
            }
        }
        if (victim == w) return false;
        std::scoped_lock lock(queues_[w].m, queues_[victim].m);
        auto& src = queues_[victim].tasks;
        if (src.empty()) return false;
        const std::size_t k = (src.size() + 1) / 2;
        auto& dst = queues_[w].tasks;
        for (std::size_t i = 0; i < k; ++i) {
            dst.push_front(std::move(src[k - 1 - i]));
        }
        src.erase(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(k));
        return true;
    }

    void rebalance() {
        for (std::size_t i = 0; i < queues_.size(); ++i) {
            bool empty = false;
            {
                std::lock_guard lock(queues_[i].m);
                empty = queues_[i].tasks.empty();
            }
            if (empty && steal_into(i)) cv_.notify_all();
        }
    }

    std::vector<Queue> queues_;
    std::size_t rebalance_interval_;
    std::atomic<std::size_t> pending_{0};
    std::atomic<std::size_t> completed_{0};
    std::mutex wait_m_;
    std::condition_variable cv_;
};

void atomic_max(std::atomic<std::size_t>& a, std::size_t v) {
    std::size_t cur = a.load();
    while (cur < v && !a.compare_exchange_weak(cur, v)) {
    }
}

std::string describe(const RefinementTask& t) {
    std::ostringstream os;
    os << "task depth=" << t.depth;
    if (t.slice) os << " slice=" << to_string(*t.slice);
    os << " forced={";
    bool first = true;
    for (const auto& [id, phase] : t.forced) {
        os << (first ? "" : ",") << to_string(id) << (phase == Activation::Active ? "+" : "-");
        first = false;
    }
    os << "}";
    return os.str();
}

class Search {
public:
    Search(const Network& net, const InputRegion& region, const OutputProperty& prop, const EngineConfig& cfg)
        : net_(net), region_(region), prop_(prop), cfg_(cfg), pool_(cfg.workers, cfg.rebalance_interval) {
        max_depth_ = cfg.max_depth == 0 ? net.relu_count() : cfg.max_depth;
        parameter_ = scalar_parameter(region);
        if (!parameter_) base_ = region_to_box(region);
    }

    VerdictReport run() {
        start_ = Clock::now();
        deadline_ = start_ + std::chrono::duration_cast<Clock::duration>(
                                 std::chrono::duration<double>(cfg_.timeout_seconds));
        RefinementTask root;
        root.slice = parameter_;
        pool_.push(0, std::move(root));
        if (cfg_.workers == 1) {
            work(0);
        } else {
            std::vector<std::jthread> threads;
            for (std::size_t w = 0; w < cfg_.workers; ++w) threads.emplace_back([this, w] { work(w); });
        }
        return finish();
    }

private:
    void work(std::size_t w) {
        while (!stop_.load()) {
            auto task = pool_.take(w);
            if (!task) {
                if (pool_.pending() == 0) break;
                pool_.wait_briefly();
                continue;
            }
            try {
                process(*task, w);
            } catch (const std::exception& e) {
                fail(std::string("task failed: ") + e.what());
            }
            pool_.finish_one();
        }
        pool_.wake_all();
    }

    bool out_of_time() {
        if (Clock::now() < deadline_) return false;
        timed_out_.store(true);
        stop_.store(true);
        return true;
    }

    void fail(std::string detail) {
        solver_failure_.store(true);
        std::lock_guard lock(result_m_);
        if (failure_detail_.empty()) failure_detail_ = std::move(detail);
    }

    void terminal(const RefinementTask& t) {
        terminal_tasks_.fetch_add(1);
        terminal_depth_sum_.fetch_add(t.depth);
    }

    void process(const RefinementTask& task, std::size_t w) {
        tasks_explored_.fetch_add(1);
        atomic_max(max_seen_depth_, task.depth);
        const RegionEncoding enc = task.slice ? region_slice(region_, *task.slice) : base_;
        const PropagationTrace trace = slr_forward(net_, enc.box, task.forced);

        std::vector<SplitRow> rows = task.split_rows;
        const auto current = forced_rows(trace, task.forced);
        rows.insert(rows.end(), current.begin(), current.end());
        const auto systems = build_violation_systems(prop_, trace, enc, rows);

        const std::vector<double>* direction = nullptr;
        for (const auto& sys : systems) {
            if (stop_.load() || out_of_time()) return;
            lp_calls_.fetch_add(1);
            const lp::LpOutcome out = lp::solve(sys.program(), cfg_.lp);
            if (out.status == lp::Status::Infeasible) continue;
            if (!out.optimal()) {
                fail(sys.label + ": LP " + lp::to_string(out.status));
                terminal(task);
                return;
            }
            if (out.value > cfg_.violation_tol) continue;

            std::vector<double> witness(out.solution.begin(), out.solution.begin() + static_cast<std::ptrdiff_t>(net_.input_dim()));
            for (std::size_t i = 0; i < witness.size(); ++i) {
                witness[i] = std::clamp(witness[i], enc.box.lo[i], enc.box.hi[i]);
            }
            if (validate_counterexample(net_, region_, prop_, witness)) {
                log::debug(describe(task) + ": " + sys.label + " validated counterexample");
                std::lock_guard lock(result_m_);
                if (!counterexample_) counterexample_ = std::move(witness);
                stop_.store(true);
                terminal(task);
                return;
            }
            log::debug(describe(task) + ": " + sys.label + " feasible, witness rejected");
            if (direction == nullptr) direction = &sys.output_direction;
        }

        if (direction == nullptr) {
            log::debug(describe(task) + ": all systems infeasible");
            terminal(task);
            return;
        }
        if (task.slice && task.forced.empty() && task.slice_depth < cfg_.scalar_bisect_depth &&
            task.slice->width() > 0.0) {
            const double mid = task.slice->lo + 0.5 * task.slice->width();
            RefinementTask upper = task;
            upper.slice = ConcreteInterval{mid, task.slice->hi};
            upper.slice_depth += 1;
            RefinementTask lower = task;
            lower.slice = ConcreteInterval{task.slice->lo, mid};
            lower.slice_depth += 1;
            log::debug(describe(task) + ": bisect parameter at " + std::to_string(mid));
            pool_.push(w, std::move(upper));
            pool_.push(w, std::move(lower));
            return;
        }
        if (task.depth >= max_depth_) {
            incomplete_.store(true);
            log::debug(describe(task) + ": depth limit reached");
            terminal(task);
            return;
        }
        const GradientInterval grad = interval_gradient(net_, trace, *direction);
        const auto node = select_split_node(trace, grad);
        if (!node) {
            incomplete_.store(true);
            log::debug(describe(task) + ": no overestimated node left");
            terminal(task);
            return;
        }
        log::debug(describe(task) + ": split " + to_string(*node));

        const BoundPair& pre = trace.pre(*node);
        RefinementTask active = task;
        active.depth += 1;
        active.forced[*node] = Activation::Active;
        active.split_rows.push_back({pre.eq_up, true});
        RefinementTask inactive = task;
        inactive.depth += 1;
        inactive.forced[*node] = Activation::Inactive;
        inactive.split_rows.push_back({pre.eq_low, false});
        // The owner pops from the back, so the inactive branch runs first.
        pool_.push(w, std::move(active));
        pool_.push(w, std::move(inactive));
    }

    VerdictReport finish() {
        VerifyStats stats;
        stats.lp_calls = lp_calls_.load();
        stats.tasks_explored = tasks_explored_.load();
        stats.max_depth = max_seen_depth_.load();
        const auto terminals = terminal_tasks_.load();
        stats.avg_depth = terminals == 0 ? 0.0
                                         : static_cast<double>(terminal_depth_sum_.load()) / static_cast<double>(terminals);
        stats.wall_time = std::chrono::duration<double>(Clock::now() - start_).count();

        if (counterexample_) return VerdictReport::violated(net_, region_, prop_, *counterexample_, stats);
        if (solver_failure_.load()) return VerdictReport::solver_failure(stats, failure_detail_);
        if (timed_out_.load()) return VerdictReport::timeout(stats, "time limit reached");
        if (incomplete_.load()) {
            return VerdictReport::timeout(stats, "refinement exhausted without a validated counterexample");
        }
        return VerdictReport::safe(stats);
    }

    const Network& net_;
    const InputRegion& region_;
    const OutputProperty& prop_;
    const EngineConfig& cfg_;
    std::size_t max_depth_ = 0;
    std::optional<ConcreteInterval> parameter_;
    RegionEncoding base_;
    WorkPool pool_;
    Clock::time_point start_;
    Clock::time_point deadline_;

    std::atomic<bool> stop_{false};
    std::atomic<bool> timed_out_{false};
    std::atomic<bool> incomplete_{false};
    std::atomic<bool> solver_failure_{false};
    std::atomic<std::size_t> lp_calls_{0};
    std::atomic<std::size_t> tasks_explored_{0};
    std::atomic<std::size_t> max_seen_depth_{0};
    std::atomic<std::size_t> terminal_tasks_{0};
    std::atomic<std::size_t> terminal_depth_sum_{0};

    std::mutex result_m_;
    std::optional<std::vector<double>> counterexample_;
    std::string failure_detail_;
};

}  // namespace

VerdictReport verify(const Network& net, const InputRegion& region, const OutputProperty& prop,
                     const EngineConfig& cfg) {
    cfg.validate();
    validate_region(region);
    validate_property(prop, net.output_dim());
    if (region_dim(region) != net.input_dim()) {
        throw PropertyError("region has " + std::to_string(region_dim(region)) + " inputs, network has " +
                            std::to_string(net.input_dim()));
    }
    Search search(net, region, prop, cfg);
    return search.run();
}

namespace {

class Refiner {
public:
    Refiner(const Network& net, const InputBox& box, const EngineConfig& cfg) : net_(net), box_(box), cfg_(cfg) {
        max_depth_ = cfg.max_depth == 0 ? net.relu_count() : cfg.max_depth;
    }

    RefinedRange run() {
        Node root = expand(RefinementTask{}, nullptr);
        if (!root.hull) throw std::logic_error("refine_output_range: root task infeasible");
        result_.outputs = *root.hull;
        return std::move(result_);
    }

private:
    struct Node {
        std::optional<std::vector<ConcreteInterval>> bounds;  // this task alone
        std::optional<std::vector<ConcreteInterval>> hull;    // union over its leaves
    };

    std::optional<std::vector<ConcreteInterval>> task_bounds(const PropagationTrace& trace,
                                                             const std::vector<SplitRow>& rows) {
        if (rows.empty()) return trace.output_ranges();
        std::vector<lp::Constraint> constraints;
        for (const auto& r : rows) {
            constraints.push_back({r.expr, r.non_negative ? lp::Relation::GreaterEqual : lp::Relation::LessEqual, 0.0});
        }
        std::vector<ConcreteInterval> out;
        for (const auto& pair : trace.output) {
            lp::LinearProgram prog;
            prog.constraints = constraints;
            prog.lower = box_.lo;
            prog.upper = box_.hi;
            prog.objective = pair.eq_low;
            prog.sense = lp::Sense::Minimize;
            const double lo = solve(prog);
            if (std::isnan(lo)) return std::nullopt;
            prog.objective = pair.eq_up;
            prog.sense = lp::Sense::Maximize;
            const double hi = solve(prog);
            if (std::isnan(hi)) return std::nullopt;
            out.push_back({lo, hi});
        }
        return out;
    }

    // NaN when infeasible.
    double solve(const lp::LinearProgram& prog) {
        ++result_.lp_calls;
        const auto out = lp::solve(prog, cfg_.lp);
        if (out.status == lp::Status::Infeasible) return std::numeric_limits<double>::quiet_NaN();
        if (!out.optimal()) throw std::runtime_error(std::string("refine_output_range: LP ") + lp::to_string(out.status));
        return out.value;
    }

    // A child region lies inside its parent's, so the parent's bound still
    // holds there. Re-propagation is not monotone (downstream relaxations are
    // recomputed over the whole box), hence the intersection.
    void inherit(std::vector<ConcreteInterval>& own, const std::vector<ConcreteInterval>& parent) {
        for (std::size_t j = 0; j < own.size(); ++j) {
            const double lo = std::max(own[j].lo, parent[j].lo);
            const double hi = std::min(own[j].hi, parent[j].hi);
            if (lo > hi) continue;  // only within LP tolerance; keep the child's own bound
            result_.inherited_endpoints += (lo != own[j].lo) + (hi != own[j].hi);
            own[j] = {lo, hi};
        }
    }

    Node expand(const RefinementTask& task, const std::vector<ConcreteInterval>* parent) {
        const PropagationTrace trace = slr_forward(net_, box_, task.forced);
        std::vector<SplitRow> rows = task.split_rows;
        const auto current = forced_rows(trace, task.forced);
        rows.insert(rows.end(), current.begin(), current.end());

        Node node;
        node.bounds = task_bounds(trace, rows);
        if (!node.bounds) return node;
        if (parent) inherit(*node.bounds, *parent);
        if (trace.overestimated.empty() || task.depth >= max_depth_) {
            ++result_.leaves;
            node.hull = node.bounds;
            return node;
        }

        const NodeId id = trace.overestimated.front();
        const BoundPair& pre = trace.pre(id);
        RefinementTask inactive = task;
        inactive.depth += 1;
        inactive.forced[id] = Activation::Inactive;
        inactive.split_rows.push_back({pre.eq_low, false});
        RefinementTask active = task;
        active.depth += 1;
        active.forced[id] = Activation::Active;
        active.split_rows.push_back({pre.eq_up, true});

        Node a = expand(inactive, &*node.bounds);
        Node b = expand(active, &*node.bounds);
        result_.splits.push_back({id, task.depth, *node.bounds, a.bounds, b.bounds});

        if (a.hull && b.hull) {
            std::vector<ConcreteInterval> h(a.hull->size());
            for (std::size_t j = 0; j < h.size(); ++j) h[j] = hull((*a.hull)[j], (*b.hull)[j]);
            node.hull = std::move(h);
        } else {
            node.hull = a.hull ? a.hull : b.hull;
        }
        return node;
    }

    const Network& net_;
    const InputBox& box_;
    const EngineConfig& cfg_;
    std::size_t max_depth_ = 0;
    RefinedRange result_;
};

}  // namespace

RefinedRange refine_output_range(const Network& net, const InputBox& box, const EngineConfig& cfg) {
    cfg.validate();
    if (box.dim() != net.input_dim()) throw DimensionError("refine_output_range: box dimension mismatch");
    return Refiner(net, box, cfg).run();
}

}  // namespace symrelax
