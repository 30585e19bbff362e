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

#include "symrelax/lp.hpp"

#include "symrelax/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace symrelax::lp {

void LinearProgram::validate() const {
    const std::size_t n = num_vars();
    if (upper.size() != n) throw std::invalid_argument("lp: bound vectors differ in length");
    if (objective.dim() != n) throw std::invalid_argument("lp: objective dimension mismatch");
    if (!objective.is_finite()) throw std::invalid_argument("lp: objective is not finite");
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(lower[j]) || !std::isfinite(upper[j])) throw std::invalid_argument("lp: bounds must be finite");
        if (lower[j] > upper[j]) throw std::invalid_argument("lp: lower bound above upper bound on variable " + std::to_string(j));
    }
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& c = constraints[i];
        if (c.row.dim() != n) throw std::invalid_argument("lp: constraint " + std::to_string(i) + " dimension mismatch");
        if (!c.row.is_finite() || !std::isfinite(c.rhs)) {
            throw std::invalid_argument("lp: constraint " + std::to_string(i) + " is not finite");
        }
    }
}

namespace {

// Standard-form tableau over shifted variables y = x - lower >= 0. Every
// variable's upper bound becomes an explicit <= row.
class Tableau {
public:
    Tableau(const LinearProgram& lp, const Settings& s) : settings_(s), n_(lp.num_vars()) {
        struct Row {
            std::vector<double> a;
            Relation rel;
            double b;
        };
        std::vector<Row> rows;
        rows.reserve(lp.constraints.size() + n_);
        for (const auto& c : lp.constraints) {
            Row r{c.row.coeffs, c.relation, c.rhs - c.row.constant};
            for (std::size_t j = 0; j < n_; ++j) r.b -= r.a[j] * lp.lower[j];
            rows.push_back(std::move(r));
        }
        for (std::size_t j = 0; j < n_; ++j) {
            Row r{std::vector<double>(n_, 0.0), Relation::LessEqual, lp.upper[j] - lp.lower[j]};
            r.a[j] = 1.0;
            rows.push_back(std::move(r));
        }
        for (auto& r : rows) {
            if (r.b < 0.0) {
                for (double& v : r.a) v = -v;
                r.b = -r.b;
                if (r.rel == Relation::LessEqual) {
                    r.rel = Relation::GreaterEqual;
                } else if (r.rel == Relation::GreaterEqual) {
                    r.rel = Relation::LessEqual;
                }
            }
        }

        m_ = rows.size();
        std::size_t slack = 0;
        std::size_t art = 0;
        for (const auto& r : rows) {
            if (r.rel != Relation::Equal) ++slack;
            if (r.rel != Relation::LessEqual) ++art;
        }
        first_art_ = n_ + slack;
        cols_ = first_art_ + art;
        width_ = cols_ + 1;
        t_.assign((m_ + 1) * width_, 0.0);
        basis_.assign(m_, 0);
        active_row_.assign(m_, true);

        std::size_t next_slack = n_;
        std::size_t next_art = first_art_;
        for (std::size_t i = 0; i < m_; ++i) {
            std::copy(rows[i].a.begin(), rows[i].a.end(), row(i));
            at(i, cols_) = rows[i].b;
            switch (rows[i].rel) {
                case Relation::LessEqual:
                    at(i, next_slack) = 1.0;
                    basis_[i] = next_slack++;
                    break;
                case Relation::GreaterEqual:
                    at(i, next_slack++) = -1.0;
                    at(i, next_art) = 1.0;
                    basis_[i] = next_art++;
                    break;
                case Relation::Equal:
                    at(i, next_art) = 1.0;
                    basis_[i] = next_art++;
                    break;
            }
        }
    }

    // Minimizes the sum of artificials. Returns false on pivot-limit.
    bool phase_one() {
        double* obj = row(m_);
        std::fill(obj, obj + width_, 0.0);
        for (std::size_t j = first_art_; j < cols_; ++j) obj[j] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] >= first_art_) simd::active().axpy(-1.0, row(i), obj, width_);
        }
        allow_artificial_ = true;
        return iterate();
    }

    double phase_one_value() const { return -at(m_, cols_); }

    // Pivots remaining zero-level artificials out of the basis, dropping rows
    // that turn out to be redundant.
    void evict_artificials() {
        for (std::size_t i = 0; i < m_; ++i) {
            if (!active_row_[i] || basis_[i] < first_art_) continue;
            std::size_t best = cols_;
            double best_mag = settings_.pivot_tol;
            for (std::size_t j = 0; j < first_art_; ++j) {
                const double mag = std::abs(at(i, j));
                if (mag > best_mag) {
                    best_mag = mag;
                    best = j;
                }
            }
            if (best == cols_) {
                active_row_[i] = false;
            } else {
                pivot(i, best);
            }
        }
        allow_artificial_ = false;
    }

    bool phase_two(const std::vector<double>& cost) {
        double* obj = row(m_);
        std::fill(obj, obj + width_, 0.0);
        std::copy(cost.begin(), cost.end(), obj);
        for (std::size_t i = 0; i < m_; ++i) {
            if (!active_row_[i]) continue;
            const double cb = basis_[i] < n_ ? cost[basis_[i]] : 0.0;
            if (cb != 0.0) simd::active().axpy(-cb, row(i), obj, width_);
        }
        return iterate();
    }

    bool unbounded() const noexcept { return unbounded_; }
    std::size_t pivots() const noexcept { return pivots_; }

    std::vector<double> structural() const {
        std::vector<double> y(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (active_row_[i] && basis_[i] < n_) y[basis_[i]] = std::max(0.0, at(i, cols_));
        }
        return y;
    }

private:
    double* row(std::size_t i) noexcept { return t_.data() + i * width_; }
    const double* row(std::size_t i) const noexcept { return t_.data() + i * width_; }
    double& at(std::size_t i, std::size_t j) noexcept { return t_[i * width_ + j]; }
    double at(std::size_t i, std::size_t j) const noexcept { return t_[i * width_ + j]; }

    bool enterable(std::size_t j) const noexcept { return allow_artificial_ || j < first_art_; }

    void pivot(std::size_t p, std::size_t e) {
        double* pr = row(p);
        const double inv = 1.0 / pr[e];
        simd::active().scale(inv, pr, pr, width_);
        pr[e] = 1.0;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == p) continue;
            double* r = row(i);
            const double f = r[e];
            if (f == 0.0) continue;
            simd::active().axpy(-f, pr, r, width_);
            r[e] = 0.0;
            if (i < m_ && r[cols_] < 0.0 && r[cols_] > -settings_.pivot_tol) r[cols_] = 0.0;
        }
        basis_[p] = e;
        ++pivots_;
    }

    bool iterate() {
        const double rc_tol = settings_.pivot_tol;
        const std::size_t degenerate_limit = 2 * (n_ + m_);
        std::size_t degenerate_run = 0;
        bool bland = false;
        unbounded_ = false;
        while (true) {
            if (pivots_ >= settings_.max_pivots) return false;
            const double* obj = row(m_);
            std::size_t enter = cols_;
            double most_negative = -rc_tol;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (!enterable(j) || !(obj[j] < -rc_tol)) continue;
                if (bland) {
                    enter = j;
                    break;
                }
                if (obj[j] < most_negative) {
                    most_negative = obj[j];
                    enter = j;
                }
            }
            if (enter == cols_) return true;

            std::size_t leave = m_;
            double best_ratio = std::numeric_limits<double>::infinity();
            double best_pivot = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                if (!active_row_[i]) continue;
                const double a = at(i, enter);
                if (a <= settings_.pivot_tol) continue;
                const double ratio = std::max(0.0, at(i, cols_)) / a;
                bool take = false;
                if (ratio < best_ratio - 1e-12) {
                    take = true;
                } else if (ratio <= best_ratio + 1e-12 && leave != m_) {
                    take = bland ? basis_[i] < basis_[leave] : a > best_pivot;
                }
                if (take) {
                    best_ratio = std::min(ratio, best_ratio);
                    best_pivot = a;
                    leave = i;
                }
            }
            if (leave == m_) {
                unbounded_ = true;
                return true;
            }
            if (best_ratio <= 1e-12) {
                if (++degenerate_run > degenerate_limit) bland = true;
            } else {
                degenerate_run = 0;
                bland = false;
            }
            pivot(leave, enter);
        }
    }

    Settings settings_;
    std::size_t n_;
    std::size_t m_ = 0;
    std::size_t cols_ = 0;
    std::size_t width_ = 0;
    std::size_t first_art_ = 0;
    std::vector<double> t_;
    std::vector<std::size_t> basis_;
    std::vector<bool> active_row_;
    bool allow_artificial_ = true;
    bool unbounded_ = false;
    std::size_t pivots_ = 0;
};

std::vector<double> unshift(const LinearProgram& lp, const std::vector<double>& y) {
    std::vector<double> x(y.size());
    for (std::size_t j = 0; j < y.size(); ++j) x[j] = std::clamp(lp.lower[j] + y[j], lp.lower[j], lp.upper[j]);
    return x;
}

}  // namespace

LpOutcome solve(const LinearProgram& lp, const Settings& settings) {
    lp.validate();
    Tableau tab(lp, settings);
    LpOutcome out;
    if (!tab.phase_one()) {
        out.status = Status::IterationLimit;
        out.pivots = tab.pivots();
        return out;
    }
    if (tab.phase_one_value() > settings.feasibility_tol) {
        out.status = Status::Infeasible;
        out.pivots = tab.pivots();
        return out;
    }
    tab.evict_artificials();

    std::vector<double> cost(lp.objective.coeffs);
    if (lp.sense == Sense::Maximize) {
        for (double& c : cost) c = -c;
    }
    const bool finished = tab.phase_two(cost);
    out.pivots = tab.pivots();
    if (!finished) {
        out.status = Status::IterationLimit;
        return out;
    }
    if (tab.unbounded()) {
        out.status = Status::Unbounded;
        return out;
    }
    out.status = Status::Optimal;
    out.solution = unshift(lp, tab.structural());
    out.value = evaluate(lp.objective, out.solution);
    return out;
}

FeasibilityResult feasible(const LinearProgram& lp, const Settings& settings) {
    lp.validate();
    Tableau tab(lp, settings);
    FeasibilityResult out;
    if (!tab.phase_one()) {
        out.status = Status::IterationLimit;
        return out;
    }
    if (tab.phase_one_value() > settings.feasibility_tol) {
        out.status = Status::Infeasible;
        return out;
    }
    out.status = Status::Optimal;
    out.witness = unshift(lp, tab.structural());
    return out;
}

double max_violation(const LinearProgram& lp, std::span<const double> x) {
    double worst = 0.0;
    for (std::size_t j = 0; j < lp.num_vars(); ++j) {
        worst = std::max({worst, lp.lower[j] - x[j], x[j] - lp.upper[j]});
    }
    for (const auto& c : lp.constraints) {
        const double v = evaluate(c.row, x);
        switch (c.relation) {
            case Relation::LessEqual:
                worst = std::max(worst, v - c.rhs);
                break;
            case Relation::GreaterEqual:
                worst = std::max(worst, c.rhs - v);
                break;
            case Relation::Equal:
                worst = std::max(worst, std::abs(v - c.rhs));
                break;
        }
    }
    return worst;
}

std::string dump_lp(const LinearProgram& lp) {
    std::ostringstream os;
    os.precision(17);
    auto terms = [&](const LinearExpression& e) {
        bool any = false;
        for (std::size_t j = 0; j < e.dim(); ++j) {
            if (e.coeffs[j] == 0.0) continue;
            os << (e.coeffs[j] < 0 ? " - " : (any ? " + " : " ")) << std::abs(e.coeffs[j]) << " x" << j;
            any = true;
        }
        if (!any) os << " 0 x0";
    };
    os << (lp.sense == Sense::Minimize ? "Minimize\n obj:" : "Maximize\n obj:");
    terms(lp.objective);
    if (lp.objective.constant != 0.0) os << (lp.objective.constant < 0 ? " - " : " + ") << std::abs(lp.objective.constant);
    os << "\nSubject To\n";
    for (std::size_t i = 0; i < lp.constraints.size(); ++i) {
        const auto& c = lp.constraints[i];
        os << " c" << i << ':';
        terms(c.row);
        const char* rel = c.relation == Relation::LessEqual ? " <= " : c.relation == Relation::GreaterEqual ? " >= " : " = ";
        os << rel << (c.rhs - c.row.constant) << '\n';
    }
    os << "Bounds\n";
    for (std::size_t j = 0; j < lp.num_vars(); ++j) os << ' ' << lp.lower[j] << " <= x" << j << " <= " << lp.upper[j] << '\n';
    os << "End\n";
    return os.str();
}

const char* to_string(Status s) noexcept {
    switch (s) {
        case Status::Optimal:
            return "optimal";
        case Status::Infeasible:
            return "infeasible";
        case Status::Unbounded:
            return "unbounded";
        case Status::IterationLimit:
            return "iteration_limit";
    }
    return "unknown";
}

}  // namespace symrelax::lp
