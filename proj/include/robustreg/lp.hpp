// Copyright 2026 The robustreg authors
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

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "robustreg/matrix.hpp"

namespace robustreg {

enum class Sense { LE, EQ, GE };

/// min cᵀx  s.t.  A x {<=,=,>=} b,  lower <= x <= upper (entries may be ±inf).
struct LpProblem {
    Vec objective;
    Matrix constraints;  // k x n
    std::vector<Sense> senses;
    Vec rhs;
    Vec lower, upper;

    std::size_t num_vars() const { return objective.size(); }
    std::size_t num_rows() const { return rhs.size(); }

    void validate() const {
        std::size_t n = objective.size(), k = rhs.size();
        if (constraints.rows() != k || (k > 0 && constraints.cols() != n) ||
            senses.size() != k || lower.size() != n || upper.size() != n)
            throw std::invalid_argument("LpProblem: inconsistent dimensions");
        for (std::size_t j = 0; j < n; ++j)
            if (lower[j] > upper[j]) throw std::invalid_argument("LpProblem: lower > upper");
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
    LpStatus status = LpStatus::IterationLimit;
    Vec x;
    double value = 0.0;
    int iterations = 0;
};

namespace detail {

/**
 * Bounded-variable primal simplex with Bland's anti-cycling rule, dense
 * explicit basis inverse with product-form updates and periodic
 * refactorization. Phase 1 minimizes the sum of artificial variables.
 */
class SimplexSolver {
public:
    SimplexSolver(const LpProblem& p, double tol, int max_iter)
        : prob_(p), tol_(tol), max_iter_(max_iter) {
        p.validate();
        n_ = p.num_vars();
        k_ = p.num_rows();
        total_ = n_ + 2 * k_;  // structural, slack, artificial
        lo_.assign(total_, 0.0);
        up_.assign(total_, 0.0);
        const double inf = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n_; ++j) {
            lo_[j] = p.lower[j];
            up_[j] = p.upper[j];
        }
        for (std::size_t i = 0; i < k_; ++i) {
            std::size_t s = n_ + i;
            switch (p.senses[i]) {
                case Sense::LE: lo_[s] = 0.0; up_[s] = inf; break;
                case Sense::GE: lo_[s] = -inf; up_[s] = 0.0; break;
                case Sense::EQ: lo_[s] = 0.0; up_[s] = 0.0; break;
            }
        }
        art_sign_.assign(k_, 1.0);
    }

    LpSolution solve() {
        LpSolution sol;
        if (k_ == 0) {
            init_no_rows();
        } else {
            init_basis();
        }

        bool need_phase1 = false;
        for (std::size_t i = 0; i < k_; ++i)
            if (basis_.size() > i && static_cast<std::size_t>(basis_[i]) >= n_ + k_) need_phase1 = true;

        int iters = 0;
        if (need_phase1) {
            Vec c1(total_, 0.0);
            for (std::size_t a = n_ + k_; a < total_; ++a) c1[a] = 1.0;
            PhaseResult r1 = run_phase(c1, iters, /*phase1=*/true);
            if (r1 == PhaseResult::IterationLimit) {
                sol.status = LpStatus::IterationLimit;
                sol.iterations = iters;
                return sol;
            }
            double infeas = 0.0;
            for (std::size_t i = 0; i < k_; ++i)
                if (static_cast<std::size_t>(basis_[i]) >= n_ + k_) infeas += std::abs(xb_[i]);
            for (std::size_t a = n_ + k_; a < total_; ++a)
                if (status_[a] != VarStatus::Basic) infeas += std::abs(nonbasic_value(a));
            if (infeas > feas_tol()) {
                sol.status = LpStatus::Infeasible;
                sol.iterations = iters;
                return sol;
            }
            // Pin artificials at zero for phase 2.
            for (std::size_t a = n_ + k_; a < total_; ++a) {
                lo_[a] = 0.0;
                up_[a] = 0.0;
                if (status_[a] != VarStatus::Basic) status_[a] = VarStatus::AtLower;
            }
        }

        Vec c2(total_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) c2[j] = prob_.objective[j];
        PhaseResult r2 = run_phase(c2, iters, /*phase1=*/false);
        sol.iterations = iters;
        if (r2 == PhaseResult::Unbounded) {
            sol.status = LpStatus::Unbounded;
            return sol;
        }
        if (r2 == PhaseResult::IterationLimit) {
            sol.status = LpStatus::IterationLimit;
            return sol;
        }
        sol.status = LpStatus::Optimal;
        sol.x = extract();
        sol.value = 0.0;
        for (std::size_t j = 0; j < n_; ++j) sol.value += prob_.objective[j] * sol.x[j];
        return sol;
    }

private:
    enum class VarStatus { Basic, AtLower, AtUpper, FreeZero };
    enum class PhaseResult { Optimal, Unbounded, IterationLimit };

    double feas_tol() const {
        double scale = 1.0;
        for (double b : prob_.rhs) scale = std::max(scale, std::abs(b));
        return 1e-8 * scale;
    }

    double column_entry(std::size_t var, std::size_t row) const {
        if (var < n_) return prob_.constraints(row, var);
        if (var < n_ + k_) return var - n_ == row ? 1.0 : 0.0;
        return var - (n_ + k_) == row ? art_sign_[var - (n_ + k_)] : 0.0;
    }

    double nonbasic_value(std::size_t var) const {
        switch (status_[var]) {
            case VarStatus::AtLower: return lo_[var];
            case VarStatus::AtUpper: return up_[var];
            default: return 0.0;
        }
    }

    void init_no_rows() {
        status_.assign(total_, VarStatus::AtLower);
        for (std::size_t j = 0; j < n_; ++j) status_[j] = initial_status(j);
        basis_.clear();
        xb_.clear();
        binv_.assign(0, Vec());
    }

    VarStatus initial_status(std::size_t j) const {
        bool lfin = std::isfinite(lo_[j]), ufin = std::isfinite(up_[j]);
        if (lfin && ufin) return std::abs(lo_[j]) <= std::abs(up_[j]) ? VarStatus::AtLower
                                                                      : VarStatus::AtUpper;
        if (lfin) return VarStatus::AtLower;
        if (ufin) return VarStatus::AtUpper;
        return VarStatus::FreeZero;
    }

    void init_basis() {
        status_.assign(total_, VarStatus::AtLower);
        for (std::size_t j = 0; j < n_; ++j) status_[j] = initial_status(j);
        for (std::size_t a = n_ + k_; a < total_; ++a) {
            lo_[a] = 0.0;
            up_[a] = 0.0;  // widened to [0,inf) only if the row needs it
            status_[a] = VarStatus::AtLower;
        }
        basis_.assign(k_, 0);
        xb_.assign(k_, 0.0);
        binv_.assign(k_, Vec(k_, 0.0));

        for (std::size_t i = 0; i < k_; ++i) {
            double v = prob_.rhs[i];
            for (std::size_t j = 0; j < n_; ++j)
                v -= prob_.constraints(i, j) * nonbasic_value(j);
            std::size_t s = n_ + i;
            bool slack_ok = v >= lo_[s] - feas_tol() && v <= up_[s] + feas_tol();
            if (slack_ok) {
                basis_[i] = static_cast<int>(s);
                status_[s] = VarStatus::Basic;
                xb_[i] = v;
                binv_[i][i] = 1.0;
            } else {
                // Pin the slack at its nearest finite bound, make the
                // artificial basic with a nonnegative value.
                double pin = std::isfinite(lo_[s]) && v < lo_[s] ? lo_[s] : up_[s];
                if (!std::isfinite(pin)) pin = lo_[s];
                status_[s] = pin == lo_[s] ? VarStatus::AtLower : VarStatus::AtUpper;
                double resid = v - pin;
                std::size_t a = n_ + k_ + i;
                art_sign_[i] = resid >= 0.0 ? 1.0 : -1.0;
                lo_[a] = 0.0;
                up_[a] = std::numeric_limits<double>::infinity();
                basis_[i] = static_cast<int>(a);
                status_[a] = VarStatus::Basic;
                xb_[i] = std::abs(resid);
                binv_[i][i] = 1.0 / art_sign_[i];
            }
        }
    }

    void refactorize() {
        if (k_ == 0) return;
        // Gauss-Jordan inverse of the current basis matrix.
        std::vector<Vec> m(k_, Vec(2 * k_, 0.0));
        for (std::size_t i = 0; i < k_; ++i) {
            for (std::size_t r = 0; r < k_; ++r) m[r][i] = column_entry(basis_[i], r);
            m[i][k_ + i] = 1.0;
        }
        for (std::size_t col = 0; col < k_; ++col) {
            std::size_t piv = col;
            for (std::size_t r = col + 1; r < k_; ++r)
                if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
            if (std::abs(m[piv][col]) < 1e-13)
                throw std::runtime_error("simplex: singular basis during refactorization");
            std::swap(m[piv], m[col]);
            double d = m[col][col];
            for (std::size_t c = 0; c < 2 * k_; ++c) m[col][c] /= d;
            for (std::size_t r = 0; r < k_; ++r) {
                if (r == col) continue;
                double f = m[r][col];
                if (f == 0.0) continue;
                for (std::size_t c = 0; c < 2 * k_; ++c) m[r][c] -= f * m[col][c];
            }
        }
        for (std::size_t r = 0; r < k_; ++r)
            for (std::size_t c = 0; c < k_; ++c) binv_[r][c] = m[r][k_ + c];
        recompute_xb();
    }

    void recompute_xb() {
        Vec rhs(k_);
        for (std::size_t i = 0; i < k_; ++i) {
            double v = prob_.rhs[i];
            for (std::size_t j = 0; j < total_; ++j) {
                if (status_[j] == VarStatus::Basic) continue;
                double nb = nonbasic_value(j);
                if (nb != 0.0) v -= column_entry(j, i) * nb;
            }
            rhs[i] = v;
        }
        for (std::size_t i = 0; i < k_; ++i) {
            double s = 0.0;
            for (std::size_t r = 0; r < k_; ++r) s += binv_[i][r] * rhs[r];
            xb_[i] = s;
        }
    }

    PhaseResult run_phase(const Vec& cost, int& iters, bool phase1) {
        int since_refactor = 0;
        if (k_ > 0) refactorize();
        while (true) {
            if (iters >= max_iter_) return PhaseResult::IterationLimit;
            ++iters;
            ++since_refactor;
            if (k_ > 0 && since_refactor >= 64) {
                refactorize();
                since_refactor = 0;
            }

            // y = c_B' B^{-1}
            Vec y(k_, 0.0);
            for (std::size_t i = 0; i < k_; ++i) {
                double cb = cost[basis_[i]];
                if (cb == 0.0) continue;
                for (std::size_t r = 0; r < k_; ++r) y[r] += cb * binv_[i][r];
            }

            // Bland: smallest-index eligible entering variable.
            std::size_t enter = total_;
            int dir = 0;
            for (std::size_t j = 0; j < total_; ++j) {
                if (status_[j] == VarStatus::Basic) continue;
                if (lo_[j] == up_[j]) continue;            // pinned, cannot move
                if (j >= n_ + k_) continue;                // artificials never re-enter
                (void)phase1;
                double d = cost[j];
                for (std::size_t r = 0; r < k_; ++r) {
                    double a = column_entry(j, r);
                    if (a != 0.0) d -= y[r] * a;
                }
                if ((status_[j] == VarStatus::AtLower || status_[j] == VarStatus::FreeZero) &&
                    d < -tol_) {
                    enter = j;
                    dir = 1;
                    break;
                }
                if ((status_[j] == VarStatus::AtUpper || status_[j] == VarStatus::FreeZero) &&
                    d > tol_) {
                    enter = j;
                    dir = -1;
                    break;
                }
            }
            if (enter == total_) return PhaseResult::Optimal;

            // Direction through the basis: w = B^{-1} A_enter.
            Vec w(k_, 0.0);
            for (std::size_t i = 0; i < k_; ++i) {
                double s = 0.0;
                for (std::size_t r = 0; r < k_; ++r) {
                    double a = column_entry(enter, r);
                    if (a != 0.0) s += binv_[i][r] * a;
                }
                w[i] = s;
            }

            const double inf = std::numeric_limits<double>::infinity();
            double tmax = inf;  // bound flip distance of entering variable
            if (std::isfinite(lo_[enter]) && std::isfinite(up_[enter]))
                tmax = up_[enter] - lo_[enter];

            double best_t = tmax;
            int leave_row = -1;  // -1 means bound flip (or unbounded)
            for (std::size_t i = 0; i < k_; ++i) {
                double rate = dir * w[i];  // basic i changes by -rate * t
                int bi = basis_[i];
                double t = inf;
                if (rate > 1e-11) {
                    if (std::isfinite(lo_[bi])) t = (xb_[i] - lo_[bi]) / rate;
                } else if (rate < -1e-11) {
                    if (std::isfinite(up_[bi])) t = (xb_[i] - up_[bi]) / rate;
                }
                if (t < -1e-12) t = 0.0;
                if (t < best_t - 1e-12 ||
                    (t < best_t + 1e-12 && leave_row >= 0 && bi < basis_[leave_row])) {
                    best_t = std::max(t, 0.0);
                    leave_row = static_cast<int>(i);
                }
            }

            if (best_t == inf) return phase1 ? PhaseResult::Optimal : PhaseResult::Unbounded;

            double enter_from = nonbasic_value(enter);
            if (leave_row < 0) {
                // Bound flip.
                status_[enter] =
                    status_[enter] == VarStatus::AtLower ? VarStatus::AtUpper : VarStatus::AtLower;
                for (std::size_t i = 0; i < k_; ++i) xb_[i] -= best_t * dir * w[i];
                continue;
            }

            int leave_var = basis_[leave_row];
            double rate = dir * w[leave_row];
            status_[leave_var] = rate > 0.0 ? VarStatus::AtLower : VarStatus::AtUpper;
            if (!std::isfinite(nonbasic_value(leave_var)))
                throw std::logic_error("simplex: leaving variable has no finite blocking bound");

            for (std::size_t i = 0; i < k_; ++i) xb_[i] -= best_t * dir * w[i];
            xb_[leave_row] = enter_from + dir * best_t;
            basis_[leave_row] = static_cast<int>(enter);
            status_[enter] = VarStatus::Basic;

            // Product-form update of the inverse.
            double piv = w[leave_row];
            if (std::abs(piv) < 1e-12) {
                refactorize();
                since_refactor = 0;
                continue;
            }
            Vec pivot_row = binv_[leave_row];
            for (double& v : pivot_row) v /= piv;
            for (std::size_t i = 0; i < k_; ++i) {
                if (static_cast<int>(i) == leave_row) continue;
                double f = w[i];
                if (f == 0.0) continue;
                for (std::size_t r = 0; r < k_; ++r) binv_[i][r] -= f * pivot_row[r];
            }
            binv_[leave_row] = pivot_row;
        }
    }

    Vec extract() const {
        Vec x(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j)
            if (status_[j] != VarStatus::Basic) x[j] = nonbasic_value(j);
        for (std::size_t i = 0; i < k_; ++i)
            if (basis_[i] >= 0 && static_cast<std::size_t>(basis_[i]) < n_) x[basis_[i]] = xb_[i];
        return x;
    }

    const LpProblem& prob_;
    double tol_;
    int max_iter_;
    std::size_t n_ = 0, k_ = 0, total_ = 0;
    Vec lo_, up_;
    Vec art_sign_;
    std::vector<int> basis_;
    Vec xb_;
    std::vector<Vec> binv_;
    std::vector<VarStatus> status_;
};

}  // namespace detail

inline LpSolution solve_lp(const LpProblem& p, double tol = 1e-9, int max_iter = 20000) {
    detail::SimplexSolver s(p, tol, max_iter);
    return s.solve();
}

}  // namespace robustreg
