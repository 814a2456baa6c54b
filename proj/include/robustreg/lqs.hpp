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
#include <optional>
#include <queue>

#include "robustreg/exponent.hpp"
#include "robustreg/lp.hpp"
#include "robustreg/matrix.hpp"
#include "robustreg/norms.hpp"
#include "robustreg/rootfind.hpp"

namespace robustreg {

enum class PhiNorm { L1, Linf };
enum class PsiNorm { L1, L2, Linf };

inline double psi_value(PsiNorm psi, const Vec& beta) {
    switch (psi) {
        case PsiNorm::L1: return vec_norm(beta, Exponent(1.0));
        case PsiNorm::L2: return vec_norm(beta, Exponent(2.0));
        case PsiNorm::Linf: return vec_norm(beta, Exponent::infinity());
    }
    throw std::logic_error("psi_value: unreachable");
}

/// Robust least-quantile variant: worst case of the q-th order statistic over
/// perturbations whose dual-side budget is lambda * psi(beta); phi selects
/// which budget geometry applies (see robust_lqs_inner).
struct RobustLqsSpec {
    PhiNorm phi;
    PsiNorm psi;
    double lambda;
};

struct LqsProblem {
    Matrix x;
    Vec y;
    int q;
    std::optional<RobustLqsSpec> robust;

    LqsProblem(Matrix design, Vec targets, int order,
               std::optional<RobustLqsSpec> rob = std::nullopt)
        : x(std::move(design)), y(std::move(targets)), q(order), robust(std::move(rob)) {
        if (x.rows() != y.size() || x.rows() < 1 || x.cols() < 1)
            throw std::invalid_argument("LqsProblem: inconsistent dimensions");
        if (q < 1 || static_cast<std::size_t>(q) > y.size())
            throw std::invalid_argument("LqsProblem: order out of range");
        if (robust && !(robust->lambda > 0.0))
            throw std::invalid_argument("LqsProblem: robust lambda must be > 0");
    }

    /// psi = l2 instances need a cone and are handled by outer approximation.
    bool conic() const { return robust && robust->psi == PsiNorm::L2; }
};

/// q-th smallest absolute entry (1-indexed).
inline double order_statistic(const Vec& r, int q) {
    if (q < 1 || static_cast<std::size_t>(q) > r.size())
        throw std::invalid_argument("order_statistic: q out of range");
    Vec a(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) a[i] = std::abs(r[i]);
    std::nth_element(a.begin(), a.begin() + (q - 1), a.end());
    return a[q - 1];
}

/**
 * Water-filling level: the nu with
 *   (nu - |r_(q)|)_+ + ... + (nu - |r_(m)|)_+ = budget
 * over the m-q+1 largest absolute residuals, solved by bisection. budget = 0
 * returns |r_(q)| (the limit level).
 */
inline double waterfill(const Vec& abs_residuals, int q, double budget, double tol = 1e-12) {
    if (budget < 0.0) throw std::invalid_argument("waterfill: negative budget");
    const std::size_t m = abs_residuals.size();
    if (q < 1 || static_cast<std::size_t>(q) > m)
        throw std::invalid_argument("waterfill: q out of range");
    Vec s(m);
    for (std::size_t i = 0; i < m; ++i) s[i] = std::abs(abs_residuals[i]);
    std::sort(s.begin(), s.end());
    double aq = s[q - 1];
    if (budget == 0.0) return aq;
    auto f = [&](double nu) {
        double acc = -budget;
        for (std::size_t i = static_cast<std::size_t>(q) - 1; i < m; ++i)
            acc += std::max(nu - s[i], 0.0);
        return acc;
    };
    // f(aq) = -budget < 0; widen the right end past rounding if needed.
    double hi = aq + budget;
    for (int g = 0; g < 64 && f(hi) < 0.0; ++g) hi = aq + 2.0 * (hi - aq) + 1e-12;
    return bisect(f, aq, hi, tol);
}

/// Worst-case q-th order statistic given the residuals and the perturbation
/// budget lambda * psi(beta): an l_inf budget lifts every residual, an l_1
/// budget water-fills the top ones.
inline double robust_lqs_inner(const Vec& residuals, int q, PhiNorm phi, double psi_budget) {
    if (psi_budget < 0.0) throw std::invalid_argument("robust_lqs_inner: negative budget");
    if (phi == PhiNorm::L1) return order_statistic(residuals, q) + psi_budget;
    return waterfill(residuals, q, psi_budget, 1e-12);
}

/// True objective of a (possibly robust) LQS instance at beta.
inline double lqs_objective(const LqsProblem& prob, const Vec& beta) {
    Vec r = prob.y - prob.x.apply(beta);
    if (!prob.robust) return order_statistic(r, prob.q);
    double budget = prob.robust->lambda * psi_value(prob.robust->psi, beta);
    return robust_lqs_inner(r, prob.q, prob.robust->phi, budget);
}

struct LqsSolution {
    Vec beta;
    double value;
};

namespace detail {

inline double binomial_count(std::size_t m, std::size_t q, double cap) {
    double c = 1.0;
    for (std::size_t i = 0; i < q; ++i) {
        c *= static_cast<double>(m - i) / static_cast<double>(i + 1);
        if (c > cap) return c;
    }
    return c;
}

// min_beta max_{i in subset} |y_i - x_i' beta| via the simplex.
inline LqsSolution chebyshev_fit(const Matrix& x, const Vec& y,
                                 const std::vector<std::size_t>& subset) {
    const std::size_t n = x.cols(), k = subset.size();
    LpProblem p;
    p.objective.assign(n + 1, 0.0);
    p.objective[n] = 1.0;
    p.constraints = Matrix(2 * k, n + 1);
    p.senses.assign(2 * k, Sense::LE);
    p.rhs.assign(2 * k, 0.0);
    const double inf = std::numeric_limits<double>::infinity();
    p.lower.assign(n + 1, -inf);
    p.upper.assign(n + 1, inf);
    p.lower[n] = 0.0;
    for (std::size_t t = 0; t < k; ++t) {
        std::size_t i = subset[t];
        for (std::size_t j = 0; j < n; ++j) {
            p.constraints(2 * t, j) = -x(i, j);
            p.constraints(2 * t + 1, j) = x(i, j);
        }
        p.constraints(2 * t, n) = -1.0;
        p.constraints(2 * t + 1, n) = -1.0;
        p.rhs[2 * t] = -y[i];
        p.rhs[2 * t + 1] = y[i];
    }
    LpSolution s = solve_lp(p);
    if (s.status != LpStatus::Optimal) throw std::runtime_error("chebyshev_fit: LP not optimal");
    return {Vec(s.x.begin(), s.x.begin() + n), s.value};
}

}  // namespace detail

/**
 * Exact nominal LQS by subset enumeration: the optimal q-th order statistic
 * equals the best Chebyshev fit over some q-point subset, so minimizing the
 * Chebyshev LP over all C(m,q) subsets is exact. Desk scale C(m,q) <= 1e4.
 */
inline LqsSolution lqs_oracle(const LqsProblem& prob, double /*tol*/ = 1e-9) {
    if (prob.robust) throw std::invalid_argument("lqs_oracle: nominal instances only");
    const std::size_t m = prob.y.size(), q = static_cast<std::size_t>(prob.q);
    if (detail::binomial_count(m, q, 1e4) > 1e4)
        throw std::invalid_argument("lqs_oracle: C(m,q) exceeds the desk-scale cap");

    std::vector<std::size_t> subset(q);
    for (std::size_t i = 0; i < q; ++i) subset[i] = i;
    LqsSolution best{Vec(prob.x.cols(), 0.0), std::numeric_limits<double>::infinity()};
    while (true) {
        LqsSolution fit = detail::chebyshev_fit(prob.x, prob.y, subset);
        // The subset Chebyshev value upper-bounds this subset's contribution;
        // the q-th order statistic at its beta can only be smaller.
        double val = order_statistic(prob.y - prob.x.apply(fit.beta), prob.q);
        if (val < best.value) best = {fit.beta, val};
        // next combination
        std::size_t i = q;
        while (i > 0 && subset[i - 1] == m - q + (i - 1)) --i;
        if (i == 0) break;
        ++subset[i - 1];
        for (std::size_t j = i; j < q; ++j) subset[j] = subset[j - 1] + 1;
    }
    return best;
}

struct MioOptions {
    double gap_tol = 1e-7;
    long node_limit = 200000;
    bool oracle_incumbent = true;  // warm start from lqs_oracle when in scale
    int cone_segments = 16;        // psi = l2 outer approximation
};

struct MioResult {
    Vec beta;
    double value = 0.0;        // true objective of the returned beta
    double proved_gap = 0.0;   // value - certified lower bound
    bool gap_proved = false;
    long nodes = 0;
    double cone_tolerance = 1.0;  // >1 when the l2 cone was outer-approximated
};

namespace detail {

struct LqsMio {
    LpProblem lp;
    std::vector<std::pair<std::size_t, std::size_t>> sos;
    std::size_t n = 0;
    double cone_tolerance = 1.0;
};

// Shared scaffolding: residual splits, |r| levels, and the order-statistic
// marking machinery gamma >= |r|_(q) driven by SOS-1 pairs
// (r+, r-), (mubar, mu), (z, mubar).
struct MioBuilder {
    LpProblem lp;
    std::vector<std::pair<std::size_t, std::size_t>> sos;
    std::vector<std::vector<std::pair<std::size_t, double>>> row_terms;
    std::vector<Sense> row_senses;
    Vec row_rhs;

    std::size_t add_var(double lo, double hi, double cost) {
        lp.objective.push_back(cost);
        lp.lower.push_back(lo);
        lp.upper.push_back(hi);
        return lp.objective.size() - 1;
    }
    void add_row(Sense s, double rhs, std::vector<std::pair<std::size_t, double>> terms) {
        row_senses.push_back(s);
        row_rhs.push_back(rhs);
        row_terms.push_back(std::move(terms));
    }
    LqsMio finish(std::size_t n, double cone_tol) {
        std::size_t rows = row_rhs.size(), vars = lp.objective.size();
        lp.constraints = Matrix(rows, vars);
        for (std::size_t r = 0; r < rows; ++r)
            for (auto& [j, c] : row_terms[r]) lp.constraints(r, j) += c;
        lp.senses = row_senses;
        lp.rhs = row_rhs;
        return {std::move(lp), std::move(sos), n, cone_tol};
    }
};

inline LqsMio build_lqs_mio(const LqsProblem& prob, int cone_segments) {
    const std::size_t m = prob.y.size(), n = prob.x.cols();
    const double inf = std::numeric_limits<double>::infinity();
    MioBuilder b;

    std::vector<std::size_t> beta(n);
    for (std::size_t j = 0; j < n; ++j) beta[j] = b.add_var(-inf, inf, 0.0);
    std::size_t gamma = b.add_var(0.0, inf, 0.0);
    std::vector<std::size_t> rp(m), rm(m), mubar(m), mu(m), z(m);
    for (std::size_t i = 0; i < m; ++i) {
        rp[i] = b.add_var(0.0, inf, 0.0);
        rm[i] = b.add_var(0.0, inf, 0.0);
        mubar[i] = b.add_var(0.0, inf, 0.0);
        mu[i] = b.add_var(0.0, inf, 0.0);
        z[i] = b.add_var(0.0, 1.0, 0.0);
    }
    for (std::size_t i = 0; i < m; ++i) {
        // r+ - r- + x_i'beta = y_i
        std::vector<std::pair<std::size_t, double>> res{{rp[i], 1.0}, {rm[i], -1.0}};
        for (std::size_t j = 0; j < n; ++j)
            if (prob.x(i, j) != 0.0) res.emplace_back(beta[j], prob.x(i, j));
        b.add_row(Sense::EQ, prob.y[i], std::move(res));
        // (r+ + r-) - gamma = mubar - mu
        b.add_row(Sense::EQ, 0.0,
                  {{rp[i], 1.0}, {rm[i], 1.0}, {gamma, -1.0}, {mubar[i], -1.0}, {mu[i], 1.0}});
        // mu <= gamma
        b.add_row(Sense::LE, 0.0, {{mu[i], 1.0}, {gamma, -1.0}});
        b.sos.emplace_back(rp[i], rm[i]);
        b.sos.emplace_back(mubar[i], mu[i]);
        b.sos.emplace_back(z[i], mubar[i]);
    }
    {
        std::vector<std::pair<std::size_t, double>> zsum;
        for (std::size_t i = 0; i < m; ++i) zsum.emplace_back(z[i], 1.0);
        b.add_row(Sense::EQ, static_cast<double>(prob.q), std::move(zsum));
    }

    double cone_tol = 1.0;
    if (!prob.robust) {
        b.lp.objective[gamma] = 1.0;
        return b.finish(n, cone_tol);
    }

    // psi(beta) <= t via epigraph variables.
    const RobustLqsSpec& rs = *prob.robust;
    std::size_t psi_t = b.add_var(0.0, inf, 0.0);
    switch (rs.psi) {
        case PsiNorm::L1: {
            std::vector<std::pair<std::size_t, double>> sum{{psi_t, -1.0}};
            for (std::size_t j = 0; j < n; ++j) {
                std::size_t bp = b.add_var(0.0, inf, 0.0);
                std::size_t bm = b.add_var(0.0, inf, 0.0);
                b.add_row(Sense::EQ, 0.0, {{beta[j], 1.0}, {bp, -1.0}, {bm, 1.0}});
                sum.emplace_back(bp, 1.0);
                sum.emplace_back(bm, 1.0);
            }
            b.add_row(Sense::LE, 0.0, std::move(sum));
            break;
        }
        case PsiNorm::Linf: {
            for (std::size_t j = 0; j < n; ++j) {
                b.add_row(Sense::LE, 0.0, {{beta[j], 1.0}, {psi_t, -1.0}});
                b.add_row(Sense::LE, 0.0, {{beta[j], -1.0}, {psi_t, -1.0}});
            }
            break;
        }
        case PsiNorm::L2: {
            if (n > 2)
                throw std::invalid_argument(
                    "lqs_mio: psi = l2 outer approximation implemented for n <= 2");
            if (n == 1) {
                b.add_row(Sense::LE, 0.0, {{beta[0], 1.0}, {psi_t, -1.0}});
                b.add_row(Sense::LE, 0.0, {{beta[0], -1.0}, {psi_t, -1.0}});
            } else {
                int segs = std::max(4, cone_segments);
                for (int k = 0; k < segs; ++k) {
                    double ang = 2.0 * 3.14159265358979323846 * k / segs;
                    b.add_row(Sense::LE, 0.0,
                              {{beta[0], std::cos(ang)}, {beta[1], std::sin(ang)},
                               {psi_t, -1.0}});
                }
                cone_tol = 1.0 / std::cos(3.14159265358979323846 / segs);
            }
            break;
        }
    }

    if (rs.phi == PhiNorm::L1) {
        // min gamma + tau, tau >= lambda psi(beta).
        std::size_t tau = b.add_var(0.0, inf, 1.0);
        b.lp.objective[gamma] = 1.0;
        b.add_row(Sense::LE, 0.0, {{psi_t, rs.lambda}, {tau, -1.0}});
        return b.finish(n, cone_tol);
    }

    // phi = l_inf: water-filling level nu with the LP-duality budget row,
    // floored by the nominal order statistic (nu >= gamma covers the
    // zero-budget boundary the bare dual block misses).
    std::size_t nu = b.add_var(0.0, inf, 1.0);
    std::size_t rho = b.add_var(-inf, inf, 0.0);
    std::vector<std::size_t> a(m), pi(m), slack(m), tau(m);
    for (std::size_t i = 0; i < m; ++i) {
        a[i] = b.add_var(0.0, inf, 0.0);
        pi[i] = b.add_var(0.0, inf, 0.0);
        slack[i] = b.add_var(0.0, inf, 0.0);
        tau[i] = b.add_var(0.0, inf, 0.0);
    }
    for (std::size_t i = 0; i < m; ++i) {
        // a_i = r+ + r-
        b.add_row(Sense::EQ, 0.0, {{a[i], 1.0}, {rp[i], -1.0}, {rm[i], -1.0}});
        // slack_i = pi_i - nu + a_i  (so pi_i >= nu - a_i with SOS tightness)
        b.add_row(Sense::EQ, 0.0, {{pi[i], 1.0}, {nu, -1.0}, {a[i], 1.0}, {slack[i], -1.0}});
        // rho - tau_i <= pi_i
        b.add_row(Sense::LE, 0.0, {{rho, 1.0}, {tau[i], -1.0}, {pi[i], -1.0}});
        b.sos.emplace_back(slack[i], pi[i]);
    }
    // lambda psi(beta) <= (m-q+1) rho - sum tau
    {
        std::vector<std::pair<std::size_t, double>> budget{
            {psi_t, rs.lambda}, {rho, -static_cast<double>(m - prob.q + 1)}};
        for (std::size_t i = 0; i < m; ++i) budget.emplace_back(tau[i], 1.0);
        b.add_row(Sense::LE, 0.0, std::move(budget));
    }
    // nu >= gamma
    b.add_row(Sense::LE, 0.0, {{gamma, 1.0}, {nu, -1.0}});
    return b.finish(n, cone_tol);
}

}  // namespace detail

/**
 * Branch-and-bound solver for nominal and robust LQS. All combinatorics live
 * in SOS-1 pairs, handled by branching (one member fixed to zero per child);
 * node selection is best-bound, the branching pair is the most violated one
 * (largest min of the two factors). Incumbents come from evaluating the true
 * objective at every node's LP point, plus the enumeration oracle when the
 * instance is within its scale cap. With psi = l2 the proved bound is with
 * respect to the outer cone approximation (cone_tolerance reports the
 * sec(pi/segments) factor); the returned value is always the true objective
 * of the returned beta.
 */
inline MioResult lqs_mio(const LqsProblem& prob, const MioOptions& opts = {}) {
    detail::LqsMio tmpl = detail::build_lqs_mio(prob, opts.cone_segments);
    const std::size_t n = tmpl.n;

    MioResult out;
    out.cone_tolerance = tmpl.cone_tolerance;
    Vec beta_inc(n, 0.0);
    double inc = lqs_objective(prob, beta_inc);
    if (opts.oracle_incumbent && !prob.conic() &&
        detail::binomial_count(prob.y.size(), static_cast<std::size_t>(prob.q), 1e4) <= 1e4) {
        LqsProblem nominal(prob.x, prob.y, prob.q);
        LqsSolution warm = lqs_oracle(nominal);
        double v = lqs_objective(prob, warm.beta);
        if (v < inc) {
            inc = v;
            beta_inc = warm.beta;
        }
    }

    struct Node {
        double bound;
        std::vector<std::size_t> fixed;
    };
    auto cmp = [](const Node& a, const Node& b) { return a.bound > b.bound; };
    std::priority_queue<Node, std::vector<Node>, decltype(cmp)> open(cmp);
    open.push({-std::numeric_limits<double>::infinity(), {}});

    double lb_at_exit = -std::numeric_limits<double>::infinity();
    bool proved = false;
    while (!open.empty()) {
        Node node = open.top();
        open.pop();
        if (node.bound >= inc - opts.gap_tol) {
            lb_at_exit = node.bound;
            proved = true;
            break;
        }
        if (out.nodes >= opts.node_limit) {
            lb_at_exit = node.bound;
            proved = false;
            break;
        }
        ++out.nodes;

        LpProblem lp = tmpl.lp;
        for (std::size_t idx : node.fixed) lp.upper[idx] = 0.0;
        LpSolution sol = solve_lp(lp);
        if (sol.status == LpStatus::Infeasible) continue;
        if (sol.status != LpStatus::Optimal)
            throw std::runtime_error("lqs_mio: node LP did not solve to optimality");
        double bound = sol.value;

        Vec beta(sol.x.begin(), sol.x.begin() + n);
        double cand = lqs_objective(prob, beta);
        if (cand < inc) {
            inc = cand;
            beta_inc = beta;
        }
        if (bound >= inc - opts.gap_tol) continue;

        // Most-violated SOS-1 pair: largest min of the two factors.
        double best_v = 1e-7;
        int best_pair = -1;
        for (std::size_t k = 0; k < tmpl.sos.size(); ++k) {
            double va = sol.x[tmpl.sos[k].first], vb = sol.x[tmpl.sos[k].second];
            double v = std::min(va, vb);
            if (v > best_v) {
                best_v = v;
                best_pair = static_cast<int>(k);
            }
        }
        if (best_pair < 0) continue;  // SOS-feasible: bound is tight for this node

        Node a{bound, node.fixed}, c{bound, node.fixed};
        a.fixed.push_back(tmpl.sos[best_pair].first);
        c.fixed.push_back(tmpl.sos[best_pair].second);
        open.push(std::move(a));
        open.push(std::move(c));
    }
    if (open.empty()) {
        proved = true;
        lb_at_exit = inc - opts.gap_tol;
    }

    out.beta = beta_inc;
    out.value = inc;
    out.gap_proved = proved;
    out.proved_gap = std::max(0.0, inc - std::min(inc, lb_at_exit));
    return out;
}

}  // namespace robustreg
