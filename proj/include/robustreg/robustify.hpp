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

#include <cmath>
#include <optional>
#include <stdexcept>
#include <thread>

#include "robustreg/discrepancy.hpp"
#include "robustreg/exponent.hpp"
#include "robustreg/matrix.hpp"
#include "robustreg/norms.hpp"
#include "robustreg/rng.hpp"

namespace robustreg {

/// Norm ball {Delta in R^{rows x cols} : ||Delta||_shape <= radius}.
struct UncertaintySet {
    MatrixNormSpec shape;
    double radius;
    std::size_t rows, cols;

    // radius = 0 degenerates to the nominal problem and is allowed.
    UncertaintySet(MatrixNormSpec s, double lambda, std::size_t m, std::size_t n)
        : shape(std::move(s)), radius(lambda), rows(m), cols(n) {
        if (!(lambda >= 0.0) || !std::isfinite(lambda))
            throw std::invalid_argument("UncertaintySet: radius must be finite and >= 0");
    }
};

/// Membership check via the shape norm; for shapes whose norm is evaluated by
/// ascent (general induced pairs) this is a necessary condition only.
inline bool set_contains(const UncertaintySet& u, const Matrix& delta, double tol = 1e-9) {
    return mat_norm(delta, u.shape).value <= u.radius * (1.0 + tol);
}

enum class EquivStatus { Exact, BoundsOnly };

/// h̄(beta) = coefficient * ||beta||_exponent.
struct RegularizerForm {
    double coefficient;
    Exponent exponent;
    double value(const Vec& beta) const { return coefficient * vec_norm(beta, exponent); }
};

/// Outcome of the robustification <-> regularization dictionary lookup. When
/// status is Exact the worst-case loss equals ||z||_p + h̄(beta) identically
/// and lower = upper = coefficient; otherwise only the sandwich
///   ||z||_p + lower ||beta|| <= sup <= ||z||_p + upper ||beta||  holds.
struct EquivalenceVerdict {
    EquivStatus status;
    RegularizerForm regularizer;
    double lower_coefficient;
    double upper_coefficient;
};

struct PerturbationWitness {
    Matrix perturbation;
    double attained_value;
};

struct WorstCase {
    double value;
    bool exact;  // false when the value is a multi-start ascent lower bound
    std::optional<PerturbationWitness> witness;
};

struct AscentOptions {
    int starts = 64;
    int iters = 500;
    std::uint64_t seed = 4242;
};

namespace detail {

struct InnerMax {
    double value;
    Vec u;
    bool exact;
};

// sup { ||z + u||_p : ||u||_r <= rho } with a maximizing u. Closed form when
// r in {1, inf}, when p = r, when p in {1, inf}, or when z = 0; multi-start
// successive-linearization ascent otherwise (a certified lower bound).
inline InnerMax inner_worst_case(const Vec& z, const Exponent& p, const Exponent& r, double rho,
                                 const AscentOptions& opts = {}) {
    const std::size_t m = z.size();
    if (rho == 0.0) return {vec_norm(z, p), Vec(m, 0.0), true};

    if (r.is_inf()) {
        Vec u(m);
        for (std::size_t i = 0; i < m; ++i) u[i] = rho * sign_or_one(z[i]);
        return {vec_norm(z + u, p), u, true};
    }
    if (r.is_one()) {
        double best = -1.0;
        Vec best_u(m, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (double s : {1.0, -1.0}) {
                Vec u(m, 0.0);
                u[i] = s * rho;
                double v = vec_norm(z + u, p);
                if (v > best) {
                    best = v;
                    best_u = u;
                }
            }
        return {best, best_u, true};
    }
    if (is_zero(z)) {
        DiscrepancyResult d = delta(m, p, r);
        Vec u = rho * d.witness;
        return {rho * d.value, u, true};
    }
    if (p == r) {
        double nz = vec_norm(z, r);
        Vec u = (rho / nz) * z;
        return {vec_norm(z, p) + rho, u, true};
    }
    if (p.is_one()) {
        DiscrepancyResult d = delta(m, Exponent(1.0), r);
        Vec u(m);
        for (std::size_t i = 0; i < m; ++i)
            u[i] = rho * sign_or_one(z[i]) * std::abs(d.witness[i]);
        return {vec_norm(z, Exponent(1.0)) + rho * d.value, u, true};
    }
    if (p.is_inf()) {
        std::size_t l = 0;
        for (std::size_t i = 1; i < m; ++i)
            if (std::abs(z[i]) > std::abs(z[l])) l = i;
        Vec u(m, 0.0);
        u[l] = rho * sign_or_one(z[l]);
        return {vec_norm(z, p) + rho, u, true};
    }

    // General case: maximize the convex map u -> ||z+u||_p over the r-ball by
    // successive linearization (each step is a Hölder witness step, so the
    // objective never decreases). Structured starts guarantee the value
    // dominates both the aligned construction and the h̄ witness.
    auto ascend = [&](Vec u) {
        double val = vec_norm(z + u, p);
        for (int it = 0; it < opts.iters; ++it) {
            Vec g = norm_subgradient(z + u, p);
            if (is_zero(g)) {
                g.assign(m, 0.0);
                g[0] = 1.0;
            }
            Vec un = rho * dual_witness(g, r);
            double vn = vec_norm(z + un, p);
            if (vn <= val * (1.0 + 1e-16)) break;
            u = un;
            val = vn;
        }
        return std::make_pair(val, u);
    };

    double best = -1.0;
    Vec best_u;
    std::vector<Vec> starts;
    starts.push_back((rho / vec_norm(z, r)) * z);
    DiscrepancyResult d = delta(m, p, r);
    Vec aligned(m);
    for (std::size_t i = 0; i < m; ++i)
        aligned[i] = rho * sign_or_one(z[i]) * std::abs(d.witness[i]);
    starts.push_back(aligned);
    Rng rng(opts.seed);
    for (int s = 0; s < opts.starts; ++s) {
        Vec u = rng.normal_vec(m);
        double nu = vec_norm(u, r);
        if (nu == 0.0) continue;
        starts.push_back((rho / nu) * u);
    }
    for (auto& u0 : starts) {
        auto [val, u] = ascend(u0);
        if (val > best) {
            best = val;
            best_u = u;
        }
    }
    return {best, best_u, false};
}

}  // namespace detail

/**
 * Table of robustification <-> regularization equivalences for the l_p loss
 * under a norm-ball uncertainty set on the design matrix:
 *
 *   induced (q,r) ball : h̄ = lambda d_m(p,r) ||beta||_q,    exact iff p = r or p in {1,inf}
 *   F_q ball           : h̄ = lambda d_m(p,q) ||beta||_{q*}, exact iff p = q or p in {1,inf}
 *   sigma_q ball       : h̄ = lambda d_m(p,2) ||beta||_2,    exact iff p in {1,2,inf}
 *   row-wise(q) ball   : h̄ = lambda m^{1/p} ||beta||_{q*},  exact iff p in {1,inf}
 *
 * where d_m is the discrepancy function. In the non-exact regimes the lower
 * coefficient lambda / d_m(.,p) completes the sandwich.
 */
inline EquivalenceVerdict classify_equivalence(const Exponent& p, const UncertaintySet& u) {
    using Kind = MatrixNormSpec::Kind;
    const std::size_t m = u.rows;
    const double lam = u.radius;
    bool p_extreme = p.is_one() || p.is_inf();

    EquivStatus status;
    RegularizerForm reg{0.0, Exponent(2.0)};
    double lower = 0.0;

    switch (u.shape.kind) {
        case Kind::Induced: {
            const Exponent& q = u.shape.p1;
            const Exponent& r = u.shape.p2;
            status = (p == r || p_extreme) ? EquivStatus::Exact : EquivStatus::BoundsOnly;
            reg = {lam * delta_value(m, p, r), q};
            lower = lam / delta_value(m, r, p);
            break;
        }
        case Kind::FrobeniusP: {
            const Exponent& q = u.shape.p1;
            status = (p == q || p_extreme) ? EquivStatus::Exact : EquivStatus::BoundsOnly;
            reg = {lam * delta_value(m, p, q), q.dual()};
            lower = lam / delta_value(m, q, p);
            break;
        }
        case Kind::SchattenP: {
            status = (p_extreme || (!p.is_inf() && p.value() == 2.0)) ? EquivStatus::Exact
                                                                      : EquivStatus::BoundsOnly;
            reg = {lam * delta_value(m, p, Exponent(2.0)), Exponent(2.0)};
            lower = lam / delta_value(m, Exponent(2.0), p);
            break;
        }
        case Kind::RowWise: {
            const Exponent& q = u.shape.p1;
            status = p_extreme ? EquivStatus::Exact : EquivStatus::BoundsOnly;
            reg = {lam * delta_value(m, p, Exponent::infinity()), q.dual()};
            lower = lam / delta_value(m, Exponent::infinity(), p);
            break;
        }
        case Kind::ProjectedF2:
            throw std::invalid_argument(
                "classify_equivalence: projected-F2 sets belong to the matrix module");
        default:
            throw std::logic_error("classify_equivalence: unreachable");
    }

    if (status == EquivStatus::Exact)
        return {status, reg, reg.coefficient, reg.coefficient};
    return {status, reg, lower, reg.coefficient};
}

/**
 * sup_{Delta in U} ||z + Delta beta||_p.
 *
 * The maximization is reduced through the separability of the dual norm to
 * sup { ||z+u||_p : ||u||_r <= lambda psi(beta) } and solved by the closed
 * forms where they exist (r in {1, inf}, p = r, p in {1, inf}, z = 0) or by
 * multi-start ascent flagged exact = false. Whenever a maximizing u is
 * available, a rank-one perturbation attaining the value is reconstructed and
 * returned with the attained loss re-evaluated directly.
 */
inline WorstCase worst_case_loss(const Vec& z, const Vec& beta, const UncertaintySet& u,
                                 const Exponent& p, const AscentOptions& opts = {}) {
    if (z.size() != u.rows || beta.size() != u.cols)
        throw std::invalid_argument("worst_case_loss: dimension mismatch");
    SeparableFactors fac = separable_factors(u.shape);
    double psi_beta = vec_norm(beta, fac.psi);
    if (psi_beta == 0.0) {
        return {vec_norm(z, p), true,
                PerturbationWitness{Matrix(u.rows, u.cols), vec_norm(z, p)}};
    }
    Exponent r = fac.phi.dual();
    double rho = u.radius * psi_beta;
    detail::InnerMax inner = detail::inner_worst_case(z, p, r, rho, opts);

    Vec w = dual_witness(beta, fac.psi.dual());
    Matrix delta_hat = (1.0 / psi_beta) * Matrix::outer(inner.u, w);
    double attained = vec_norm(z + delta_hat.apply(beta), p);
    return {inner.value, inner.exact, PerturbationWitness{delta_hat, attained}};
}

/**
 * Explicit perturbation attaining the worst case. Only defined in equality
 * regimes (per classify_equivalence) for z != 0; at z = 0 the h̄ upper bound
 * is attained under every set, and the h̄ attainer is returned regardless of
 * the regime.
 */
inline PerturbationWitness adversarial_witness(const Vec& z, const Vec& beta,
                                               const UncertaintySet& u, const Exponent& p) {
    if (is_zero(beta))
        return {Matrix(u.rows, u.cols), vec_norm(z, p)};
    if (!is_zero(z)) {
        EquivalenceVerdict v = classify_equivalence(p, u);
        if (v.status != EquivStatus::Exact)
            throw std::domain_error(
                "adversarial_witness: not an equality regime and z != 0; no attaining "
                "construction exists in general");
    }
    WorstCase wc = worst_case_loss(z, beta, u, p);
    return *wc.witness;
}

/**
 * Fraction of random (z, beta) pairs for which the h̄ upper bound is strict
 * under the F_q ball, i.e. upper - sup > 1e-6. Meaningful only when
 * p in (1, inf) and p != q (the probe refuses equality regimes). Trials fan
 * out across workers; per-trial generators are derived from the trial index
 * so the aggregate does not depend on scheduling.
 */
inline double strictness_probe(const Exponent& p, const Exponent& q, std::size_t m, int trials,
                               double lambda = 1.0, std::uint64_t seed = 7321, int workers = 1,
                               double threshold = 1e-6) {
    if (p.is_one() || p.is_inf() || p == q || m < 2)
        throw std::domain_error("strictness_probe: equality regime requested");
    if (trials < 1) throw std::invalid_argument("strictness_probe: trials must be >= 1");

    auto run_range = [&](int lo, int hi, int& strict_count) {
        Rng base(seed);
        int count = 0;
        for (int t = lo; t < hi; ++t) {
            Rng rng = base.fork(static_cast<std::uint64_t>(t));
            Vec z = rng.normal_vec(m);
            while (is_zero(z)) z = rng.normal_vec(m);
            Vec beta = rng.normal_vec(2);
            while (is_zero(beta)) beta = rng.normal_vec(2);
            double rho = lambda * vec_norm(beta, q.dual());
            double ub = vec_norm(z, p) + delta_value(m, p, q) * rho;
            detail::InnerMax inner = detail::inner_worst_case(z, p, q, rho);
            if (ub - inner.value > threshold) ++count;
        }
        strict_count = count;
    };

    int nw = std::max(1, workers);
    std::vector<int> counts(nw, 0);
    if (nw == 1) {
        run_range(0, trials, counts[0]);
    } else {
        std::vector<std::thread> pool;
        int chunk = (trials + nw - 1) / nw;
        for (int w = 0; w < nw; ++w) {
            int lo = w * chunk, hi = std::min(trials, (w + 1) * chunk);
            if (lo >= hi) break;
            pool.emplace_back(run_range, lo, hi, std::ref(counts[w]));
        }
        for (auto& th : pool) th.join();
    }
    int total = 0;
    for (int c : counts) total += c;
    return static_cast<double>(total) / static_cast<double>(trials);
}

/// Limit of sup_{U_{F_q}} ||alpha z + Delta beta||_p - ||alpha z||_p as
/// alpha -> inf: lambda ||beta||_{q*} ||z^{p-1}||_{q*} / ||z||_p^{p-1}.
inline double scaling_gap_limit(const Vec& z, const Vec& beta, const Exponent& q,
                                const Exponent& p, double lambda) {
    if (is_zero(z)) throw std::invalid_argument("scaling_gap_limit: z must be nonzero");
    if (p.is_one() || p.is_inf())
        throw std::invalid_argument("scaling_gap_limit: p must lie in (1, inf)");
    double pv = p.value();
    Vec zpow(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) zpow[i] = std::pow(std::abs(z[i]), pv - 1.0);
    double num = vec_norm(zpow, q.dual());
    double den = std::pow(vec_norm(z, p), pv - 1.0);
    return lambda * vec_norm(beta, q.dual()) * num / den;
}

/// Companion evaluator: gap(alpha) = sup - ||alpha z||_p along a sweep.
inline Vec scaling_gap_sweep(const Vec& z, const Vec& beta, const Exponent& q, const Exponent& p,
                             double lambda, const Vec& alphas, const AscentOptions& opts = {}) {
    if (is_zero(z)) throw std::invalid_argument("scaling_gap_sweep: z must be nonzero");
    double rho = lambda * vec_norm(beta, q.dual());
    Vec gaps;
    gaps.reserve(alphas.size());
    for (double a : alphas) {
        Vec az = a * z;
        detail::InnerMax inner = detail::inner_worst_case(az, p, q, rho, opts);
        gaps.push_back(inner.value - vec_norm(az, p));
    }
    return gaps;
}

enum class SetVariant { U, Uprime, Udoubleprime };

/**
 * Membership in the three descriptions of the Lasso uncertainty set: the
 * induced (1,2) ball U, the l0-induced set U', and the column-norm set U''.
 * All three coincide; U' is decided by the standard-basis criterion (the
 * reduction used in the proof) with a sampled sparse-beta layer kept as a
 * consistency check.
 */
inline bool uncertainty_membership(const Matrix& delta, SetVariant which, double lambda,
                                   const Exponent& p_for_uprime, int samples = 200,
                                   std::uint64_t seed = 99) {
    constexpr double kTol = 1e-12;
    switch (which) {
        case SetVariant::U:
            return mat_norm(delta, MatrixNormSpec::induced(Exponent(1.0), Exponent(2.0))).value <=
                   lambda * (1.0 + kTol);
        case SetVariant::Udoubleprime: {
            for (std::size_t j = 0; j < delta.cols(); ++j)
                if (vec_norm(delta.col(j), Exponent(2.0)) > lambda * (1.0 + kTol)) return false;
            return true;
        }
        case SetVariant::Uprime: {
            const std::size_t n = delta.cols();
            bool member = true;
            for (std::size_t j = 0; j < n; ++j) {
                Vec ej(n, 0.0);
                ej[j] = 1.0;
                if (vec_norm(delta.apply(ej), Exponent(2.0)) > lambda * (1.0 + kTol))
                    member = false;
            }
            // Sampled sparse-beta layer; may only ever flag violations the
            // basis criterion already implies.
            Rng rng(seed);
            for (int s = 0; s < samples; ++s) {
                int support = 1 + rng.uniform_int(0, static_cast<int>(n) - 1);
                Vec beta(n, 0.0);
                for (int t = 0; t < support; ++t)
                    beta[rng.uniform_int(0, static_cast<int>(n) - 1)] = rng.normal();
                if (is_zero(beta)) continue;
                double np = vec_norm(beta, p_for_uprime);
                double scale = rng.uniform(0.2, 1.0) / np;
                for (double& b : beta) b *= scale;
                double l0 = 0.0;
                for (double b : beta)
                    if (b != 0.0) l0 += 1.0;
                if (vec_norm(delta.apply(beta), Exponent(2.0)) > lambda * l0 * (1.0 + 1e-9)) {
                    if (member)
                        throw std::logic_error(
                            "uncertainty_membership: sampled check contradicts the basis "
                            "criterion");
                    return false;
                }
            }
            return member;
        }
    }
    throw std::logic_error("uncertainty_membership: unreachable");
}

}  // namespace robustreg
