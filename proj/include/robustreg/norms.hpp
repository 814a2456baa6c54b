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
#include <stdexcept>
#include <string>

#include "robustreg/exponent.hpp"
#include "robustreg/matrix.hpp"
#include "robustreg/rng.hpp"
#include "robustreg/svd.hpp"

namespace robustreg {

/// ||x||_p. Finite p sums are computed with the largest magnitude factored out
/// so that large exponents cannot overflow.
inline double vec_norm(const Vec& x, const Exponent& p) {
    if (x.empty()) return 0.0;
    double mx = 0.0;
    for (double v : x) mx = std::max(mx, std::abs(v));
    if (p.is_inf() || mx == 0.0) return mx;
    double pv = p.value();
    if (pv == 1.0) {
        double s = 0.0;
        for (double v : x) s += std::abs(v);
        return s;
    }
    if (pv == 2.0) {
        double s = 0.0;
        for (double v : x) {
            double r = v / mx;
            s += r * r;
        }
        return mx * std::sqrt(s);
    }
    double s = 0.0;
    for (double v : x) {
        double r = std::abs(v) / mx;
        if (r > 0.0) s += std::pow(r, pv);
    }
    return mx * std::pow(s, 1.0 / pv);
}

/**
 * Maximizer of vᵀbeta over the unit ||.||_q ball: ||v||_q = 1 and
 * vᵀbeta = ||beta||_{q*}, i.e. a Hölder equality witness.
 *
 * Deterministic tie-breaking: for q = 1 the lowest-index maximal |beta_i|
 * wins (a cross-polytope vertex); for q = inf zero entries map to +1.
 */
inline Vec dual_witness(const Vec& beta, const Exponent& q) {
    if (is_zero(beta)) throw std::invalid_argument("dual_witness: beta must be nonzero");
    const std::size_t n = beta.size();
    Vec v(n, 0.0);
    if (q.is_inf()) {
        for (std::size_t i = 0; i < n; ++i) v[i] = sign_or_one(beta[i]);
        return v;
    }
    double qv = q.value();
    if (qv == 1.0) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(beta[i]) > std::abs(beta[best])) best = i;
        v[best] = sign_or_one(beta[best]);
        return v;
    }
    // v_i ∝ sign(beta_i) |beta_i|^{q*-1}, normalized in ||.||_q.
    double qs = q.dual().value();
    double mx = 0.0;
    for (double b : beta) mx = std::max(mx, std::abs(b));
    for (std::size_t i = 0; i < n; ++i) {
        double r = std::abs(beta[i]) / mx;
        v[i] = r > 0.0 ? sign_or_one(beta[i]) * std::pow(r, qs - 1.0) : 0.0;
    }
    double nrm = vec_norm(v, q);
    for (double& x : v) x /= nrm;
    return v;
}

/// A subgradient of ||.||_p at y; the gradient wherever the norm is smooth,
/// and 0 at y = 0 (0 always lies in the subdifferential there).
inline Vec norm_subgradient(const Vec& y, const Exponent& p) {
    Vec g(y.size(), 0.0);
    if (y.empty()) return g;
    if (p.is_inf()) {
        std::size_t bi = 0;
        for (std::size_t i = 1; i < y.size(); ++i)
            if (std::abs(y[i]) > std::abs(y[bi])) bi = i;
        if (y[bi] != 0.0) g[bi] = sign_or_one(y[bi]);
        return g;
    }
    double pv = p.value();
    if (pv == 1.0) {
        for (std::size_t i = 0; i < y.size(); ++i) g[i] = y[i] == 0.0 ? 0.0 : sign_or_one(y[i]);
        return g;
    }
    double np = vec_norm(y, p);
    if (np == 0.0) return g;
    for (std::size_t i = 0; i < y.size(); ++i) {
        double r = std::abs(y[i]) / np;
        g[i] = r > 0.0 ? sign_or_one(y[i]) * std::pow(r, pv - 1.0) : 0.0;
    }
    return g;
}

/// Tagged description of a matrix (semi)norm.
struct MatrixNormSpec {
    enum class Kind { FrobeniusP, SchattenP, Induced, ProjectedF2, RowWise };

    Kind kind;
    Exponent p1;  // FrobeniusP/SchattenP/RowWise exponent, or induced h-exponent
    Exponent p2;  // induced g-exponent
    Matrix mask;  // ProjectedF2 observation mask (nonzero = observed)

    static MatrixNormSpec frobenius(Exponent p) { return {Kind::FrobeniusP, p, p, {}}; }
    static MatrixNormSpec schatten(Exponent p) { return {Kind::SchattenP, p, p, {}}; }
    /// ||D||_(h,g) = max_x ||D x||_g / ||x||_h.
    static MatrixNormSpec induced(Exponent h, Exponent g) { return {Kind::Induced, h, g, {}}; }
    static MatrixNormSpec projected_f2(Matrix observed_mask) {
        return {Kind::ProjectedF2, Exponent(2.0), Exponent(2.0), std::move(observed_mask)};
    }
    /// Ball {D : ||row_i(D)||_q <= radius for all i}; identical to the
    /// induced (q*, inf) ball.
    static MatrixNormSpec row_wise(Exponent q) { return {Kind::RowWise, q, q, {}}; }

    std::string str() const {
        switch (kind) {
            case Kind::FrobeniusP: return "frob:" + p1.str();
            case Kind::SchattenP: return "schatten:" + p1.str();
            case Kind::Induced: return "induced:" + p1.str() + "," + p2.str();
            case Kind::ProjectedF2: return "projected-f2";
            case Kind::RowWise: return "rowwise:" + p1.str();
        }
        return "?";
    }
};

struct MatNormResult {
    double value = 0.0;
    bool exact = true;  // false when only a multi-start ascent lower bound
};

namespace detail {

// Multi-start ascent for max ||A x||_g over ||x||_h = 1 via successive
// linearization (each step is a Hölder witness, so the objective is
// nondecreasing). Returns a lower bound on the induced norm.
inline double induced_norm_ascent(const Matrix& a, const Exponent& h, const Exponent& g,
                                  int starts = 64, int iters = 200, std::uint64_t seed = 12345) {
    const std::size_t n = a.cols();
    Rng rng(seed);
    double best = 0.0;
    for (int s = 0; s < starts; ++s) {
        Vec x = s == 0 ? Vec(n, 1.0) : rng.normal_vec(n);
        if (is_zero(x)) continue;
        double nx = vec_norm(x, h);
        for (double& v : x) v /= nx;
        double val = vec_norm(a.apply(x), g);
        for (int it = 0; it < iters; ++it) {
            Vec y = a.apply(x);
            double ng = vec_norm(y, g);
            if (ng == 0.0) break;
            // Gradient of ||A x||_g: Aᵀ s where s is the g-norm subgradient.
            Vec sg(y.size(), 0.0);
            if (g.is_inf()) {
                std::size_t bi = 0;
                for (std::size_t i = 1; i < y.size(); ++i)
                    if (std::abs(y[i]) > std::abs(y[bi])) bi = i;
                sg[bi] = sign_or_one(y[bi]);
            } else {
                double gp = g.value();
                for (std::size_t i = 0; i < y.size(); ++i) {
                    double r = std::abs(y[i]) / ng;
                    sg[i] = r > 0.0 ? sign_or_one(y[i]) * std::pow(r, gp - 1.0) : 0.0;
                }
            }
            Vec grad = a.apply_transposed(sg);
            if (is_zero(grad)) break;
            Vec xn = dual_witness(grad, h);
            double vn = vec_norm(a.apply(xn), g);
            if (vn <= val * (1.0 + 1e-14)) {
                x = xn;
                val = std::max(val, vn);
                break;
            }
            x = xn;
            val = vn;
        }
        best = std::max(best, val);
    }
    return best;
}

}  // namespace detail

/**
 * Matrix (semi)norm evaluation.
 *
 * Induced norms are evaluated in closed form for the pairs that admit one:
 * (1,p) max column p-norm, (q,inf) max row q*-norm, (2,2) spectral. Any other
 * induced pair is estimated by multi-start ascent and flagged exact = false.
 */
inline MatNormResult mat_norm(const Matrix& a, const MatrixNormSpec& spec) {
    using Kind = MatrixNormSpec::Kind;
    switch (spec.kind) {
        case Kind::FrobeniusP:
            return {vec_norm(a.data(), spec.p1), true};
        case Kind::SchattenP:
            return {vec_norm(singular_values(a), spec.p1), true};
        case Kind::ProjectedF2: {
            if (spec.mask.rows() != a.rows() || spec.mask.cols() != a.cols())
                throw std::invalid_argument("mat_norm: mask shape mismatch");
            double s = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i)
                for (std::size_t j = 0; j < a.cols(); ++j)
                    if (spec.mask(i, j) != 0.0) s += a(i, j) * a(i, j);
            return {std::sqrt(s), true};
        }
        case Kind::RowWise: {
            // Membership norm of the row-wise ball: max row q-norm, which is
            // exactly the induced (q*, inf) norm.
            double best = 0.0;
            for (std::size_t i = 0; i < a.rows(); ++i)
                best = std::max(best, vec_norm(a.row(i), spec.p1));
            return {best, true};
        }
        case Kind::Induced: {
            const Exponent& h = spec.p1;
            const Exponent& g = spec.p2;
            if (h.is_one()) {
                double best = 0.0;
                for (std::size_t j = 0; j < a.cols(); ++j)
                    best = std::max(best, vec_norm(a.col(j), g));
                return {best, true};
            }
            if (g.is_inf()) {
                Exponent hs = h.dual();
                double best = 0.0;
                for (std::size_t i = 0; i < a.rows(); ++i)
                    best = std::max(best, vec_norm(a.row(i), hs));
                return {best, true};
            }
            if (!h.is_inf() && !g.is_inf() && h.value() == 2.0 && g.value() == 2.0) {
                Vec sv = singular_values(a);
                return {sv.empty() ? 0.0 : sv[0], true};
            }
            return {detail::induced_norm_ascent(a, h, g), false};
        }
    }
    throw std::logic_error("mat_norm: unreachable");
}

/// (phi, psi) with ||u vᵀ||_* = phi(u) psi(v) for the dual of the given norm;
/// both factors are l_p norms for every supported spec.
struct SeparableFactors {
    Exponent phi;
    Exponent psi;
};

inline SeparableFactors separable_factors(const MatrixNormSpec& spec) {
    using Kind = MatrixNormSpec::Kind;
    switch (spec.kind) {
        case Kind::FrobeniusP:
            return {spec.p1.dual(), spec.p1.dual()};
        case Kind::SchattenP:
            return {Exponent(2.0), Exponent(2.0)};
        case Kind::Induced:
            // dual of (h,g) is (h*,g*): phi = g*, psi = h.
            return {spec.p2.dual(), spec.p1};
        case Kind::RowWise:
            // Row-wise(q) is induced (q*, inf): phi = inf* = l1, psi = q*.
            return {Exponent(1.0), spec.p1.dual()};
        case Kind::ProjectedF2:
            throw std::invalid_argument(
                "separable_factors: projected-F2 is a seminorm on losses, not a "
                "perturbation norm");
    }
    throw std::logic_error("separable_factors: unreachable");
}

}  // namespace robustreg
