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
#include <stdexcept>

#include "robustreg/exponent.hpp"
#include "robustreg/matrix.hpp"
#include "robustreg/norms.hpp"
#include "robustreg/rng.hpp"

namespace robustreg {

/// delta_m(a,b) = max { ||u||_a : u in R^m, ||u||_b = 1 } together with a
/// maximizing unit vector. Always in [1, m].
struct DiscrepancyResult {
    double value = 1.0;
    Vec witness;
    bool exact = true;
};

/**
 * Closed form of the discrepancy function: 1 when a >= b (attained at a
 * standard basis vector), m^(1/a - 1/b) when a < b (attained at the uniform
 * vector m^(-1/b) * (1,...,1)), with 1/inf = 0 handled symbolically.
 */
inline DiscrepancyResult delta(std::size_t m, const Exponent& a, const Exponent& b) {
    if (m < 1) throw std::invalid_argument("delta: m must be >= 1");
    DiscrepancyResult r;
    if (a >= b || m == 1) {
        r.value = 1.0;
        r.witness.assign(m, 0.0);
        r.witness[0] = 1.0;
        return r;
    }
    double md = static_cast<double>(m);
    r.value = std::pow(md, a.reciprocal() - b.reciprocal());
    r.witness.assign(m, std::pow(md, -b.reciprocal()));
    return r;
}

inline double delta_value(std::size_t m, const Exponent& a, const Exponent& b) {
    return delta(m, a, b).value;
}

/**
 * Independent numeric oracle for delta_m(a,b): random sampling of the b-unit
 * sphere plus multi-start successive-linearization ascent. Used to validate
 * the closed form; not a production path.
 */
inline double delta_oracle(std::size_t m, const Exponent& a, const Exponent& b,
                           std::uint64_t seed = 2024, int dense_samples = 4096,
                           int ascent_starts = 64, int ascent_iters = 400) {
    if (m < 1) throw std::invalid_argument("delta_oracle: m must be >= 1");
    if (m > 8) throw std::invalid_argument("delta_oracle: desk scale is m <= 8");
    Rng rng(seed);
    double best = 0.0;
    Vec best_u(m, 0.0);

    auto consider = [&](Vec u) {
        double nb = vec_norm(u, b);
        if (nb == 0.0) return;
        for (double& x : u) x /= nb;
        double va = vec_norm(u, a);
        if (va > best) {
            best = va;
            best_u = u;
        }
    };

    consider(Vec(m, 1.0));
    Vec e1(m, 0.0);
    e1[0] = 1.0;
    consider(e1);
    for (int s = 0; s < dense_samples; ++s) consider(rng.normal_vec(m));

    for (int s = 0; s < ascent_starts; ++s) {
        Vec u = s == 0 ? best_u : rng.normal_vec(m);
        double nb = vec_norm(u, b);
        if (nb == 0.0) continue;
        for (double& x : u) x /= nb;
        double val = vec_norm(u, a);
        for (int it = 0; it < ascent_iters; ++it) {
            // Subgradient of ||u||_a, then the Hölder step onto the b-sphere.
            Vec g(m, 0.0);
            if (a.is_inf()) {
                std::size_t bi = 0;
                for (std::size_t i = 1; i < m; ++i)
                    if (std::abs(u[i]) > std::abs(u[bi])) bi = i;
                g[bi] = sign_or_one(u[bi]);
            } else {
                double av = a.value(), na = vec_norm(u, a);
                if (na == 0.0) break;
                for (std::size_t i = 0; i < m; ++i) {
                    double r = std::abs(u[i]) / na;
                    g[i] = r > 0.0 ? sign_or_one(u[i]) * std::pow(r, av - 1.0) : 0.0;
                }
            }
            if (is_zero(g)) break;
            Vec un = dual_witness(g, b);
            double vn = vec_norm(un, a);
            if (vn <= val * (1.0 + 1e-15)) break;
            u = un;
            val = vn;
        }
        if (val > best) {
            best = val;
            best_u = u;
        }
    }
    return best;
}

/// Duality identity delta_m(p*, q*) = delta_m(q, p), which must always hold.
inline bool delta_duality_check(std::size_t m, const Exponent& p, const Exponent& q,
                                double tol = 1e-9) {
    double lhs = delta_value(m, p.dual(), q.dual());
    double rhs = delta_value(m, q, p);
    return std::abs(lhs - rhs) <= tol * std::max(1.0, std::abs(rhs));
}

}  // namespace robustreg
