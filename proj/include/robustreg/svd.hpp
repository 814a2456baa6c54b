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
#include <numeric>

#include "robustreg/matrix.hpp"

namespace robustreg {

/// Thin SVD A = U diag(sigma) Vᵀ with U (m x k), V (n x k), k = min(m, n).
/// Columns of U and V are orthonormal, sigma is nonincreasing and >= 0.
struct SvdResult {
    Matrix u;
    Vec sigma;
    Matrix v;
    bool converged = false;
    int sweeps = 0;
};

namespace detail {

// Orthonormal completion of the columns [0, filled) of u against the standard
// basis; fills columns [filled, k).
inline void complete_basis(Matrix& u, std::size_t filled, std::size_t k) {
    std::size_t m = u.rows();
    for (std::size_t c = filled; c < k; ++c) {
        Vec best;
        double best_norm = -1.0;
        for (std::size_t t = 0; t < m; ++t) {
            Vec cand(m, 0.0);
            cand[t] = 1.0;
            for (std::size_t j = 0; j < c; ++j) {
                double proj = 0.0;
                for (std::size_t i = 0; i < m; ++i) proj += u(i, j) * cand[i];
                for (std::size_t i = 0; i < m; ++i) cand[i] -= proj * u(i, j);
            }
            double nrm = std::sqrt(dot(cand, cand));
            if (nrm > best_norm) {
                best_norm = nrm;
                best = cand;
            }
            if (nrm > 0.7) break;
        }
        for (std::size_t i = 0; i < m; ++i) u(i, c) = best[i] / best_norm;
    }
}

inline SvdResult svd_tall(const Matrix& a, double tol, int max_sweeps) {
    const std::size_t m = a.rows(), n = a.cols();
    Matrix w = a;
    Matrix v = Matrix::identity(n);
    // Columns whose norm has collapsed to roundoff level carry no directional
    // information; rotating them forever would defeat the sweep criterion.
    double fro = a.frobenius();
    double dead_col = fro * fro * 1e-28;

    SvdResult out;
    out.converged = false;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t i = 0; i < m; ++i) {
                    double wp = w(i, p), wq = w(i, q);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if (alpha <= dead_col || beta <= dead_col) continue;
                if (std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                double zeta = (beta - alpha) / (2.0 * gamma);
                double t = sign_or_one(zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = c * t;
                for (std::size_t i = 0; i < m; ++i) {
                    double wp = w(i, p), wq = w(i, q);
                    w(i, p) = c * wp - s * wq;
                    w(i, q) = s * wp + c * wq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    double vp = v(i, p), vq = v(i, q);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = s * vp + c * vq;
                }
            }
        }
        if (!rotated) {
            out.converged = true;
            break;
        }
    }
    out.sweeps = sweep;

    Vec sigma(n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) s += w(i, j) * w(i, j);
        sigma[j] = std::sqrt(s);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return sigma[i] > sigma[j]; });

    Matrix u(m, n);
    Matrix vperm(n, n);
    Vec sig(n);
    double smax = sigma.empty() ? 0.0 : sigma[order[0]];
    double cutoff = smax * 1e-14 * static_cast<double>(std::max(m, n));
    std::size_t filled = 0;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t src = order[j];
        sig[j] = sigma[src];
        for (std::size_t i = 0; i < n; ++i) vperm(i, j) = v(i, src);
        if (sigma[src] > cutoff && sigma[src] > 0.0) {
            for (std::size_t i = 0; i < m; ++i) u(i, j) = w(i, src) / sigma[src];
            filled = j + 1;
        }
    }
    for (std::size_t j = filled; j < n; ++j) sig[j] = sig[j] < 0.0 ? 0.0 : sig[j];
    complete_basis(u, filled, n);

    out.u = std::move(u);
    out.sigma = std::move(sig);
    out.v = std::move(vperm);
    return out;
}

}  // namespace detail

/**
 * One-sided Jacobi SVD. Columns of a working copy are orthogonalized by plane
 * rotations until every pairwise inner product is below tol relative to the
 * column norms; singular values are the resulting column norms.
 *
 * Accurate and simple at the dense desk scales this library targets (<= 64x64).
 * A result with converged == false is returned if the sweep cap is exhausted.
 */
inline SvdResult svd(const Matrix& a, double tol = 1e-12, int max_sweeps = 100) {
    if (a.rows() == 0 || a.cols() == 0) throw std::invalid_argument("svd: empty matrix");
    if (a.rows() >= a.cols()) return detail::svd_tall(a, tol, max_sweeps);
    SvdResult t = detail::svd_tall(a.transpose(), tol, max_sweeps);
    std::swap(t.u, t.v);
    return t;
}

inline Vec singular_values(const Matrix& a) {
    SvdResult r = svd(a);
    if (!r.converged) throw std::runtime_error("svd: no convergence within sweep cap");
    return r.sigma;
}

/// U diag(s) Vᵀ for a thin factorization.
inline Matrix svd_reconstruct(const SvdResult& r) {
    std::size_t m = r.u.rows(), n = r.v.rows(), k = r.sigma.size();
    Matrix a(m, n);
    for (std::size_t t = 0; t < k; ++t) {
        if (r.sigma[t] == 0.0) continue;
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) a(i, j) += r.sigma[t] * r.u(i, t) * r.v(j, t);
    }
    return a;
}

}  // namespace robustreg
