// Test-only oracles, independent of the library implementation paths they
// validate: LP vertex enumeration, dense-sampling maximizers, and grid
// minimizers. Desk-scale only.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "robustreg/lp.hpp"
#include "robustreg/lqs.hpp"
#include "robustreg/matrix.hpp"
#include "robustreg/rng.hpp"

namespace rrtest {

using robustreg::LpProblem;
using robustreg::Matrix;
using robustreg::Sense;
using robustreg::Vec;

// Solve a dense linear system by Gaussian elimination; empty on singular.
inline std::optional<Vec> gauss_solve(std::vector<Vec> a, Vec b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-11) return std::nullopt;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col) continue;
            double f = a[r][col] / a[col][col];
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
    return b;
}

// Brute-force optimum of an LP by enumerating every basic solution of the
// slack-extended equality form, with nonbasic variables at each finite bound.
// Returns nullopt if no basic feasible point exists.
inline std::optional<double> lp_enumerate_optimum(const LpProblem& p, double feas_tol = 1e-7) {
    const std::size_t n = p.num_vars(), k = p.num_rows();
    const std::size_t total = n + k;

    auto col_entry = [&](std::size_t var, std::size_t row) -> double {
        if (var < n) return p.constraints(row, var);
        return var - n == row ? 1.0 : 0.0;
    };
    Vec lo(total), up(total);
    const double inf = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
        lo[j] = p.lower[j];
        up[j] = p.upper[j];
    }
    for (std::size_t i = 0; i < k; ++i) {
        switch (p.senses[i]) {
            case Sense::LE: lo[n + i] = 0.0; up[n + i] = inf; break;
            case Sense::GE: lo[n + i] = -inf; up[n + i] = 0.0; break;
            case Sense::EQ: lo[n + i] = 0.0; up[n + i] = 0.0; break;
        }
    }

    double best = inf;
    std::vector<std::size_t> subset(k);
    std::vector<bool> choose(total, false);
    std::fill(choose.begin(), choose.begin() + k, true);
    std::sort(choose.begin(), choose.end());  // lexicographic combinations via permutations

    do {
        std::size_t idx = 0;
        for (std::size_t j = 0; j < total; ++j)
            if (choose[j]) subset[idx++] = j;

        std::vector<std::size_t> nonbasic;
        for (std::size_t j = 0; j < total; ++j)
            if (!choose[j]) nonbasic.push_back(j);

        // Every nonbasic must rest at a finite bound.
        std::vector<std::vector<double>> options(nonbasic.size());
        bool representable = true;
        for (std::size_t t = 0; t < nonbasic.size(); ++t) {
            std::size_t j = nonbasic[t];
            if (std::isfinite(lo[j])) options[t].push_back(lo[j]);
            if (std::isfinite(up[j]) && up[j] != lo[j]) options[t].push_back(up[j]);
            if (options[t].empty()) {
                representable = false;
                break;
            }
        }
        if (!representable) continue;

        std::vector<std::size_t> pick(nonbasic.size(), 0);
        while (true) {
            Vec rhs = p.rhs;
            for (std::size_t t = 0; t < nonbasic.size(); ++t) {
                double v = options[t][pick[t]];
                if (v != 0.0)
                    for (std::size_t r = 0; r < k; ++r) rhs[r] -= col_entry(nonbasic[t], r) * v;
            }
            std::vector<Vec> bmat(k, Vec(k));
            for (std::size_t c = 0; c < k; ++c)
                for (std::size_t r = 0; r < k; ++r) bmat[r][c] = col_entry(subset[c], r);
            if (auto xb = gauss_solve(bmat, rhs)) {
                bool feasible = true;
                for (std::size_t c = 0; c < k && feasible; ++c) {
                    std::size_t j = subset[c];
                    if ((*xb)[c] < lo[j] - feas_tol || (*xb)[c] > up[j] + feas_tol)
                        feasible = false;
                }
                if (feasible) {
                    double obj = 0.0;
                    for (std::size_t c = 0; c < k; ++c)
                        if (subset[c] < n) obj += p.objective[subset[c]] * (*xb)[c];
                    for (std::size_t t = 0; t < nonbasic.size(); ++t)
                        if (nonbasic[t] < n)
                            obj += p.objective[nonbasic[t]] * options[t][pick[t]];
                    best = std::min(best, obj);
                }
            }
            // next bound pattern
            std::size_t t = 0;
            for (; t < pick.size(); ++t) {
                if (++pick[t] < options[t].size()) break;
                pick[t] = 0;
            }
            if (t == pick.size()) break;
        }
    } while (std::next_permutation(choose.begin(), choose.end()));

    if (!std::isfinite(best)) return std::nullopt;
    return best;
}

// Plain Nelder-Mead for 1- or 2-dimensional refinement.
inline Vec nelder_mead(const std::function<double(const Vec&)>& f, Vec start, double scale,
                       int iters = 800) {
    const std::size_t n = start.size();
    std::vector<Vec> pts(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) pts[i + 1][i] += scale;
    std::vector<double> val(n + 1);
    for (std::size_t i = 0; i <= n; ++i) val[i] = f(pts[i]);
    for (int it = 0; it < iters; ++it) {
        std::size_t hi = 0, lo = 0;
        for (std::size_t i = 1; i <= n; ++i) {
            if (val[i] > val[hi]) hi = i;
            if (val[i] < val[lo]) lo = i;
        }
        Vec centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == hi) continue;
            for (std::size_t j = 0; j < n; ++j) centroid[j] += pts[i][j] / n;
        }
        Vec refl(n);
        for (std::size_t j = 0; j < n; ++j) refl[j] = 2.0 * centroid[j] - pts[hi][j];
        double fr = f(refl);
        if (fr < val[lo]) {
            Vec exp_(n);
            for (std::size_t j = 0; j < n; ++j) exp_[j] = 3.0 * centroid[j] - 2.0 * pts[hi][j];
            double fe = f(exp_);
            if (fe < fr) {
                pts[hi] = exp_;
                val[hi] = fe;
            } else {
                pts[hi] = refl;
                val[hi] = fr;
            }
        } else if (fr < val[hi]) {
            pts[hi] = refl;
            val[hi] = fr;
        } else {
            Vec con(n);
            for (std::size_t j = 0; j < n; ++j) con[j] = 0.5 * (centroid[j] + pts[hi][j]);
            double fc = f(con);
            if (fc < val[hi]) {
                pts[hi] = con;
                val[hi] = fc;
            } else {
                for (std::size_t i = 0; i <= n; ++i) {
                    if (i == lo) continue;
                    for (std::size_t j = 0; j < n; ++j)
                        pts[i][j] = 0.5 * (pts[i][j] + pts[lo][j]);
                    val[i] = f(pts[i]);
                }
            }
        }
    }
    std::size_t lo = 0;
    for (std::size_t i = 1; i <= n; ++i)
        if (val[i] < val[lo]) lo = i;
    return pts[lo];
}

// Validation-only oracle for robust LQS at n <= 2: a 201-point-per-axis grid
// spanning twice the nominal solution's box, refined by Nelder-Mead.
inline robustreg::LqsSolution robust_lqs_grid_oracle(const robustreg::LqsProblem& prob) {
    using namespace robustreg;
    const std::size_t n = prob.x.cols();
    if (n > 2) throw std::invalid_argument("robust_lqs_grid_oracle: n <= 2 only");
    LqsProblem nominal(prob.x, prob.y, prob.q);
    LqsSolution nom = lqs_oracle(nominal);
    double b = 2.0 * std::max(1.0, vec_norm(nom.beta, Exponent::infinity()));
    auto f = [&](const Vec& beta) { return lqs_objective(prob, beta); };

    Vec best(n, 0.0);
    double best_val = f(best);
    auto consider = [&](const Vec& beta) {
        double v = f(beta);
        if (v < best_val) {
            best_val = v;
            best = beta;
        }
    };
    consider(nom.beta);
    const int pts = 201;
    if (n == 1) {
        for (int i = 0; i < pts; ++i) consider({-b + 2.0 * b * i / (pts - 1)});
    } else {
        for (int i = 0; i < pts; ++i)
            for (int j = 0; j < pts; ++j)
                consider({-b + 2.0 * b * i / (pts - 1), -b + 2.0 * b * j / (pts - 1)});
    }
    for (double scale : {2.0 * b / (pts - 1), 1e-2, 1e-4}) {
        Vec refined = nelder_mead(f, best, scale);
        consider(refined);
    }
    return {best, best_val};
}

}  // namespace rrtest
