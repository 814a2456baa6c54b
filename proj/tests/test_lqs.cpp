#include <catch2/catch.hpp>

#include <cmath>

#include "robustreg/lqs.hpp"
#include "robustreg/regression.hpp"

#include "oracle_utils.hpp"

using namespace robustreg;

TEST_CASE("order statistic") {
    REQUIRE(order_statistic({3.0, -1.0, 2.0}, 2) == Approx(2.0));
    REQUIRE(order_statistic({3.0, -1.0, 2.0}, 3) == Approx(3.0));
    REQUIRE(order_statistic({0.0, 0.0, 5.0}, 2) == Approx(0.0));
    REQUIRE_THROWS_AS(order_statistic({1.0, 2.0}, 3), std::invalid_argument);
    REQUIRE_THROWS_AS(order_statistic({1.0, 2.0}, 0), std::invalid_argument);
}

TEST_CASE("waterfill") {
    REQUIRE(waterfill({1.0, 2.0, 3.0}, 2, 1.0) == Approx(3.0).margin(1e-10));
    REQUIRE(waterfill({4.0, 1.0, 7.0}, 2, 0.0) == Approx(4.0));
    REQUIRE(waterfill({0.0, 0.0}, 1, 4.0) == Approx(2.0).margin(1e-10));
    SECTION("back-substitution residual stays below 1e-9") {
        Rng rng(314);
        for (int t = 0; t < 200; ++t) {
            std::size_t m = 1 + rng.uniform_int(0, 7);
            int q = 1 + rng.uniform_int(0, static_cast<int>(m) - 1);
            Vec r = rng.normal_vec(m);
            double budget = std::abs(rng.normal());
            double nu = waterfill(r, q, budget);
            Vec s(m);
            for (std::size_t i = 0; i < m; ++i) s[i] = std::abs(r[i]);
            std::sort(s.begin(), s.end());
            double acc = 0.0;
            for (std::size_t i = q - 1; i < m; ++i) acc += std::max(nu - s[i], 0.0);
            REQUIRE(std::abs(acc - budget) <= 1e-9);
        }
    }
}

TEST_CASE("robust inner problem") {
    REQUIRE(robust_lqs_inner({1.0, -2.0, 3.0}, 2, PhiNorm::L1, 0.5) == Approx(2.5));
    REQUIRE(robust_lqs_inner({1.0, -2.0, 3.0}, 2, PhiNorm::Linf, 0.0) == Approx(2.0));
    REQUIRE(robust_lqs_inner({1.0, 2.0, 3.0}, 2, PhiNorm::Linf, 1.0) == Approx(3.0).margin(1e-10));
    SECTION("monotone concave in the budget for phi = linf, affine for phi = l1") {
        Rng rng(2718);
        Vec r = rng.normal_vec(6);
        const int q = 3;
        double prev = robust_lqs_inner(r, q, PhiNorm::Linf, 0.0);
        REQUIRE(prev == Approx(order_statistic(r, q)));
        Vec budgets{0.0, 0.3, 0.6, 0.9, 1.2, 1.5, 1.8};
        Vec vals;
        for (double b : budgets) vals.push_back(robust_lqs_inner(r, q, PhiNorm::Linf, b));
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) REQUIRE(vals[i + 1] >= vals[i] - 1e-12);
        for (std::size_t i = 1; i + 1 < vals.size(); ++i)
            REQUIRE(vals[i] >= 0.5 * (vals[i - 1] + vals[i + 1]) - 1e-9);
        for (double b : budgets)
            REQUIRE(robust_lqs_inner(r, q, PhiNorm::L1, b) ==
                    Approx(order_statistic(r, q) + b).margin(1e-12));
    }
}

TEST_CASE("lqs_oracle examples") {
    SECTION("two of three points fit exactly") {
        LqsProblem prob(Matrix(3, 1, {1.0, 1.0, 1.0}), {0.0, 0.0, 10.0}, 2);
        auto sol = lqs_oracle(prob);
        REQUIRE(sol.value == Approx(0.0).margin(1e-9));
    }
    SECTION("q = m is Chebyshev regression") {
        Rng rng(11);
        Matrix x = rng.normal_matrix(5, 2);
        Vec y = rng.normal_vec(5);
        LqsProblem prob(x, y, 5);
        auto sol = lqs_oracle(prob);
        // Direct route: the l_inf regression LP.
        RegressionProblem reg(x, y, Exponent::infinity());
        auto cheb = solve_regularized(reg, 0.0, Exponent(1.0));
        REQUIRE(sol.value == Approx(cheb.objective).margin(1e-7));
    }
    SECTION("one residual can always be zeroed") {
        Rng rng(13);
        Matrix x = rng.normal_matrix(3, 3);
        Vec y = rng.normal_vec(3);
        LqsProblem prob(x, y, 1);
        auto sol = lqs_oracle(prob);
        REQUIRE(sol.value == Approx(0.0).margin(1e-7));
    }
    SECTION("scale cap") {
        Rng rng(17);
        Matrix x = rng.normal_matrix(30, 1);
        Vec y = rng.normal_vec(30);
        REQUIRE_THROWS_AS(lqs_oracle(LqsProblem(x, y, 15)), std::invalid_argument);
    }
}

TEST_CASE("nominal MIO matches the enumeration oracle") {
    SECTION("toy instance") {
        LqsProblem prob(Matrix(3, 1, {1.0, 1.0, 1.0}), {0.0, 0.0, 10.0}, 2);
        auto mio = lqs_mio(prob);
        REQUIRE(mio.gap_proved);
        REQUIRE(mio.value == Approx(0.0).margin(1e-7));
    }
    SECTION("random instances, all orders") {
        Rng rng(909);
        for (int t = 0; t < 16; ++t) {
            std::size_t m = 3 + rng.uniform_int(0, 5);
            std::size_t n = 1 + rng.uniform_int(0, 1);
            int q = 1 + t % static_cast<int>(m);
            Matrix x = rng.normal_matrix(m, n);
            Vec y = rng.normal_vec(m);
            LqsProblem prob(x, y, q);
            auto oracle = lqs_oracle(prob);
            MioOptions opts;
            opts.oracle_incumbent = false;  // make the tree do the work
            auto mio = lqs_mio(prob, opts);
            REQUIRE(mio.gap_proved);
            REQUIRE(mio.value == Approx(oracle.value).margin(1e-6));
        }
    }
}

TEST_CASE("robust MIO, phi = l1") {
    SECTION("penalty vanishes at beta = 0") {
        LqsProblem prob(Matrix(3, 1, {1.0, 1.0, 1.0}), {0.0, 0.0, 10.0}, 2,
                        RobustLqsSpec{PhiNorm::L1, PsiNorm::L1, 0.1});
        auto mio = lqs_mio(prob);
        REQUIRE(mio.gap_proved);
        REQUIRE(mio.value == Approx(0.0).margin(1e-7));
        REQUIRE(vec_norm(mio.beta, Exponent(1.0)) <= 1e-7);
    }
    SECTION("matches the grid oracle") {
        Rng rng(515);
        for (int t = 0; t < 4; ++t) {
            std::size_t m = 4 + rng.uniform_int(0, 2);
            Matrix x = rng.normal_matrix(m, 1);
            Vec y = rng.normal_vec(m);
            int q = 2 + t % 2;
            for (PsiNorm psi : {PsiNorm::L1, PsiNorm::Linf}) {
                LqsProblem prob(x, y, q, RobustLqsSpec{PhiNorm::L1, psi, 0.15});
                auto mio = lqs_mio(prob);
                auto grid = rrtest::robust_lqs_grid_oracle(prob);
                REQUIRE(mio.gap_proved);
                REQUIRE(mio.value == Approx(grid.value).margin(1e-4));
            }
        }
    }
}

TEST_CASE("robust MIO, phi = linf (waterfilling)") {
    SECTION("matches the grid oracle") {
        Rng rng(626);
        for (int t = 0; t < 4; ++t) {
            std::size_t m = 4 + rng.uniform_int(0, 3);
            std::size_t n = 1 + (t % 2);
            Matrix x = rng.normal_matrix(m, n);
            Vec y = rng.normal_vec(m);
            int q = 2 + t % 2;
            LqsProblem prob(x, y, q, RobustLqsSpec{PhiNorm::Linf, PsiNorm::L1, 0.1});
            auto mio = lqs_mio(prob);
            auto grid = rrtest::robust_lqs_grid_oracle(prob);
            REQUIRE(mio.gap_proved);
            REQUIRE(mio.value == Approx(grid.value).margin(1e-4));
        }
    }
    SECTION("beta = 0 boundary keeps the nominal floor") {
        // The worst case at beta = 0 is the plain order statistic, not zero.
        LqsProblem prob(Matrix(3, 1, {1.0, 1.0, 1.0}), {1.0, 2.0, 3.0}, 3,
                        RobustLqsSpec{PhiNorm::Linf, PsiNorm::L1, 1e-6});
        auto mio = lqs_mio(prob);
        auto grid = rrtest::robust_lqs_grid_oracle(prob);
        REQUIRE(mio.value == Approx(grid.value).margin(1e-4));
        REQUIRE(mio.value > 0.5);
    }
}

TEST_CASE("robust MIO with the l2 cone is approximate but sound") {
    Rng rng(727);
    Matrix x = rng.normal_matrix(5, 2);
    Vec y = rng.normal_vec(5);
    LqsProblem prob(x, y, 3, RobustLqsSpec{PhiNorm::L1, PsiNorm::L2, 0.2});
    REQUIRE(prob.conic());
    auto mio = lqs_mio(prob);
    REQUIRE(mio.cone_tolerance == Approx(1.0 / std::cos(3.14159265358979323846 / 16)));
    auto grid = rrtest::robust_lqs_grid_oracle(prob);
    // The reported value is the true objective of the returned beta, so it
    // cannot beat the certified outer-approximation lower bound, and it must
    // not lose to the easy-to-find grid optimum.
    REQUIRE(mio.value <= grid.value + 1e-6);
    REQUIRE(mio.value - mio.proved_gap <= grid.value + 1e-9);
}

TEST_CASE("node limit returns the incumbent with an unproved gap") {
    Rng rng(840);
    Matrix x = rng.normal_matrix(7, 2);
    Vec y = rng.normal_vec(7);
    LqsProblem prob(x, y, 4);
    MioOptions opts;
    opts.node_limit = 2;
    opts.oracle_incumbent = false;
    auto res = lqs_mio(prob, opts);
    REQUIRE_FALSE(res.gap_proved);
    // The incumbent is still a true feasible objective value.
    REQUIRE(res.value == Approx(lqs_objective(prob, res.beta)).margin(1e-12));
    REQUIRE(res.value >= lqs_oracle(prob).value - 1e-9);
}

TEST_CASE("robust optimum dominates nominal optimum") {
    Rng rng(838);
    for (int t = 0; t < 6; ++t) {
        Matrix x = rng.normal_matrix(5, 1);
        Vec y = rng.normal_vec(5);
        int q = 2 + t % 3;
        LqsProblem nominal(x, y, q);
        auto nom = lqs_mio(nominal);
        LqsProblem rob(x, y, q, RobustLqsSpec{PhiNorm::L1, PsiNorm::L1, 0.3});
        auto robv = lqs_mio(rob);
        REQUIRE(robv.value >= nom.value - 1e-9);
        if (vec_norm(robv.beta, Exponent(1.0)) > 1e-9)
            REQUIRE(robv.value > nom.value - 1e-9);
    }
}

TEST_CASE("sampled adversary never beats the reported robust objective") {
    Rng rng(949);
    Matrix x = rng.normal_matrix(5, 2);
    Vec y = rng.normal_vec(5);
    // phi = linf, psi = l1 corresponds to the induced (1, inf) ball; phi = l1,
    // psi = l1 to the induced (1, 1) ball.
    struct Case {
        PhiNorm phi;
        MatrixNormSpec shape;
    } cases[] = {{PhiNorm::Linf, MatrixNormSpec::induced(Exponent(1.0), Exponent::infinity())},
                 {PhiNorm::L1, MatrixNormSpec::induced(Exponent(1.0), Exponent(1.0))}};
    for (const auto& c : cases) {
        LqsProblem prob(x, y, 3, RobustLqsSpec{c.phi, PsiNorm::L1, 0.2});
        auto mio = lqs_mio(prob);
        for (int s = 0; s < 500; ++s) {
            Matrix d = rng.normal_matrix(5, 2);
            double norm = mat_norm(d, c.shape).value;
            if (norm == 0.0) continue;
            d = (0.2 * rng.uniform(0.0, 1.0) / norm) * d;
            Vec r = y - (x + d).apply(mio.beta);
            REQUIRE(order_statistic(r, 3) <= mio.value + 1e-8);
        }
    }
}
