#include <catch2/catch.hpp>

#include "robustreg/lp.hpp"
#include "robustreg/matrix.hpp"
#include "robustreg/norms.hpp"
#include "robustreg/rng.hpp"
#include "robustreg/rootfind.hpp"
#include "robustreg/svd.hpp"

#include "oracle_utils.hpp"

using namespace robustreg;

namespace {

Matrix random_matrix(Rng& rng, std::size_t m, std::size_t n) { return rng.normal_matrix(m, n); }

void check_orthonormal_columns(const Matrix& u, double tol) {
    for (std::size_t a = 0; a < u.cols(); ++a)
        for (std::size_t b = a; b < u.cols(); ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < u.rows(); ++i) s += u(i, a) * u(i, b);
            REQUIRE(s == Approx(a == b ? 1.0 : 0.0).margin(tol));
        }
}

}  // namespace

TEST_CASE("svd on simple matrices") {
    SECTION("diagonal") {
        Matrix a(2, 2, {3.0, 0.0, 0.0, 1.0});
        auto r = svd(a);
        REQUIRE(r.converged);
        REQUIRE(r.sigma[0] == Approx(3.0));
        REQUIRE(r.sigma[1] == Approx(1.0));
    }
    SECTION("zero matrix") {
        Matrix a(2, 2);
        auto r = svd(a);
        REQUIRE(r.converged);
        REQUIRE(r.sigma[0] == 0.0);
        REQUIRE(r.sigma[1] == 0.0);
        check_orthonormal_columns(r.u, 1e-12);
        check_orthonormal_columns(r.v, 1e-12);
    }
    SECTION("random 4x3 round-trip") {
        Rng rng(7);
        Matrix a = random_matrix(rng, 4, 3);
        auto r = svd(a);
        REQUIRE(r.converged);
        Matrix back = svd_reconstruct(r);
        REQUIRE((back - a).frobenius() <= 1e-9);
    }
}

TEST_CASE("svd round-trip and orthonormality on random shapes") {
    Rng rng(11);
    for (int t = 0; t < 100; ++t) {
        std::size_t m = 1 + rng.uniform_int(0, 7);
        std::size_t n = 1 + rng.uniform_int(0, 7);
        Matrix a = random_matrix(rng, m, n);
        auto r = svd(a);
        REQUIRE(r.converged);
        for (std::size_t i = 0; i + 1 < r.sigma.size(); ++i) REQUIRE(r.sigma[i] >= r.sigma[i + 1]);
        for (double s : r.sigma) REQUIRE(s >= 0.0);
        REQUIRE((svd_reconstruct(r) - a).frobenius() <= 1e-9 * (1.0 + a.frobenius()));
        check_orthonormal_columns(r.u, 1e-10);
        check_orthonormal_columns(r.v, 1e-10);
    }
}

TEST_CASE("svd reports non-convergence under an exhausted sweep cap") {
    Rng rng(19);
    Matrix a = random_matrix(rng, 4, 4);
    auto r = svd(a, 1e-12, 0);
    REQUIRE_FALSE(r.converged);
}

TEST_CASE("schatten-2 equals frobenius-2") {
    Rng rng(5);
    for (int t = 0; t < 100; ++t) {
        Matrix a = random_matrix(rng, 1 + rng.uniform_int(0, 5), 1 + rng.uniform_int(0, 5));
        double s2 = mat_norm(a, MatrixNormSpec::schatten(Exponent(2.0))).value;
        double f2 = mat_norm(a, MatrixNormSpec::frobenius(Exponent(2.0))).value;
        REQUIRE(s2 == Approx(f2).margin(1e-9));
    }
}

TEST_CASE("lp basic examples") {
    SECTION("min x subject to x >= 1") {
        LpProblem p;
        p.objective = {1.0};
        p.constraints = Matrix(1, 1, {1.0});
        p.senses = {Sense::GE};
        p.rhs = {1.0};
        p.lower = {-std::numeric_limits<double>::infinity()};
        p.upper = {std::numeric_limits<double>::infinity()};
        auto s = solve_lp(p);
        REQUIRE(s.status == LpStatus::Optimal);
        REQUIRE(s.value == Approx(1.0).margin(1e-9));
        REQUIRE(s.x[0] == Approx(1.0).margin(1e-9));
    }
    SECTION("min -x with x >= 0 unbounded") {
        LpProblem p;
        p.objective = {-1.0};
        p.constraints = Matrix(0, 1);
        p.senses = {};
        p.rhs = {};
        p.lower = {0.0};
        p.upper = {std::numeric_limits<double>::infinity()};
        auto s = solve_lp(p);
        REQUIRE(s.status == LpStatus::Unbounded);
    }
    SECTION("infeasible box") {
        LpProblem p;
        p.objective = {1.0};
        p.constraints = Matrix(1, 1, {1.0});
        p.senses = {Sense::GE};
        p.rhs = {2.0};
        p.lower = {0.0};
        p.upper = {1.0};
        auto s = solve_lp(p);
        REQUIRE(s.status == LpStatus::Infeasible);
    }
}

namespace {

LpProblem random_boxed_lp(Rng& rng, std::size_t n, std::size_t k) {
    LpProblem p;
    p.objective.resize(n);
    for (double& c : p.objective) c = rng.normal();
    p.constraints = Matrix(k, n);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < n; ++j) p.constraints(i, j) = rng.normal();
    p.lower.assign(n, 0.0);
    p.upper.resize(n);
    for (double& u : p.upper) u = rng.uniform(0.5, 2.0);
    // Feasibility by construction around an interior point.
    Vec x0(n);
    for (std::size_t j = 0; j < n; ++j) x0[j] = 0.5 * p.upper[j];
    p.rhs.resize(k);
    p.senses.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        double ax = 0.0;
        for (std::size_t j = 0; j < n; ++j) ax += p.constraints(i, j) * x0[j];
        int kind = rng.uniform_int(0, 2);
        if (kind == 0) {
            p.senses[i] = Sense::LE;
            p.rhs[i] = ax + std::abs(rng.normal());
        } else if (kind == 1) {
            p.senses[i] = Sense::GE;
            p.rhs[i] = ax - std::abs(rng.normal());
        } else {
            p.senses[i] = Sense::EQ;
            p.rhs[i] = ax;
        }
    }
    return p;
}

}  // namespace

TEST_CASE("lp optimum matches vertex enumeration") {
    SECTION("5 vars, 8 constraints") {
        Rng r2(101);
        LpProblem p = random_boxed_lp(r2, 5, 8);
        auto s = solve_lp(p);
        REQUIRE(s.status == LpStatus::Optimal);
        auto brute = rrtest::lp_enumerate_optimum(p);
        REQUIRE(brute.has_value());
        REQUIRE(s.value == Approx(*brute).margin(1e-7));
    }
    SECTION("random small instances") {
        for (int t = 0; t < 25; ++t) {
            Rng r2(300 + t);
            std::size_t n = 2 + r2.uniform_int(0, 4);  // up to 6 vars
            std::size_t k = 2 + r2.uniform_int(0, 4);
            LpProblem p = random_boxed_lp(r2, n, k);
            auto s = solve_lp(p);
            REQUIRE(s.status == LpStatus::Optimal);
            auto brute = rrtest::lp_enumerate_optimum(p);
            REQUIRE(brute.has_value());
            REQUIRE(s.value == Approx(*brute).margin(1e-7));
            // Returned point satisfies all constraints.
            for (std::size_t i = 0; i < k; ++i) {
                double ax = 0.0;
                for (std::size_t j = 0; j < n; ++j) ax += p.constraints(i, j) * s.x[j];
                if (p.senses[i] == Sense::LE) REQUIRE(ax <= p.rhs[i] + 1e-8);
                if (p.senses[i] == Sense::GE) REQUIRE(ax >= p.rhs[i] - 1e-8);
                if (p.senses[i] == Sense::EQ) REQUIRE(ax == Approx(p.rhs[i]).margin(1e-8));
            }
        }
    }
}

TEST_CASE("lp reports the iteration limit as an explicit status") {
    Rng rng(29);
    LpProblem p = random_boxed_lp(rng, 5, 6);
    auto s = solve_lp(p, 1e-9, 1);
    REQUIRE(s.status == LpStatus::IterationLimit);
}

TEST_CASE("bisect") {
    SECTION("linear root") {
        double r = bisect([](double x) { return x - 2.0; }, 0.0, 4.0, 1e-12);
        REQUIRE(r == Approx(2.0).margin(1e-10));
    }
    SECTION("cubic root") {
        double r = bisect([](double x) { return x * x * x - 8.0; }, 0.0, 4.0, 1e-10);
        REQUIRE(r == Approx(2.0).margin(1e-9));
    }
    SECTION("piecewise-linear waterfill equation") {
        auto f = [](double nu) {
            return std::max(nu - 2.0, 0.0) + std::max(nu - 3.0, 0.0) - 1.0;
        };
        double r = bisect(f, 2.0, 4.0, 1e-12);
        REQUIRE(r == Approx(3.0).margin(1e-10));
    }
    SECTION("invalid bracket") {
        REQUIRE_THROWS_AS(bisect([](double x) { return x + 1.0; }, 0.0, 1.0, 1e-10),
                          std::invalid_argument);
    }
}
