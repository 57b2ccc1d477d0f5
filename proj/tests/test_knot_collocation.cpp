#include "doctest.h"
#include "oracles.hpp"

#include "cbp/knot_collocation.hpp"
#include "cbp/registry.hpp"

#include <cmath>
#include <random>

using namespace cbp;

TEST_CASE("theta vector layout") {
    const ThetaVector t{{1.0, 2.0, 3.0}, {4.0, 5.0}};
    CHECK(t.flat() == Vector{1.0, 2.0, 3.0, 4.0, 5.0});
    const auto back = ThetaVector::from_flat(t.flat(), 3, 2);
    CHECK(back.deriv_cps == t.deriv_cps);
    CHECK(back.init_conds == t.init_conds);
    CHECK_THROWS(ThetaVector::from_flat(t.flat(), 3, 3));
}

TEST_CASE("zeta_matrix: hand-computed block layout, n = 0, K = 2, M = 2, unit segments") {
    const auto z = zeta_matrix(0, KnotSequence({0.0, 1.0, 2.0}), 2);
    REQUIRE(z.rows() == 4);
    REQUIRE(z.cols() == 6);
    const double want[4][6] = {{0, 1, 1, 1, 0, 0}, {0, 0, 0, 1, 0, 0}, {0, 0, 0, 0, 1, 0}, {1, 1, 1, 1, 0, 1}};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 6; ++j) CHECK(z(i, j) == want[i][j]);
    CHECK_THROWS(zeta_matrix(2, KnotSequence({0.0, 1.0}), 2));
}

TEST_CASE("zeta_matrix: zero derivative gives the injected constant") {
    const KnotSequence kn({0.0, 0.4, 1.0, 1.5});
    const int M = 3;
    for (int n = 0; n < M; ++n) {
        const std::size_t rows = 3 * (n + 1) + M;
        Vector theta(rows, 0.0);
        theta[rows - M + 0] = 7.0;
        theta[rows - M + 1] = -2.0;
        theta[rows - M + 2] = 0.5;
        const auto out = row_times(theta, zeta_matrix(n, kn, M));
        const double want = theta[rows - M + (M - n - 1)];
        for (std::size_t c = 0; c < 3 * static_cast<std::size_t>(n + 2); ++c) CHECK(out[c] == want);
        for (int q = 0; q < M; ++q) CHECK(out[3 * (n + 2) + q] == theta[rows - M + q]);
    }
}

TEST_CASE("zeta_matrix: single segment equals gamma plus constant") {
    const Interval iv(0.5, 2.0);
    const KnotSequence kn({0.5, 2.0});
    const int M = 3, n = 1;
    const Vector d{0.3, -1.1};
    Vector theta = d;
    theta.insert(theta.end(), {0.0, 2.5, 0.0});  // X0' = 2.5 is the constant of level 2
    const auto out = row_times(theta, zeta_matrix(n, kn, M));
    auto want = row_times(d, int_matrix_gamma(n, iv));
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(out[i] == doctest::Approx(want[i] + 2.5));
}

TEST_CASE("knot values of a piecewise-constant integral: [0, 1, 3, 6]") {
    const KnotSequence kn({0.0, 1.0, 2.0, 3.0});
    const int M = 1;
    const Vector theta{1.0, 2.0, 3.0, 0.0};
    const auto z = zeta_matrix(0, kn, M);
    const auto theta1 = row_times(theta, z);
    const auto knots = row_times(theta1, p_matrix(1, kn, M));
    const Vector want{0.0, 1.0, 3.0, 6.0};
    for (int k = 0; k < 4; ++k) CHECK(knots[k] == doctest::Approx(want[k]));
    const auto oracle_cps = oracle::chain_integrate(theta, kn.knots(), M, 1);
    for (std::size_t i = 0; i < oracle_cps.size(); ++i) CHECK(theta1[i] == doctest::Approx(oracle_cps[i]));
}

TEST_CASE("p_matrix selector structure") {
    const auto p = p_matrix(1, KnotSequence({0.0, 1.0}), 2);
    CHECK(p.rows() == 4);
    CHECK(p.cols() == 2);
    CHECK(p(0, 0) == 1.0);
    CHECK(p(1, 1) == 1.0);
    const auto q = p_matrix(2, KnotSequence({0.0, 0.2, 0.5, 1.0}), 3);
    for (std::size_t c = 0; c < q.cols(); ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < q.rows(); ++r) sum += q(r, c);
        CHECK(sum == 1.0);
    }
    for (std::size_t r = q.rows() - 3; r < q.rows(); ++r)
        for (std::size_t c = 0; c < q.cols(); ++c) CHECK(q(r, c) == 0.0);
}

TEST_CASE("t_chain examples") {
    CHECK_THROWS(t_chain(4, 1, KnotSequence({0.0, 1.0})));
    CHECK_NOTHROW(t_chain(2, 1, KnotSequence({0.0, 1.0})));
    CHECK_NOTHROW(t_chain(3, 1, KnotSequence({0.0, 1.0})));

    const auto kn = KnotSequence::equidistant(0.0, 4.0, 4);
    const auto chain = t_chain(2, 1, kn);
    // x'' = 2, x(0) = 0, x'(0) = 0: x = s^2.
    const Vector theta{2.0, 2.0, 2.0, 2.0, 0.0, 0.0};
    const auto x = chain.knot_values(theta, 0);
    const Vector squares{0.0, 1.0, 4.0, 9.0, 16.0};
    for (int k = 0; k <= 4; ++k) CHECK(x[k] == doctest::Approx(squares[k]));
    const auto cbp = reconstruct_cbp(theta, 2, chain);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
        const double s = 4.0 * k / 999.0;
        worst = std::max(worst, std::abs(cbp(s) - s * s));
    }
    CHECK(worst <= 1e-12);

    // X^(M) = 0 and X_0 = c: X is constant.
    const Vector c{0.0, 0.0, 0.0, 0.0, -1.5, 0.0};
    for (double v : chain.knot_values(c, 0)) CHECK(v == -1.5);

    // Top derivative at knots uses the left segment constant.
    const Vector steps{1.0, 2.0, 3.0, 4.0, 0.0, 0.0};
    CHECK(chain.knot_values(steps, 2) == Vector{1.0, 1.0, 2.0, 3.0, 4.0});
}

TEST_CASE("property: reconstruct_cbp and T extraction match the chain oracle") {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 200; ++trial) {
        const int K = 1 + static_cast<int>(rng() % 6);
        const int M = 1 + static_cast<int>(rng() % 4);
        const auto kn = oracle::random_knots(rng, K, 0.0, 1.0 + trial % 3);
        const auto theta = oracle::random_vector(rng, static_cast<std::size_t>(K + M));
        const ThetaChain chain(M, KnotSequence(kn));
        for (int level = 0; level <= M; ++level) {
            const auto want = oracle::chain_integrate(theta, kn, M, level);
            const auto got = reconstruct_cbp(theta, level, chain);
            REQUIRE(got.flat().size() == want.size());
            for (std::size_t i = 0; i < want.size(); ++i) CHECK(std::abs(got.flat()[i] - want[i]) <= 1e-12);
            const auto kv = chain.knot_values(theta, M - level);
            CHECK(std::abs(kv[0] - want[0]) <= 1e-12);
            for (int k = 1; k <= K; ++k)
                CHECK(std::abs(kv[k] - want[static_cast<std::size_t>(k * (level + 1) - 1)]) <= 1e-12);
            // C0 at knots for every integrated level.
            if (level >= 1)
                for (int k = 1; k < K; ++k)
                    CHECK(std::abs(want[k * (level + 1) - 1] - want[k * (level + 1)]) <= 1e-12);
        }
    }
}

TEST_CASE("property: derivative consistency between levels") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-6;
    for (int trial = 0; trial < 30; ++trial) {
        const int K = 1 + static_cast<int>(rng() % 5);
        const int M = 2 + static_cast<int>(rng() % 3);
        const auto kn = oracle::random_knots(rng, K);
        const ThetaChain chain(M, KnotSequence(kn));
        const auto theta = oracle::random_vector(rng, static_cast<std::size_t>(K + M));
        for (int level = 2; level <= M; ++level) {
            const auto hi = reconstruct_cbp(theta, level, chain);
            const auto lo = reconstruct_cbp(theta, level - 1, chain);
            const double s = 0.01 + 0.98 * u(rng);
            const double fd = (hi(s + h) - hi(s - h)) / (2 * h);
            CHECK(std::abs(fd - lo(s)) <= 1e-6);
        }
    }
}

TEST_CASE("property: zeta structure") {
    const KnotSequence kn({0.0, 0.3, 0.7, 1.0});
    const int M = 3;
    for (int n = 0; n < M; ++n) {
        const auto z = zeta_matrix(n, kn, M);
        CHECK(z.rows() == static_cast<std::size_t>(3 * (n + 1) + M));
        CHECK(z.cols() == static_cast<std::size_t>(3 * (n + 2) + M));
        // Gamma block is zero below the block diagonal.
        for (int i = 1; i < 3; ++i)
            for (int j = 0; j < i; ++j)
                for (int a = 0; a <= n; ++a)
                    for (int b = 0; b <= n + 1; ++b) CHECK(z(i * (n + 1) + a, j * (n + 2) + b) == 0.0);
        // Shift blocks: constant h_i / (n + 1).
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                for (int a = 0; a <= n; ++a)
                    for (int b = 0; b <= n + 1; ++b)
                        CHECK(z(i * (n + 1) + a, j * (n + 2) + b) == doctest::Approx(kn.width(i) / (n + 1)));
        // CP rows never feed the integration-constant columns.
        for (int r = 0; r < 3 * (n + 1); ++r)
            for (int q = 0; q < M; ++q) CHECK(z(r, 3 * (n + 2) + q) == 0.0);
    }
}

TEST_CASE("assemble_knot_residual: row count and trivial ODE") {
    OdeProblem p;
    p.order = 1;
    p.domain = Interval(0.0, 1.0);
    p.rhs = [](double, std::span<const double>) { return 0.0; };
    p.conditions = InitialConditions{0.0, DenseMatrix::identity(1), {2.0}};
    const auto kn = KnotSequence::equidistant(0.0, 1.0, 5);
    for (int M : {2, 3}) {
        const auto chain = t_chain(M, 1, kn);
        CHECK(assemble_knot_residual(Vector(5 + M, 0.0), p, chain).size() == static_cast<std::size_t>(5 + M));
    }
    const auto sol = solve_knot(p, kn, 2);
    CHECK(sol.report.converged);
    for (int i = 0; i < 5; ++i) CHECK(std::abs(sol.theta[i]) <= 1e-14);
    CHECK(inf_norm(assemble_knot_residual(sol.theta, p, t_chain(2, 1, kn))) == 0.0);
    CHECK(extra_condition_node(KnotSequence({1.0, 2.0, 3.0})) == 1.5);
}

TEST_CASE("solve_knot: example1 reformulation at the knots") {
    const auto ex = ode_example("example1");
    const auto kn = KnotSequence::equidistant(0.0, 3.0, 10);
    const auto sol = solve_knot(ex.problem, kn, 3);
    REQUIRE(sol.report.converged);
    const auto chain = t_chain(3, 2, kn);
    const auto x0 = chain.knot_values(sol.theta, 0);
    const auto x1 = chain.knot_values(sol.theta, 1);
    const auto x2 = chain.knot_values(sol.theta, 2);
    CHECK(std::abs(x0[0] - 1.0) <= 1e-10);
    CHECK(std::abs(x1[0]) <= 1e-10);
    for (int k = 1; k <= 10; ++k) CHECK(std::abs(x2[k] + 2.0 / kn[k] * x1[k] + std::pow(x0[k], 5)) <= 1e-9);
    CHECK(std::abs(3.0 * x2[0] + std::pow(x0[0], 5)) <= 1e-9);
}

TEST_CASE("solve_knot: example4 exact only for M = 2 on even K") {
    const auto ex = ode_example("example4");
    for (int K : {2, 4, 8}) {
        CAPTURE(K);
        const auto kn = KnotSequence::equidistant(0.0, 1.0, K);
        CHECK(max_abs_error(solve_knot(ex.problem, kn, 2).x, ex.exact, 2001) <= 1e-9);
        CHECK(max_abs_error(solve_knot(ex.problem, kn, 3).x, ex.exact, 2001) > 1e-6);
    }
}

TEST_CASE("solve_knot: example3 error decreases in K") {
    const auto ex = ode_example("example3");
    for (int M : {5, 6}) {
        double prev = 1e9;
        for (int K : {4, 8, 16, 32}) {
            const auto sol = solve_knot(ex.problem, KnotSequence::equidistant(0.0, 1.0, K), M);
            CHECK(sol.report.converged);
            const double err = max_abs_error(sol.x, ex.exact, 2001);
            CHECK(err < prev);
            prev = err;
        }
    }
}

TEST_CASE("knot unknowns stay below cp unknowns") {
    const auto ex = ode_example("example2");
    for (int K : {4, 16}) {
        const auto sol = solve_knot(ex.problem, KnotSequence::equidistant(0.0, ex.problem.domain.sf(), K), 3);
        CHECK(sol.unknowns == static_cast<std::size_t>(K + 3));
        for (int n = 3; n <= 6; ++n) CHECK(sol.unknowns < static_cast<std::size_t>(K * (n + 1)));
    }
}

TEST_CASE("report_json schema (knot)") {
    const auto ex = ode_example("example4");
    const auto j = report_json(solve_knot(ex.problem, KnotSequence::equidistant(0.0, 1.0, 2), 2));
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys ==
          std::vector<std::string>{"method", "M", "K", "unknowns", "iterations", "residual_inf", "runtime_ms", "converged"});
}
