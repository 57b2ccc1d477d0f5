#include "doctest.h"
#include "oracles.hpp"

#include "cbp/cp_collocation.hpp"
#include "cbp/registry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace cbp;

namespace {

// Exact Example 4 solution as degree-n CPs on knots that contain s = 0.5.
// Quadratic q on [a, b]: CPs q(a), q(a) + h q'(a) / 2, q(b), then elevated.
Vector example4_exact_cps(const KnotSequence& kn, int n) {
    const auto x = ode_example("example4").exact;
    const auto dx = [](double s) { return std::abs(s - 0.5); };
    Vector out;
    for (int i = 0; i < kn.segments(); ++i) {
        const double a = kn[i], b = kn[i + 1];
        const BernsteinPoly q({x(a), x(a) + (b - a) * dx(a) / 2.0, x(b)}, Interval(a, b));
        const auto e = elevate(q, n);
        out.insert(out.end(), e.control_points().begin(), e.control_points().end());
    }
    return out;
}

OdeProblem zero_rhs_bvp() {
    OdeProblem p;
    p.order = 2;
    p.domain = Interval(0.0, 1.0);
    p.rhs = [](double, std::span<const double>) { return 0.0; };
    DenseMatrix a(2, 2), b(2, 2);
    a(0, 0) = 1.0;
    b(1, 0) = 1.0;
    p.conditions = BoundaryConditions{a, b, {1.0, 3.0}};
    return p;
}

}  // namespace

TEST_CASE("counting identity and squaring plan") {
    const auto p2 = ode_example("example2").problem;
    const CpSystem sys(p2, 5, KnotSequence::equidistant(p2.domain.s0(), p2.domain.sf(), 4));
    CHECK(sys.unknowns() == 24);
    CHECK(sys.raw_rows() == 32);
    CHECK(sys.plan().removed.size() == 8);
    CHECK(assemble_residual(sys, Vector(24, 0.0)).size() == 32);
    CHECK(squared_residual(sys, Vector(24, 0.0)).size() == 24);

    const auto p1 = ode_example("example1").problem;
    const CpSystem one(p1, 4, KnotSequence({0.0, 3.0}));
    CHECK(one.plan().removed == std::vector<std::size_t>{0, 1});

    CHECK_THROWS_AS(CpSystem(p1, 2, KnotSequence({0.0, 3.0})), std::invalid_argument);
}

TEST_CASE("property: square for every (n, K, r) and right duplicates removed") {
    for (const auto& name : ode_example_names()) {
        const auto p = ode_example(name).problem;
        for (int n = p.order + 1; n <= p.order + 4; ++n)
            for (int K : {1, 2, 3, 7}) {
                CAPTURE(name);
                CAPTURE(n);
                CAPTURE(K);
                const CpSystem sys(p, n, KnotSequence::equidistant(p.domain.s0(), p.domain.sf(), K));
                CHECK(sys.raw_rows() == sys.unknowns() + static_cast<std::size_t>(p.order * K));
                CHECK(sys.raw_rows() - sys.plan().removed.size() == sys.unknowns());
                for (int i = 1; i < K; ++i) {
                    const std::size_t right_dup = static_cast<std::size_t>(i) * (n + 1);
                    CHECK(std::binary_search(sys.plan().removed.begin(), sys.plan().removed.end(), right_dup));
                }
            }
    }
}

TEST_CASE("example4 exact CPs have vanishing residual for even K") {
    const auto p = ode_example("example4").problem;
    for (int K : {2, 4, 8})
        for (int n : {2, 3, 5}) {
            const auto kn = KnotSequence::equidistant(0.0, 1.0, K);
            const CpSystem sys(p, n, kn);
            const auto x = example4_exact_cps(kn, n);
            CHECK(max_abs_error(CompositeBernstein(kn, n, x), ode_example("example4").exact, 1001) <= 1e-14);
            CHECK(inf_norm(assemble_residual(sys, x)) <= 1e-12);
        }
}

TEST_CASE("affine X solves x'' = 0: collocation block vanishes") {
    const auto p = zero_rhs_bvp();
    const auto kn = KnotSequence({0.0, 0.3, 1.0});
    const CpSystem sys(p, 3, kn);
    Vector x;
    for (double s : sys.grid().nodes) x.push_back(1.0 + 2.0 * s);
    const auto res = assemble_residual(sys, x);
    for (std::size_t i = 0; i < sys.collocation_rows(); ++i) CHECK(std::abs(res[i]) <= 1e-12);
    CHECK(inf_norm(res) <= 1e-12);
}

TEST_CASE("continuity rows flag only the broken knot") {
    const auto p = zero_rhs_bvp();
    const auto kn = KnotSequence::equidistant(0.0, 1.0, 4);
    const CpSystem sys(p, 3, kn);
    Vector x;
    for (double s : sys.grid().nodes) x.push_back(1.0 + 2.0 * s);
    x[2 * 4] += 0.5;  // first CP of segment 2: breaks C0 and C1 at knot 2
    const auto res = assemble_residual(sys, x);
    const std::size_t first = sys.collocation_rows() + 2;
    for (int knot = 1; knot < 4; ++knot)
        for (int l = 0; l < 2; ++l) {
            const double v = res[first + (knot - 1) * 2 + l];
            if (knot == 2)
                CHECK(std::abs(v) > 1e-3);
            else
                CHECK(std::abs(v) <= 1e-12);
        }
}

TEST_CASE("solve_cp: example2 meets its boundary values") {
    const auto ex = ode_example("example2");
    const double L = 2.0 * std::numbers::pi;
    const auto sol = solve_cp(ex.problem, 5, KnotSequence::equidistant(0.0, L, 8));
    CHECK(sol.report.converged);
    CHECK(sol.report.iterations <= 2);
    CHECK(std::abs(sol.x(0.0) - 7.0) <= 1e-8);
    CHECK(std::abs(sol.x(L)) <= 1e-8);
    CHECK(sol.continuity_inf <= 1e-10);
}

TEST_CASE("solve_cp: example4 exact for even K, every n") {
    const auto ex = ode_example("example4");
    for (int n : {2, 3, 4, 5, 6}) {
        CAPTURE(n);
        const auto sol = solve_cp(ex.problem, n, KnotSequence::equidistant(0.0, 1.0, 4));
        CHECK(sol.report.converged);
        CHECK(max_abs_error(sol.x, ex.exact, 2001) <= 1e-9);
    }
}

TEST_CASE("solve_cp: example1 error decreases under K doubling") {
    const auto ex = ode_example("example1");
    double prev = 1e9;
    for (int K : {5, 10, 20}) {
        const auto sol = solve_cp(ex.problem, 4, KnotSequence::equidistant(0.0, 3.0, K));
        CHECK(sol.report.converged);
        const double err = max_abs_error(sol.x, ex.exact, 2001);
        CHECK(err < prev);
        prev = err;
    }
}

TEST_CASE("solve_cp: least-squares fallback agrees with the square solve") {
    const auto ex = ode_example("example4");
    CpOptions ls;
    ls.least_squares = true;
    const auto kn = KnotSequence::equidistant(0.0, 1.0, 4);
    const auto a = solve_cp(ex.problem, 3, kn);
    const auto b = solve_cp(ex.problem, 3, kn, ls);
    CHECK(b.report.converged);
    for (std::size_t i = 0; i < a.x.flat().size(); ++i) CHECK(std::abs(a.x.flat()[i] - b.x.flat()[i]) <= 1e-8);
}

TEST_CASE("solve_cp: example3 fourth-order IVP") {
    const auto ex = ode_example("example3");
    double prev = 1e9;
    for (int K : {4, 8, 16}) {
        const auto kn = KnotSequence::equidistant(0.0, 1.0, K);
        const auto sol = solve_cp(ex.problem, 6, kn);
        CHECK(sol.report.converged);
        const CpSystem sys(ex.problem, 6, kn);
        const auto res = assemble_residual(sys, sol.x.flat());
        for (int j = 0; j < 4; ++j) CHECK(std::abs(res[sys.collocation_rows() + j]) <= 1e-8);
        const double err = max_abs_error(sol.x, ex.exact, 2001);
        CHECK(err < prev);
        prev = err;
    }
    CHECK(prev <= 1e-4);
}

TEST_CASE("report_json schema") {
    const auto ex = ode_example("example4");
    const auto j = report_json(solve_cp(ex.problem, 3, KnotSequence::equidistant(0.0, 1.0, 2)));
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    CHECK(keys == std::vector<std::string>{"method", "n", "K", "iterations", "residual_inf", "runtime_ms", "converged"});
    CHECK(j["method"] == "cp");
}
