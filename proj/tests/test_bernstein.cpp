#include "doctest.h"
#include "oracles.hpp"

#include "cbp/bernstein.hpp"

#include <algorithm>
#include <random>

using namespace cbp;

namespace {

std::vector<double> cps_times(const std::vector<double>& x, const DenseMatrix& a) { return row_times(x, a); }

}  // namespace

TEST_CASE("interval rejects invalid bounds") {
    CHECK_THROWS(Interval(1.0, 1.0));
    CHECK_THROWS(Interval(2.0, 1.0));
    CHECK_THROWS(Interval(0.0, std::numeric_limits<double>::infinity()));
    CHECK_NOTHROW(Interval(-1.0, 1.0));
}

TEST_CASE("binomial matches Pascal's triangle and rejects large n") {
    for (int n = 0; n <= 30; ++n)
        for (int k = 0; k <= n; ++k) CHECK(binomial(n, k) == doctest::Approx(oracle::binom(n, k)).epsilon(1e-15));
    CHECK_THROWS(binomial(kMaxDegree + 1, 3));
}

TEST_CASE("basis_eval examples") {
    const Interval unit(0.0, 1.0);
    CHECK(basis_eval(0, 0, 0.7, unit) == 1.0);
    CHECK(basis_eval(2, 1, 0.5, unit) == doctest::Approx(0.5).epsilon(1e-15));
    double sum = 0.0;
    for (int i = 0; i <= 5; ++i) sum += basis_eval(5, i, 0.3, unit);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS(basis_eval(3, 4, 0.5, unit));
    CHECK_THROWS(basis_eval(3, -1, 0.5, unit));
    CHECK_THROWS(basis_eval(3, 1, 1.5, unit));
}

TEST_CASE("basis_eval agrees with the power-form oracle") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Interval iv(-2.0, 3.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = static_cast<int>(rng() % 12);
        const int i = static_cast<int>(rng() % (n + 1));
        const double s = -2.0 + 5.0 * u(rng);
        CHECK(basis_eval(n, i, s, iv) == doctest::Approx(oracle::basis(n, i, s, -2.0, 3.0)).epsilon(1e-12));
    }
}

TEST_CASE("property: partition of unity up to degree 20") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Interval iv(0.5, 2.0);
    for (int n = 0; n <= 20; ++n)
        for (int k = 0; k < 100; ++k) {
            const double s = 0.5 + 1.5 * u(rng);
            double sum = 0.0;
            for (int i = 0; i <= n; ++i) sum += basis_eval(n, i, s, iv);
            CHECK(std::abs(sum - 1.0) <= 1e-12);
        }
}

TEST_CASE("eval_poly examples") {
    const BernsteinPoly c({2.5, 2.5, 2.5}, Interval(-3.0, 7.0));
    for (double s : {-3.0, 0.0, 1.3, 7.0}) CHECK(eval_poly(c, s) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(eval_poly(BernsteinPoly({0.0, 1.0}, Interval(0.0, 1.0)), 0.25) == doctest::Approx(0.25));
    const BernsteinPoly p({0.3, -1.2, 4.0, 0.9}, Interval(1.0, 2.0));
    CHECK(eval_poly(p, 1.0) == 0.3);
    CHECK(eval_poly(p, 2.0) == 0.9);
    CHECK_THROWS(eval_poly(p, 2.5));
    CHECK_THROWS(BernsteinPoly({}, Interval(0.0, 1.0)));
}

TEST_CASE("property: de Casteljau agrees with the basis sum oracle") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = static_cast<int>(rng() % 11);
        const auto c = oracle::random_vector(rng, n + 1);
        const BernsteinPoly p(c, Interval(-1.0, 2.0));
        const double s = -1.0 + 3.0 * u(rng);
        CHECK(eval_poly(p, s) == doctest::Approx(oracle::bernstein_sum(c, s, -1.0, 2.0)).epsilon(1e-12));
    }
}

TEST_CASE("property: endpoint interpolation") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = static_cast<int>(rng() % 15);
        const auto c = oracle::random_vector(rng, n + 1, -5.0, 5.0);
        const BernsteinPoly p(c, Interval(0.1, 0.9));
        CHECK(std::abs(eval_poly(p, 0.1) - c.front()) <= 1e-14 * std::max(1.0, std::abs(c.front())));
        CHECK(std::abs(eval_poly(p, 0.9) - c.back()) <= 1e-14 * std::max(1.0, std::abs(c.back())));
    }
}

TEST_CASE("diff_matrix_delta examples") {
    const auto d1 = diff_matrix_delta(1, Interval(0.0, 1.0));
    REQUIRE(d1.rows() == 2);
    REQUIRE(d1.cols() == 1);
    CHECK(d1(0, 0) == -1.0);
    CHECK(d1(1, 0) == 1.0);
    CHECK(cps_times({0.0, 1.0}, d1) == std::vector<double>{1.0});

    const auto d3 = diff_matrix_delta(3, Interval(-1.0, 4.0));
    for (double v : cps_times({2.0, 2.0, 2.0, 2.0}, d3)) CHECK(v == doctest::Approx(0.0));

    const auto d = cps_times({0.0, 1.0, 2.0}, diff_matrix_delta(2, Interval(0.0, 2.0)));
    REQUIRE(d.size() == 2);
    CHECK(d[0] == doctest::Approx(1.0));
    CHECK(d[1] == doctest::Approx(1.0));
    CHECK_THROWS(diff_matrix_delta(0, Interval(0.0, 1.0)));
}

TEST_CASE("property: derivative matches centered differences") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Interval iv(0.0, 1.5);
    const double h = 1e-5;
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 10);
        const BernsteinPoly p(oracle::random_vector(rng, n + 1), iv);
        const BernsteinPoly dp(cps_times(p.control_points(), diff_matrix_delta(n, iv)), iv);
        const double s = h + (1.5 - 2 * h) * u(rng);
        const double fd = (eval_poly(p, s + h) - eval_poly(p, s - h)) / (2 * h);
        CHECK(std::abs(fd - eval_poly(dp, s)) <= 1e-6);
    }
}

TEST_CASE("elevation_matrix examples") {
    CHECK(elevation_matrix(4, 4) == DenseMatrix::identity(5));
    const auto e = cps_times({0.0, 1.0}, elevation_matrix(1, 2));
    CHECK(e[0] == 0.0);
    CHECK(e[1] == doctest::Approx(0.5));
    CHECK(e[2] == doctest::Approx(1.0));
    CHECK_THROWS(elevation_matrix(3, 2));
}

TEST_CASE("elevation_matrix entries match the closed form") {
    for (int n = 0; n <= 6; ++n)
        for (int ne = n; ne <= 9; ++ne) {
            const auto E = elevation_matrix(n, ne);
            REQUIRE(E.rows() == static_cast<std::size_t>(n + 1));
            REQUIRE(E.cols() == static_cast<std::size_t>(ne + 1));
            for (int i = 0; i <= n; ++i)
                for (int k = 0; k <= ne; ++k) {
                    const int j = k - i;
                    const double want = (j >= 0 && j <= ne - n)
                                            ? oracle::binom(ne - n, j) * oracle::binom(n, i) / oracle::binom(ne, k)
                                            : 0.0;
                    CHECK(E(i, k) == doctest::Approx(want).epsilon(1e-14));
                }
        }
}

TEST_CASE("property: elevation preserves the polynomial and shrinks the hull") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = static_cast<int>(rng() % 8);
        const int ne = n + static_cast<int>(rng() % 6);
        const BernsteinPoly p(oracle::random_vector(rng, n + 1), Interval(-1.0, 1.0));
        const auto q = elevate(p, ne);
        CHECK(q.degree() == ne);
        double worst = 0.0;
        for (int k = 0; k < 1000; ++k) {
            const double s = -1.0 + 2.0 * k / 999.0;
            worst = std::max(worst, std::abs(eval_poly(p, s) - eval_poly(q, s)));
        }
        CHECK(worst <= 1e-12);
        const auto hp = convex_hull_bounds(p);
        const auto hq = convex_hull_bounds(q);
        CHECK(hq.lo >= hp.lo - 1e-15);
        CHECK(hq.hi <= hp.hi + 1e-15);
    }
}

TEST_CASE("diff_matrix_D examples") {
    const Interval unit(0.0, 1.0);
    for (double v : cps_times({3.0, 3.0, 3.0, 3.0}, diff_matrix_D(3, unit))) CHECK(v == doctest::Approx(0.0));
    const auto d = cps_times({0.0, 0.0, 1.0}, diff_matrix_D(2, unit));
    CHECK(d[0] == doctest::Approx(0.0));
    CHECK(d[1] == doctest::Approx(1.0));
    CHECK(d[2] == doctest::Approx(2.0));
    // Second derivative of an affine polynomial.
    const auto D1 = diff_matrix_D(1, unit);
    for (double v : cps_times(cps_times({0.4, -2.0}, D1), D1)) CHECK(v == doctest::Approx(0.0));
    CHECK(max_abs_diff(diff_matrix_D(4, unit), diff_matrix_delta(4, unit) * elevation_matrix(3, 4)) == 0.0);
    CHECK_THROWS(diff_matrix_D(0, unit));
}

TEST_CASE("int_matrix_gamma examples and round trip") {
    const auto g0 = int_matrix_gamma(0, Interval(0.0, 2.0));
    auto a = cps_times({3.0}, g0);
    CHECK(a[0] == doctest::Approx(0.0));
    CHECK(a[1] == doctest::Approx(6.0));
    a = cps_times({0.0}, g0);
    for (auto& v : a) v += 1.7;
    CHECK(a == std::vector<double>{1.7, 1.7});

    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 10);
        const Interval iv(0.0, 0.25 * (1 + trial % 4));
        const auto x = oracle::random_vector(rng, n + 1);
        auto back = cps_times(cps_times(x, diff_matrix_delta(n, iv)), int_matrix_gamma(n - 1, iv));
        for (auto& v : back) v += x[0];
        for (int i = 0; i <= n; ++i) CHECK(back[i] == doctest::Approx(x[i]).epsilon(1e-13));
    }
}

TEST_CASE("antiderivative reaches the integral") {
    const BernsteinPoly p({1.0, -2.0, 0.5}, Interval(1.0, 3.0));
    const auto P = antiderivative(p, 0.25);
    CHECK(P.degree() == 3);
    CHECK(eval_poly(P, 1.0) == doctest::Approx(0.25));
    // Simpson is exact for quadratics.
    const double simpson = (2.0 / 6.0) * (eval_poly(p, 1.0) + 4 * eval_poly(p, 2.0) + eval_poly(p, 3.0));
    CHECK(eval_poly(P, 3.0) == doctest::Approx(0.25 + simpson).epsilon(1e-13));
}

TEST_CASE("multiply_cp examples") {
    const BernsteinPoly s({0.0, 1.0}, Interval(0.0, 1.0));
    const auto sq = multiply_cp(s, s);
    REQUIRE(sq.degree() == 2);
    CHECK(sq.control_points()[0] == 0.0);
    CHECK(sq.control_points()[1] == doctest::Approx(0.0));
    CHECK(sq.control_points()[2] == doctest::Approx(1.0));

    const BernsteinPoly p({0.2, -1.0, 3.0}, Interval(0.0, 1.0));
    const auto same = multiply_cp(p, BernsteinPoly({1.0}, Interval(0.0, 1.0)));
    CHECK(same.control_points() == p.control_points());
    CHECK_THROWS(multiply_cp(p, BernsteinPoly({1.0}, Interval(0.0, 2.0))));
}

TEST_CASE("property: arithmetic agrees with pointwise products and sums") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Interval iv(-0.5, 1.5);
    for (int trial = 0; trial < 30; ++trial) {
        const BernsteinPoly p(oracle::random_vector(rng, 1 + rng() % 6), iv);
        const BernsteinPoly q(oracle::random_vector(rng, 1 + rng() % 6), iv);
        const auto m = multiply_cp(p, q);
        const auto a = add_cp(p, q);
        const auto d = sub_cp(p, q);
        CHECK(m.degree() == p.degree() + q.degree());
        CHECK(a.degree() == std::max(p.degree(), q.degree()));
        for (int k = 0; k < 1000; ++k) {
            const double s = -0.5 + 2.0 * u(rng);
            const double ps = oracle::bernstein_sum(p.control_points(), s, -0.5, 1.5);
            const double qs = oracle::bernstein_sum(q.control_points(), s, -0.5, 1.5);
            CHECK(std::abs(eval_poly(m, s) - ps * qs) <= 1e-12);
            CHECK(std::abs(eval_poly(a, s) - (ps + qs)) <= 1e-12);
            CHECK(std::abs(eval_poly(d, s) - (ps - qs)) <= 1e-12);
        }
    }
}

TEST_CASE("add and sub examples") {
    const BernsteinPoly p({0.3, 1.0, -2.0}, Interval(0.0, 1.0));
    const auto zero = sub_cp(p, p);
    for (double v : zero.control_points()) CHECK(v == 0.0);
    const BernsteinPoly lin({0.0, 1.0}, Interval(0.0, 1.0));
    const BernsteinPoly cub({1.0, 2.0, 3.0, 4.0}, Interval(0.0, 1.0));
    CHECK(add_cp(lin, cub).degree() == 3);
    CHECK_THROWS(add_cp(lin, BernsteinPoly({0.0, 1.0}, Interval(0.0, 2.0))));
}

TEST_CASE("convex_hull_bounds examples and sampling") {
    const auto h = convex_hull_bounds(BernsteinPoly({-1.0, 2.0, 0.0}, Interval(0.0, 1.0)));
    CHECK(h.lo == -1.0);
    CHECK(h.hi == 2.0);
    const auto c = convex_hull_bounds(BernsteinPoly({0.7, 0.7, 0.7}, Interval(0.0, 1.0)));
    CHECK(c.lo == 0.7);
    CHECK(c.hi == 0.7);

    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const BernsteinPoly p(oracle::random_vector(rng, 1 + rng() % 8), Interval(0.0, 1.0));
        const auto b = convex_hull_bounds(p);
        for (int k = 0; k < 10000; ++k) {
            const double v = eval_poly(p, k / 9999.0);
            CHECK(v >= b.lo - 1e-15);
            CHECK(v <= b.hi + 1e-15);
        }
    }
}
