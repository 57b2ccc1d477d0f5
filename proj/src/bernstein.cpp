#include "cbp/bernstein.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cbp {

namespace {

constexpr double kContainSlack = 1e-12;

void require_degree(int n, const char* who) {
    if (n < 0 || n > kMaxDegree)
        throw std::invalid_argument(std::string(who) + ": degree " + std::to_string(n) +
                                    " outside [0, " + std::to_string(kMaxDegree) + "]");
}

void require_same_interval(const BernsteinPoly& p, const BernsteinPoly& q, const char* who) {
    if (!(p.interval() == q.interval()))
        throw std::invalid_argument(std::string(who) + ": operands live on different intervals");
}

}  // namespace

Interval::Interval(double s0, double sf) : s0_(s0), sf_(sf) {
    if (!std::isfinite(s0) || !std::isfinite(sf) || !(sf > s0))
        throw std::invalid_argument("Interval: requires finite s0 < sf");
}

bool Interval::contains(double s) const noexcept {
    const double slack = kContainSlack * std::max(1.0, std::max(std::abs(s0_), std::abs(sf_)));
    return s >= s0_ - slack && s <= sf_ + slack;
}

double Interval::parameter(double s) const {
    if (!contains(s))
        throw std::domain_error("Interval: s = " + std::to_string(s) + " outside [" +
                                std::to_string(s0_) + ", " + std::to_string(sf_) + "]");
    return std::clamp((s - s0_) / (sf_ - s0_), 0.0, 1.0);
}

double binomial(int n, int k) {
    require_degree(n, "binomial");
    if (k < 0 || k > n) return 0.0;
    k = std::min(k, n - k);
    double c = 1.0;
    for (int j = 1; j <= k; ++j) c = c * (n - k + j) / j;
    return std::round(c);
}

BernsteinPoly::BernsteinPoly(std::vector<double> control_points, Interval interval)
    : cps_(std::move(control_points)), interval_(interval) {
    if (cps_.empty()) throw std::invalid_argument("BernsteinPoly: needs at least one control point");
    require_degree(degree(), "BernsteinPoly");
    for (double c : cps_)
        if (!std::isfinite(c)) throw std::invalid_argument("BernsteinPoly: non-finite control point");
}

double BernsteinPoly::operator()(double s) const { return eval_poly(*this, s); }

double basis_eval(int n, int i, double s, const Interval& iv) {
    require_degree(n, "basis_eval");
    if (i < 0 || i > n) throw std::out_of_range("basis_eval: index outside [0, n]");
    const double t = iv.parameter(s);
    return binomial(n, i) * std::pow(t, i) * std::pow(1.0 - t, n - i);
}

double de_casteljau(std::span<const double> cps, double t) {
    if (cps.empty()) throw std::invalid_argument("de_casteljau: empty control points");
    // Small fixed buffer covers every supported degree without allocating.
    std::array<double, kMaxDegree + 1> work{};
    if (cps.size() > work.size()) throw std::invalid_argument("de_casteljau: degree too large");
    std::copy(cps.begin(), cps.end(), work.begin());
    const double u = 1.0 - t;
    for (std::size_t r = cps.size() - 1; r > 0; --r)
        for (std::size_t i = 0; i < r; ++i) work[i] = u * work[i] + t * work[i + 1];
    return work[0];
}

double eval_poly(const BernsteinPoly& p, double s) {
    return de_casteljau(p.control_points(), p.interval().parameter(s));
}

DenseMatrix diff_matrix_delta(int n, const Interval& iv) {
    require_degree(n, "diff_matrix_delta");
    if (n == 0) throw std::invalid_argument("diff_matrix_delta: degree 0 has no derivative CPs");
    const double c = n / iv.length();
    DenseMatrix d(n + 1, n);
    for (int j = 0; j < n; ++j) {
        d(j, j) = -c;
        d(j + 1, j) = c;
    }
    return d;
}

DenseMatrix elevation_matrix(int n, int ne) {
    require_degree(n, "elevation_matrix");
    require_degree(ne, "elevation_matrix");
    if (ne < n) throw std::invalid_argument("elevation_matrix: target degree below source degree");
    DenseMatrix e(n + 1, ne + 1);
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= ne - n; ++j)
            e(i, i + j) = binomial(ne - n, j) * binomial(n, i) / binomial(ne, i + j);
    return e;
}

DenseMatrix diff_matrix_D(int n, const Interval& iv) {
    return diff_matrix_delta(n, iv) * elevation_matrix(n - 1, n);
}

DenseMatrix int_matrix_gamma(int n, const Interval& iv) {
    require_degree(n, "int_matrix_gamma");
    const double c = iv.length() / (n + 1);
    DenseMatrix g(n + 1, n + 2);
    for (int i = 0; i <= n; ++i)
        for (int j = i + 1; j <= n + 1; ++j) g(i, j) = c;
    return g;
}

BernsteinPoly elevate(const BernsteinPoly& p, int ne) {
    if (ne == p.degree()) return p;
    return {row_times(p.control_points(), elevation_matrix(p.degree(), ne)), p.interval()};
}

BernsteinPoly derivative(const BernsteinPoly& p) {
    return {row_times(p.control_points(), diff_matrix_delta(p.degree(), p.interval())), p.interval()};
}

BernsteinPoly antiderivative(const BernsteinPoly& p, double initial) {
    auto cps = row_times(p.control_points(), int_matrix_gamma(p.degree(), p.interval()));
    for (double& c : cps) c += initial;
    return {std::move(cps), p.interval()};
}

BernsteinPoly multiply_cp(const BernsteinPoly& p, const BernsteinPoly& q) {
    require_same_interval(p, q, "multiply_cp");
    const int m = p.degree();
    const int n = q.degree();
    require_degree(m + n, "multiply_cp");
    const auto& pc = p.control_points();
    const auto& qc = q.control_points();
    std::vector<double> out(m + n + 1, 0.0);
    for (int k = 0; k <= m + n; ++k) {
        const double denom = binomial(m + n, k);
        double acc = 0.0;
        for (int j = std::max(0, k - n); j <= std::min(m, k); ++j)
            acc += binomial(m, j) * binomial(n, k - j) * pc[j] * qc[k - j];
        out[k] = acc / denom;
    }
    return {std::move(out), p.interval()};
}

namespace {

template <typename Op>
BernsteinPoly combine(const BernsteinPoly& p, const BernsteinPoly& q, Op op, const char* who) {
    require_same_interval(p, q, who);
    const int ne = std::max(p.degree(), q.degree());
    const auto pe = elevate(p, ne);
    const auto qe = elevate(q, ne);
    std::vector<double> out(ne + 1);
    for (int i = 0; i <= ne; ++i) out[i] = op(pe.control_points()[i], qe.control_points()[i]);
    return {std::move(out), p.interval()};
}

}  // namespace

BernsteinPoly add_cp(const BernsteinPoly& p, const BernsteinPoly& q) {
    return combine(p, q, [](double a, double b) { return a + b; }, "add_cp");
}

BernsteinPoly sub_cp(const BernsteinPoly& p, const BernsteinPoly& q) {
    return combine(p, q, [](double a, double b) { return a - b; }, "sub_cp");
}

BernsteinPoly scale_cp(const BernsteinPoly& p, double factor) {
    auto cps = p.control_points();
    for (double& c : cps) c *= factor;
    return {std::move(cps), p.interval()};
}

HullBounds convex_hull_bounds(std::span<const double> cps) {
    if (cps.empty()) throw std::invalid_argument("convex_hull_bounds: empty control points");
    const auto [lo, hi] = std::minmax_element(cps.begin(), cps.end());
    return {*lo, *hi};
}

HullBounds convex_hull_bounds(const BernsteinPoly& p) { return convex_hull_bounds(p.control_points()); }

}  // namespace cbp
