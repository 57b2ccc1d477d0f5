#pragma once

#include "cbp/dense_matrix.hpp"

#include <span>
#include <utility>
#include <vector>

namespace cbp {

/// Largest degree accepted anywhere in the library; binomials beyond this are
/// no longer exact in double precision.
inline constexpr int kMaxDegree = 60;

/// Closed interval [s0, sf] with s0 < sf, both finite.
class Interval {
public:
    Interval(double s0, double sf);

    [[nodiscard]] double s0() const noexcept { return s0_; }
    [[nodiscard]] double sf() const noexcept { return sf_; }
    [[nodiscard]] double length() const noexcept { return sf_ - s0_; }

    /// True when s lies in the interval up to a relative slack of 1e-12.
    [[nodiscard]] bool contains(double s) const noexcept;
    /// Maps s to the unit parameter t in [0, 1]; throws std::domain_error
    /// when s is outside the interval.
    [[nodiscard]] double parameter(double s) const;

    bool operator==(const Interval&) const = default;

private:
    double s0_;
    double sf_;
};

/// binom(n, k) by multiplicative recurrence; n <= kMaxDegree.
double binomial(int n, int k);

/// Degree-n polynomial in Bernstein form on an interval.
class BernsteinPoly {
public:
    BernsteinPoly(std::vector<double> control_points, Interval interval);

    [[nodiscard]] int degree() const noexcept { return static_cast<int>(cps_.size()) - 1; }
    [[nodiscard]] const std::vector<double>& control_points() const noexcept { return cps_; }
    [[nodiscard]] const Interval& interval() const noexcept { return interval_; }

    /// de Casteljau evaluation.
    [[nodiscard]] double operator()(double s) const;

private:
    std::vector<double> cps_;
    Interval interval_;
};

double basis_eval(int n, int i, double s, const Interval& iv);

/// de Casteljau evaluation of raw control points at unit parameter t.
double de_casteljau(std::span<const double> cps, double t);

double eval_poly(const BernsteinPoly& p, double s);

/// Delta_n, (n+1) x n. x * Delta_n gives the degree n-1 derivative CPs.
DenseMatrix diff_matrix_delta(int n, const Interval& iv);

/// E_n^ne, (n+1) x (ne+1).
DenseMatrix elevation_matrix(int n, int ne);

/// D_n = Delta_n * E_{n-1}^n, (n+1) x (n+1); derivative CPs kept at degree n.
DenseMatrix diff_matrix_D(int n, const Interval& iv);

/// gamma_n, (n+1) x (n+2). Antiderivative CPs are x' * gamma_n + x(s0).
DenseMatrix int_matrix_gamma(int n, const Interval& iv);

BernsteinPoly elevate(const BernsteinPoly& p, int ne);
BernsteinPoly derivative(const BernsteinPoly& p);
/// Antiderivative taking the value `initial` at s0.
BernsteinPoly antiderivative(const BernsteinPoly& p, double initial);

BernsteinPoly multiply_cp(const BernsteinPoly& p, const BernsteinPoly& q);
BernsteinPoly add_cp(const BernsteinPoly& p, const BernsteinPoly& q);
BernsteinPoly sub_cp(const BernsteinPoly& p, const BernsteinPoly& q);
BernsteinPoly scale_cp(const BernsteinPoly& p, double factor);

struct HullBounds {
    double lo;
    double hi;
};

/// min/max of the control points; bounds p(s) over the whole interval.
HullBounds convex_hull_bounds(const BernsteinPoly& p);
HullBounds convex_hull_bounds(std::span<const double> cps);

}  // namespace cbp
