#pragma once

#include "cbp/ode_problem.hpp"

#include <array>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace cbp {

/// Built-in ODE problem with its closed-form solution.
struct OdeExample {
    OdeProblem problem;
    std::function<double(double)> exact;
};

/// "example1" .. "example4"; throws std::invalid_argument otherwise.
OdeExample ode_example(std::string_view name);
std::vector<std::string> ode_example_names();

/// Damped tracking DAI:
///   x'' = u - gamma x',  x(0) = 0, x'(0) = 0,
///   |u| <= u_max,  |x - x_des| <= band,  x_des(t) = 2 sin(t) cos(2t).
struct Example5Params {
    double gamma = 1.0;
    double u_max = 5.0;
    double band = 0.2;
    double t_final = 10.0;  // horizon; harness default
    double x0 = 0.0;        // x(0); v0 is x'(0)
    double v0 = 0.0;
    int segments = 25;
    int m_order = 3;
    int degree = 3;  // degree of the x_des approximant, matches the level-M x CBP
};

double example5_target(double t);

/// Planar rod reaching around a circular obstacle:
///   p' = nu [cos(phi), sin(phi)],  phi' = u,
///   p(0) = p0, p(L) = p_des, |p - O| >= r_safe,
///   nu_min <= nu <= nu_max, |u| <= u_max.
/// Every geometric value below is a harness default.
struct Example6Params {
    double length = 1.0;
    std::array<double, 2> p0{0.0, 0.0};
    std::array<double, 2> p_des{0.7, 0.0};
    std::array<double, 2> obstacle{0.35, 0.0};
    double r_safe = 0.15;
    double nu_min = 0.8;
    double nu_max = 1.2;
    double u_max = 6.0;
    int segments = 15;
    int degree = 2;  // strain CBP degree n; position is degree n+1
};

}  // namespace cbp
