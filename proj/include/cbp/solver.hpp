#pragma once

#include "cbp/dense_matrix.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace cbp {

using VectorFunction = std::function<Vector(const Vector&)>;
/// J(x) given x and F(x).
using JacobianFunction = std::function<DenseMatrix(const Vector&, const Vector&)>;

struct SolverOptions {
    double tol = 1e-10;  ///< residual infinity-norm target
    int max_iters = 100;
    double fd_step_scale = std::sqrt(std::numeric_limits<double>::epsilon());
    int line_search_max_halvings = 30;
    double lm_lambda0 = 1e-3;

    void validate() const;
};

struct SolveReport {
    bool converged = false;
    int iterations = 0;
    double residual_inf = std::numeric_limits<double>::infinity();
    double runtime_ms = 0.0;
    double jacobian_cond_estimate = 0.0;
    std::string message;
};

struct SolveResult {
    Vector x;
    SolveReport report;
};

/// Thrown by fd_jacobian when a perturbed evaluation is not finite.
class NonFiniteJacobian : public std::runtime_error {
public:
    NonFiniteJacobian(std::size_t column, const std::string& what)
        : std::runtime_error(what), column_(column) {}
    [[nodiscard]] std::size_t column() const noexcept { return column_; }

private:
    std::size_t column_;
};

/// Forward differences, step h_j = fd_step_scale * max(1, |x_j|).
/// `fx` may carry F(x) to save one evaluation.
DenseMatrix fd_jacobian(const VectorFunction& f, const Vector& x, const SolverOptions& opts = {},
                        const Vector* fx = nullptr);

/// Damped Newton on a square system; backtracking halves the step until the
/// residual infinity-norm decreases.
SolveResult newton_solve(const VectorFunction& f, Vector x0, const SolverOptions& opts = {});

/// Levenberg-Marquardt for rows >= cols. Forward differences unless `jac` is given.
SolveResult lm_solve(const VectorFunction& f, Vector x0, const SolverOptions& opts = {},
                     const JacobianFunction& jac = {});

struct AuglagResult {
    Vector x;
    SolveReport report;
    bool feasible = false;
    double max_violation = 0.0;      ///< largest inequality entry at the returned point
    std::size_t violation_index = 0;  ///< its position in the inequality vector
    double equality_inf = 0.0;
};

/// Feasibility via an augmented-Lagrangian outer loop: F_eq(x) = 0 and every
/// entry of G_ineq(x) <= 0. An empty `g_ineq` reduces to lm_solve on F_eq.
/// Inner problems are LM solves of [F_eq; sqrt(rho) max(0, mu/rho + G)]; the hinge
/// rows of the Jacobian are built from the active set rather than differenced.
AuglagResult auglag_solve(const VectorFunction& f_eq, const VectorFunction& g_ineq, Vector x0,
                          const SolverOptions& opts = {});

}  // namespace cbp
