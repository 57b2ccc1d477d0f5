#pragma once

#include "cbp/composite.hpp"
#include "cbp/ode_problem.hpp"
#include "cbp/solver.hpp"

#include <span>
#include <vector>

#include "json.hpp"

namespace cbp {

/// Collocation rows dropped to make the control-point system square. Indices
/// refer to the collocation block (grid order).
struct SquaringPlan {
    std::vector<std::size_t> removed;
};

/// Discrete residual system in the flat control points X of a degree-n CBP.
///
/// Raw rows, in order: K(n+1) collocation rows X D^r - f(s_{n,K}, X, ..., X D^{r-1}),
/// r condition rows, then r(K-1) continuity rows (knot-major, derivative order
/// minor). Per-segment powers of D_n are built once at construction.
class CpSystem {
public:
    CpSystem(OdeProblem problem, int n, KnotSequence knots);

    [[nodiscard]] const OdeProblem& problem() const noexcept { return problem_; }
    [[nodiscard]] const KnotSequence& knots() const noexcept { return knots_; }
    [[nodiscard]] const CollocationGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] int degree() const noexcept { return n_; }
    [[nodiscard]] int order() const noexcept { return r_; }
    [[nodiscard]] int segments() const noexcept { return knots_.segments(); }

    [[nodiscard]] std::size_t unknowns() const noexcept;
    [[nodiscard]] std::size_t raw_rows() const noexcept;
    [[nodiscard]] std::size_t collocation_rows() const noexcept { return unknowns(); }
    [[nodiscard]] const SquaringPlan& plan() const noexcept { return plan_; }

    /// (D_n^{[i]})^l for segment i, l = 0..r.
    [[nodiscard]] const DenseMatrix& power(int segment, int l) const { return powers_[segment][l]; }

    /// Row scaling (h/n)^l capped at 1, one weight per raw row; keeps every row
    /// O(|X|) regardless of how fine the mesh is.
    [[nodiscard]] const Vector& row_weights() const noexcept { return weights_; }

    /// X D_{n,K}^l.
    [[nodiscard]] Vector derivative_cps(std::span<const double> xbar, int l) const;

private:
    OdeProblem problem_;
    int n_;
    int r_;
    KnotSequence knots_;
    CollocationGrid grid_;
    std::vector<std::vector<DenseMatrix>> powers_;
    SquaringPlan plan_;
    Vector weights_;
};

/// Raw (unweighted) residual of every row; length raw_rows().
Vector assemble_residual(const CpSystem& sys, std::span<const double> xbar);

/// Rows removed to square the system; throws when n <= r.
SquaringPlan square_system(const CpSystem& sys);

/// Weighted residual with the squaring plan applied; length unknowns().
Vector squared_residual(const CpSystem& sys, std::span<const double> xbar);

/// Weighted residual of every raw row (least-squares fallback).
Vector weighted_full_residual(const CpSystem& sys, std::span<const double> xbar);

/// Weighted continuity rows only.
Vector continuity_residual(const CpSystem& sys, std::span<const double> xbar);

/// Affine CBP matching the conditions that pin x or x' (zero otherwise).
Vector cp_initial_guess(const CpSystem& sys);

struct CpOptions {
    SolverOptions solver;
    bool least_squares = false;  ///< Levenberg-Marquardt on the full raw system
};

struct CpSolution {
    CompositeBernstein x;
    SolveReport report;
    int n = 0;
    int segments = 0;
    std::size_t unknowns = 0;
    double continuity_inf = 0.0;  ///< post-solve re-check of the weighted continuity rows
};

CpSolution solve_cp(const OdeProblem& problem, int n, const KnotSequence& knots,
                    const CpOptions& opts = {});

/// {method:"cp", n, K, iterations, residual_inf, runtime_ms, converged}
nlohmann::ordered_json report_json(const CpSolution& s);

}  // namespace cbp
