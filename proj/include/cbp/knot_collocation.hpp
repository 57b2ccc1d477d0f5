#pragma once

#include "cbp/composite.hpp"
#include "cbp/ode_problem.hpp"
#include "cbp/solver.hpp"

#include <span>
#include <vector>

#include "json.hpp"

namespace cbp {

/// theta_0 = [c_0, ..., c_{K-1}, X_0, X_0', ..., X_0^(M-1)]: the piecewise-constant
/// M-th derivative plus the integration constants at s_0.
struct ThetaVector {
    Vector deriv_cps;
    Vector init_conds;

    [[nodiscard]] Vector flat() const;
    static ThetaVector from_flat(std::span<const double> theta, int segments, int m_order);
};

/// Integration step theta_{n+1} = theta_n zeta_n,
/// shape (K(n+1)+M) x (K(n+2)+M), block layout [[Gamma_n, 0], [Psi_n, I_M]].
DenseMatrix zeta_matrix(int level, const KnotSequence& knots, int m_order);

/// Knot extractor for theta_n, shape (K(n+1)+M) x (K+1).
DenseMatrix p_matrix(int level, const KnotSequence& knots, int m_order);

/// Precomputed integration chain for one (M, knots) pair.
class ThetaChain {
public:
    ThetaChain(int m_order, KnotSequence knots);

    [[nodiscard]] int m_order() const noexcept { return m_; }
    [[nodiscard]] int segments() const noexcept { return knots_.segments(); }
    [[nodiscard]] std::size_t unknowns() const noexcept;
    [[nodiscard]] const KnotSequence& knots() const noexcept { return knots_; }

    [[nodiscard]] const DenseMatrix& zeta(int level) const { return zetas_.at(level); }
    [[nodiscard]] const DenseMatrix& extractor(int level) const { return extractors_.at(level); }
    /// zeta_0 zeta_1 ... zeta_{m-1}: maps theta_0 to theta_m.
    [[nodiscard]] const DenseMatrix& lift(int level) const { return lifts_.at(level); }
    /// T for the d-th derivative; theta_0 T gives X^(d) at the K+1 knots.
    /// d = M reads the piecewise constants with the left-segment value at knots.
    [[nodiscard]] const DenseMatrix& transform(int derivative) const { return transforms_.at(m_ - derivative); }

    /// theta_0 T_d.
    [[nodiscard]] Vector knot_values(std::span<const double> theta, int derivative) const;

private:
    int m_;
    KnotSequence knots_;
    std::vector<DenseMatrix> zetas_;
    std::vector<DenseMatrix> extractors_;
    std::vector<DenseMatrix> lifts_;
    std::vector<DenseMatrix> transforms_;  // indexed by level m = M - d
};

/// Chain for an order-r problem; M must be r+1 or r+2.
ThetaChain t_chain(int m_order, int r, const KnotSequence& knots);

/// Degree-m CBP of X^(M-m) built from theta_0.
CompositeBernstein reconstruct_cbp(std::span<const double> theta, int level, const ThetaChain& chain);

/// Midpoint of the first segment, where the extra M = r+2 condition is imposed.
double extra_condition_node(const KnotSequence& knots);

/// K+1 knot collocation rows, r condition rows and, for M = r+2, one extra
/// row at extra_condition_node. Length K+M.
Vector assemble_knot_residual(std::span<const double> theta, const OdeProblem& problem,
                              const ThetaChain& chain);

/// Zero derivative constants with initial values taken from the conditions.
Vector knot_initial_guess(const OdeProblem& problem, const ThetaChain& chain);

struct KnotSolution {
    CompositeBernstein x;
    Vector theta;
    SolveReport report;
    int m_order = 0;
    int segments = 0;
    std::size_t unknowns = 0;
};

KnotSolution solve_knot(const OdeProblem& problem, const KnotSequence& knots, int m_order,
                        const SolverOptions& opts = {});

/// {method:"knot", M, K, unknowns, iterations, residual_inf, runtime_ms, converged}
nlohmann::ordered_json report_json(const KnotSolution& s);

}  // namespace cbp
