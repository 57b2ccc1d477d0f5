#pragma once

#include "cbp/bernstein.hpp"
#include "cbp/dense_matrix.hpp"

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cbp {

/// f(s, [x, x', ..., x^(r-1)]) = x^(r)(s). Must be safe to call concurrently.
using RhsFunction = std::function<double(double s, std::span<const double> lower)>;

/// Residual used in place of x^(r) - f at a node where f is singular; receives
/// [x, x', ..., x^(r)] at that node.
using OverrideResidual = std::function<double(std::span<const double> all)>;

struct SingularOverride {
    double node;
    OverrideResidual residual;
};

/// sum_l lambda(j, l) x^(l)(a) = mu(j).
struct InitialConditions {
    double a;
    DenseMatrix lambda;
    Vector mu;
};

/// sum_l alpha(j, l) x^(l)(s0) + beta(j, l) x^(l)(sf) = gamma(j).
struct BoundaryConditions {
    DenseMatrix alpha;
    DenseMatrix beta;
    Vector gamma;
};

using ConditionSet = std::variant<InitialConditions, BoundaryConditions>;

struct OdeProblem {
    std::string name;
    int order = 1;
    Interval domain{0.0, 1.0};
    RhsFunction rhs;
    ConditionSet conditions;
    std::vector<SingularOverride> overrides;

    [[nodiscard]] bool is_initial_value() const noexcept {
        return std::holds_alternative<InitialConditions>(conditions);
    }
    /// Override registered within 1e-12 of s, if any.
    [[nodiscard]] const SingularOverride* override_at(double s) const noexcept;
};

struct Diagnostic {
    std::string rule;
    std::string message;
};

/// Empty result means the problem is well formed.
std::vector<Diagnostic> validate(const OdeProblem& p);

/// Raised when the right-hand side produces a non-finite value.
class NonFiniteRhs : public std::runtime_error {
public:
    NonFiniteRhs(std::size_t node_index, double node);
    [[nodiscard]] std::size_t node_index() const noexcept { return index_; }
    [[nodiscard]] double node() const noexcept { return node_; }

private:
    std::size_t index_;
    double node_;
};

/// Elementwise f over a node set. `derivs[l][k]` is x^(l) at nodes[k] for
/// l = 0..r-1; a further sequence derivs[r] (x^(r)) is required wherever an
/// override applies, and the value returned there is x^(r) - residual so that
/// the caller's x^(r) - f reproduces the override residual.
Vector rhs_eval_vectorized(const OdeProblem& p, std::span<const double> nodes,
                           std::span<const Vector> derivs);

/// Collocation residual at one node: x^(r) - f, or the override residual.
/// `all` holds [x, ..., x^(r)].
double collocation_residual(const OdeProblem& p, double s, std::span<const double> all);

/// Condition residuals given derivative values at the relevant points.
/// For initial conditions `at_a` holds x^(l)(a); for boundary conditions
/// `at_s0`/`at_sf` hold x^(l) at the ends.
Vector condition_residuals(const ConditionSet& c, std::span<const double> at_a_or_s0,
                           std::span<const double> at_sf = {});

}  // namespace cbp
