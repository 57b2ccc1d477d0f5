#pragma once

#include "cbp/composite.hpp"
#include "cbp/knot_collocation.hpp"
#include "cbp/registry.hpp"
#include "cbp/solver.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cbp {

enum class DaiMethod { knot, cp };

/// One unknown function. For the knot method `order` is M (theta has K+M
/// entries, X itself is the degree-M CBP). For the cp method the unknown is a
/// degree-n CBP with continuity enforced on derivatives 0..order-1.
struct DaiUnknown {
    std::string name;
    int order = 1;
};

struct DaiProblem;

/// CP views of every unknown for one decision vector.
class SolutionBundle {
public:
    [[nodiscard]] const KnotSequence& knots() const noexcept { return knots_; }
    [[nodiscard]] std::size_t size() const noexcept { return names_.size(); }
    [[nodiscard]] const std::vector<std::string>& names() const noexcept { return names_; }
    [[nodiscard]] std::size_t index(std::string_view name) const;
    [[nodiscard]] int order(std::string_view name) const { return orders_[index(name)]; }

    /// CBP of the d-th derivative, 0 <= d <= order. Knot method: degree M-d.
    /// cp method: degree n (order-preserving differentiation).
    [[nodiscard]] const CompositeBernstein& cbp(std::string_view name, int derivative = 0) const;

    /// Values of the d-th derivative where equalities are enforced: the K+1
    /// knots (theta T_d for the knot method), or every collocation node in strict
    /// cp mode.
    [[nodiscard]] const Vector& node_values(std::string_view name, int derivative = 0) const;
    [[nodiscard]] const Vector& nodes() const noexcept { return nodes_; }

private:
    friend class DaiLayout;
    KnotSequence knots_ = KnotSequence({0.0, 1.0});
    std::vector<std::string> names_;
    std::vector<int> orders_;
    std::vector<std::vector<CompositeBernstein>> cbps_;
    std::vector<std::vector<Vector>> node_values_;
    Vector nodes_;
};

using EqualityBuilder = std::function<Vector(const SolutionBundle&)>;

/// g(s, X, X', ...) <= 0 expressed as a CBP built with CP operations.
struct InequalityBuilder {
    std::string label;
    std::function<CompositeBernstein(const SolutionBundle&)> builder;
};

/// A curve reported next to the unknowns; `approximation` marks CP-sampled
/// stand-ins for non-polynomial functions.
struct DerivedCurve {
    std::string name;
    CompositeBernstein curve;
    bool approximation = false;
};

struct DaiProblem {
    std::string name;
    KnotSequence knots = KnotSequence({0.0, 1.0});
    std::vector<DaiUnknown> unknowns;
    DaiMethod method = DaiMethod::knot;
    int cp_degree = 3;
    bool strict = false;  ///< cp method only: equalities at every collocation node
    EqualityBuilder equalities;
    std::vector<InequalityBuilder> inequalities;
    Vector initial_guess;  ///< flat decision vector; empty means zeros
    std::function<std::vector<DerivedCurve>(const SolutionBundle&)> derived;
};

/// Decision-vector layout and cached integration chains for a DaiProblem.
class DaiLayout {
public:
    explicit DaiLayout(const DaiProblem& p);

    [[nodiscard]] std::size_t unknowns() const noexcept { return total_; }
    [[nodiscard]] std::size_t offset(std::size_t u) const { return offsets_.at(u); }
    [[nodiscard]] std::size_t width(std::size_t u) const { return widths_.at(u); }
    [[nodiscard]] const ThetaChain& chain(std::size_t u) const { return chains_.at(u).value(); }

    [[nodiscard]] SolutionBundle bundle(std::span<const double> x) const;
    /// Continuity rows of the cp method (empty for the knot method).
    [[nodiscard]] Vector continuity(const SolutionBundle& b) const;

private:
    const DaiProblem* p_;
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> widths_;
    std::vector<std::optional<ThetaChain>> chains_;
    std::size_t total_ = 0;
    Vector nodes_;
};

/// Flattened CPs of the builder output.
Vector inequality_cps(const InequalityBuilder& b, const SolutionBundle& bundle);

struct HullCheck {
    bool ok = true;
    std::size_t index = 0;  ///< of the largest entry when not ok
    double value = 0.0;     ///< largest entry (max CP value)
};

/// ok iff every entry <= tol.
HullCheck verify_hull(std::span<const double> g, double tol);

/// CP-sampled approximant of a non-polynomial function (see sample_to_cbp).
/// The hull guarantee then covers the approximant, not f.
CompositeBernstein approximate_nonpoly(const std::function<double(double)>& f, const KnotSequence& knots, int n);

struct ConstraintCheck {
    std::string label;
    double max_cp_value = 0.0;
    std::size_t max_index = 0;
    bool verified = false;
};

struct DaiSolution {
    std::string name;
    Vector x;
    SolutionBundle bundle;
    std::vector<ConstraintCheck> constraints;
    std::vector<DerivedCurve> derived;
    AuglagResult result;
    bool feasible = false;
};

inline constexpr double kDaiFeasibilityTol = 1e-8;

DaiSolution solve_dai(const DaiProblem& p, const SolverOptions& opts = {});

/// {name, feasible, unknowns: {name: cbp}, derived: [...], constraints: [{label,
/// max_cp_value, verified}], report: {...}}
nlohmann::ordered_json bundle_json(const DaiSolution& s);

/// Damped tracking problem on theta_x, theta_u (knot method, M = 3 each).
DaiProblem example5_problem(const Example5Params& prm = {});
/// Planar rod around an obstacle on theta_nu (M = n), theta_phi (M = n+1).
DaiProblem example6_problem(const Example6Params& prm = {});

/// Position CBPs (x and y, degree n+1) of the rod for a solved bundle.
std::array<CompositeBernstein, 2> example6_position(const SolutionBundle& b, const Example6Params& prm);

}  // namespace cbp
