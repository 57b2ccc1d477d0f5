#include "cbp/ode_problem.hpp"

#include "cbp/linalg.hpp"

#include <cmath>

namespace cbp {

namespace {

constexpr double kOverrideMatch = 1e-12;

bool finite_matrix(const DenseMatrix& m) {
    for (double v : m.data())
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace

const SingularOverride* OdeProblem::override_at(double s) const noexcept {
    for (const auto& o : overrides)
        if (std::abs(o.node - s) <= kOverrideMatch) return &o;
    return nullptr;
}

std::vector<Diagnostic> validate(const OdeProblem& p) {
    std::vector<Diagnostic> out;
    const auto r = static_cast<std::size_t>(std::max(p.order, 0));
    if (p.order < 1) out.push_back({"order", "derivative order must be >= 1"});
    if (!p.rhs) out.push_back({"rhs", "right-hand side evaluator is missing"});

    if (const auto* ic = std::get_if<InitialConditions>(&p.conditions)) {
        if (!p.domain.contains(ic->a))
            out.push_back({"condition_point", "initial-condition point a lies outside the domain"});
        if (ic->lambda.rows() != r || ic->lambda.cols() != r || ic->mu.size() != r) {
            out.push_back({"condition_count", "initial conditions must supply an r x r lambda and r mu values"});
        } else if (!finite_matrix(ic->lambda)) {
            out.push_back({"condition_finite", "lambda has non-finite entries"});
        } else if (matrix_rank(ic->lambda) < p.order) {
            out.push_back({"condition_rank", "initial-condition rows are linearly dependent"});
        }
    } else {
        const auto& bc = std::get<BoundaryConditions>(p.conditions);
        if (bc.alpha.rows() != r || bc.alpha.cols() != r || bc.beta.rows() != r || bc.beta.cols() != r ||
            bc.gamma.size() != r) {
            out.push_back({"condition_count", "boundary conditions must supply r x r alpha, beta and r gamma values"});
        } else if (!finite_matrix(bc.alpha) || !finite_matrix(bc.beta)) {
            out.push_back({"condition_finite", "alpha/beta have non-finite entries"});
        } else {
            DenseMatrix stacked(r, 2 * r);
            stacked.set_block(0, 0, bc.alpha);
            stacked.set_block(0, r, bc.beta);
            if (matrix_rank(stacked) < p.order)
                out.push_back({"condition_rank", "boundary-condition rows are linearly dependent"});
        }
    }
    for (const auto& o : p.overrides) {
        if (!p.domain.contains(o.node))
            out.push_back({"override_node", "singular override node lies outside the domain"});
        if (!o.residual) out.push_back({"override_residual", "singular override has no residual"});
    }
    return out;
}

NonFiniteRhs::NonFiniteRhs(std::size_t node_index, double node)
    : std::runtime_error("non-finite right-hand side at node " + std::to_string(node_index) +
                         " (s = " + std::to_string(node) + ")"),
      index_(node_index),
      node_(node) {}

Vector rhs_eval_vectorized(const OdeProblem& p, std::span<const double> nodes,
                           std::span<const Vector> derivs) {
    const auto r = static_cast<std::size_t>(p.order);
    if (derivs.size() < r) throw std::invalid_argument("rhs_eval_vectorized: need r derivative sequences");
    for (const auto& d : derivs)
        if (d.size() != nodes.size())
            throw std::invalid_argument("rhs_eval_vectorized: sequence length != node count");

    Vector out(nodes.size());
    std::vector<double> vals(r + 1);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        const double s = nodes[k];
        if (const auto* o = p.override_at(s)) {
            if (derivs.size() < r + 1)
                throw std::invalid_argument("rhs_eval_vectorized: override node needs x^(r) values");
            for (std::size_t l = 0; l <= r; ++l) vals[l] = derivs[l][k];
            out[k] = vals[r] - o->residual(vals);
        } else {
            for (std::size_t l = 0; l < r; ++l) vals[l] = derivs[l][k];
            out[k] = p.rhs(s, std::span<const double>(vals.data(), r));
        }
        if (!std::isfinite(out[k])) throw NonFiniteRhs(k, s);
    }
    return out;
}

double collocation_residual(const OdeProblem& p, double s, std::span<const double> all) {
    const auto r = static_cast<std::size_t>(p.order);
    double res;
    if (const auto* o = p.override_at(s))
        res = o->residual(all);
    else
        res = all[r] - p.rhs(s, all.first(r));
    if (!std::isfinite(res)) throw NonFiniteRhs(0, s);
    return res;
}

Vector condition_residuals(const ConditionSet& c, std::span<const double> at_a_or_s0,
                           std::span<const double> at_sf) {
    if (const auto* ic = std::get_if<InitialConditions>(&c)) {
        const std::size_t r = ic->mu.size();
        Vector out(r);
        for (std::size_t j = 0; j < r; ++j) {
            double acc = -ic->mu[j];
            for (std::size_t l = 0; l < r; ++l) acc += ic->lambda(j, l) * at_a_or_s0[l];
            out[j] = acc;
        }
        return out;
    }
    const auto& bc = std::get<BoundaryConditions>(c);
    const std::size_t r = bc.gamma.size();
    Vector out(r);
    for (std::size_t j = 0; j < r; ++j) {
        double acc = -bc.gamma[j];
        for (std::size_t l = 0; l < r; ++l) acc += bc.alpha(j, l) * at_a_or_s0[l] + bc.beta(j, l) * at_sf[l];
        out[j] = acc;
    }
    return out;
}

}  // namespace cbp
