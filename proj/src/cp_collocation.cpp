#include "cbp/cp_collocation.hpp"

#include "cbp/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace cbp {

namespace {

double capped_scale(double h_over_n, int power) { return std::min(1.0, std::pow(h_over_n, power)); }

// Largest derivative order carrying a nonzero coefficient in condition row j.
int condition_row_order(const ConditionSet& c, std::size_t j) {
    int top = 0;
    if (const auto* ic = std::get_if<InitialConditions>(&c)) {
        for (std::size_t l = 0; l < ic->lambda.cols(); ++l)
            if (ic->lambda(j, l) != 0.0) top = static_cast<int>(l);
    } else {
        const auto& bc = std::get<BoundaryConditions>(c);
        for (std::size_t l = 0; l < bc.alpha.cols(); ++l)
            if (bc.alpha(j, l) != 0.0 || bc.beta(j, l) != 0.0) top = static_cast<int>(l);
    }
    return top;
}

bool at_left_end(const OdeProblem& p, double a) { return std::abs(a - p.domain.s0()) <= 1e-14 * (1.0 + std::abs(a)); }

}  // namespace

CpSystem::CpSystem(OdeProblem problem, int n, KnotSequence knots)
    : problem_(std::move(problem)), n_(n), r_(problem_.order), knots_(std::move(knots)) {
    if (auto d = validate(problem_); !d.empty())
        throw std::invalid_argument("CpSystem: invalid problem (" + d.front().rule + "): " + d.front().message);
    if (n_ <= r_)
        throw std::invalid_argument("CpSystem: degree n must exceed the ODE order r (n > r)");
    if (std::abs(knots_.front() - problem_.domain.s0()) > 1e-12 ||
        std::abs(knots_.back() - problem_.domain.sf()) > 1e-12)
        throw std::invalid_argument("CpSystem: knots must span the problem domain");
    grid_ = collocation_grid(n_, knots_);

    const int K = knots_.segments();
    powers_.resize(K);
    for (int i = 0; i < K; ++i) {
        const DenseMatrix d = diff_matrix_D(n_, knots_.segment(i));
        powers_[i].push_back(DenseMatrix::identity(n_ + 1));
        for (int l = 1; l <= r_; ++l) powers_[i].push_back(powers_[i].back() * d);
    }
    plan_ = square_system(*this);

    weights_.reserve(raw_rows());
    for (int i = 0; i < K; ++i)
        for (int j = 0; j <= n_; ++j) weights_.push_back(capped_scale(knots_.width(i) / n_, r_));
    double h_end = knots_.width(0);
    if (const auto* ic = std::get_if<InitialConditions>(&problem_.conditions))
        h_end = knots_.width(knots_.locate(ic->a));
    else
        h_end = std::min(knots_.width(0), knots_.width(K - 1));
    for (int j = 0; j < r_; ++j)
        weights_.push_back(capped_scale(h_end / n_, condition_row_order(problem_.conditions, j)));
    for (int i = 1; i < K; ++i)
        for (int l = 0; l < r_; ++l)
            weights_.push_back(capped_scale(std::min(knots_.width(i - 1), knots_.width(i)) / n_, l));

    if (raw_rows() - plan_.removed.size() != unknowns())
        throw std::logic_error("CpSystem: squared system is not square");
}

std::size_t CpSystem::unknowns() const noexcept {
    return static_cast<std::size_t>(knots_.segments()) * (n_ + 1);
}

std::size_t CpSystem::raw_rows() const noexcept {
    return unknowns() + static_cast<std::size_t>(r_) * knots_.segments();
}

Vector CpSystem::derivative_cps(std::span<const double> xbar, int l) const {
    if (xbar.size() != unknowns()) throw std::invalid_argument("CpSystem: expected K(n+1) control points");
    if (l < 0 || l > r_) throw std::out_of_range("CpSystem::derivative_cps: order outside [0, r]");
    if (l == 0) return Vector(xbar.begin(), xbar.end());
    Vector out(xbar.size());
    const std::size_t m = n_ + 1;
    for (int i = 0; i < segments(); ++i) {
        const auto seg = row_times(xbar.subspan(i * m, m), powers_[i][l]);
        std::copy(seg.begin(), seg.end(), out.begin() + i * m);
    }
    return out;
}

SquaringPlan square_system(const CpSystem& sys) {
    const int n = sys.degree();
    const int r = sys.order();
    const int K = sys.segments();
    if (n <= r) throw std::invalid_argument("square_system: requires n > r");
    const std::size_t m = n + 1;
    SquaringPlan plan;
    if (sys.problem().is_initial_value()) {
        for (int i = 0; i < K; ++i)
            for (int j = 0; j < r; ++j) plan.removed.push_back(i * m + j);
    } else {
        // Split per segment, not only at the two ends: removing from the first and
        // last segment alone leaves a system whose conditioning grows with K.
        const int lead = (r + 1) / 2;
        const int trail = r / 2;
        for (int i = 0; i < K; ++i) {
            for (int j = 0; j < lead; ++j) plan.removed.push_back(i * m + j);
            for (int j = 0; j < trail; ++j) plan.removed.push_back(i * m + n - j);
        }
    }
    std::sort(plan.removed.begin(), plan.removed.end());
    if (std::adjacent_find(plan.removed.begin(), plan.removed.end()) != plan.removed.end())
        throw std::logic_error("square_system: duplicate removal");
    if (plan.removed.size() != static_cast<std::size_t>(r) * K)
        throw std::logic_error("square_system: removal count must be rK");
    return plan;
}

Vector assemble_residual(const CpSystem& sys, std::span<const double> xbar) {
    const auto& p = sys.problem();
    const int r = sys.order();
    const int n = sys.degree();
    const int K = sys.segments();
    std::vector<Vector> d;
    for (int l = 0; l <= r; ++l) d.push_back(sys.derivative_cps(xbar, l));

    Vector out;
    out.reserve(sys.raw_rows());
    std::vector<double> all(r + 1);
    const auto& nodes = sys.grid().nodes;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        for (int l = 0; l <= r; ++l) all[l] = d[l][k];
        try {
            out.push_back(collocation_residual(p, nodes[k], all));
        } catch (const NonFiniteRhs&) {
            throw NonFiniteRhs(k, nodes[k]);
        }
    }

    std::vector<double> left(r);
    std::vector<double> right(r);
    if (const auto* ic = std::get_if<InitialConditions>(&p.conditions)) {
        for (int l = 0; l < r; ++l)
            left[l] = at_left_end(p, ic->a) ? d[l].front()
                                            : CompositeBernstein(sys.knots(), n, d[l])(ic->a);
    } else {
        for (int l = 0; l < r; ++l) {
            left[l] = d[l].front();
            right[l] = d[l].back();
        }
    }
    const auto cond = condition_residuals(p.conditions, left, right);
    out.insert(out.end(), cond.begin(), cond.end());

    const std::size_t m = n + 1;
    for (int i = 1; i < K; ++i)
        for (int l = 0; l < r; ++l) out.push_back(d[l][i * m - 1] - d[l][i * m]);
    return out;
}

Vector weighted_full_residual(const CpSystem& sys, std::span<const double> xbar) {
    Vector raw = assemble_residual(sys, xbar);
    const auto& w = sys.row_weights();
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] *= w[i];
    return raw;
}

Vector squared_residual(const CpSystem& sys, std::span<const double> xbar) {
    const Vector full = weighted_full_residual(sys, xbar);
    const auto& removed = sys.plan().removed;
    Vector out;
    out.reserve(sys.unknowns());
    std::size_t next = 0;
    for (std::size_t i = 0; i < full.size(); ++i) {
        if (next < removed.size() && removed[next] == i) {
            ++next;
            continue;
        }
        out.push_back(full[i]);
    }
    return out;
}

Vector continuity_residual(const CpSystem& sys, std::span<const double> xbar) {
    const Vector full = weighted_full_residual(sys, xbar);
    const std::size_t first = sys.collocation_rows() + sys.order();
    return Vector(full.begin() + first, full.end());
}

Vector cp_initial_guess(const CpSystem& sys) {
    // Least-squares affine fit c0 + c1 (s - s0) to the rows that only involve x and x'.
    const auto& p = sys.problem();
    const double s0 = p.domain.s0();
    const double sf = p.domain.sf();
    std::vector<std::array<double, 3>> rows;  // coefficient of c0, c1, rhs
    if (const auto* ic = std::get_if<InitialConditions>(&p.conditions)) {
        for (std::size_t j = 0; j < ic->mu.size(); ++j) {
            if (condition_row_order(p.conditions, j) > 1) continue;
            const double l0 = ic->lambda(j, 0);
            const double l1 = ic->lambda.cols() > 1 ? ic->lambda(j, 1) : 0.0;
            rows.push_back({l0, l0 * (ic->a - s0) + l1, ic->mu[j]});
        }
    } else {
        const auto& bc = std::get<BoundaryConditions>(p.conditions);
        for (std::size_t j = 0; j < bc.gamma.size(); ++j) {
            if (condition_row_order(p.conditions, j) > 1) continue;
            const double a0 = bc.alpha(j, 0), b0 = bc.beta(j, 0);
            const double a1 = bc.alpha.cols() > 1 ? bc.alpha(j, 1) : 0.0;
            const double b1 = bc.beta.cols() > 1 ? bc.beta(j, 1) : 0.0;
            rows.push_back({a0 + b0, b0 * (sf - s0) + a1 + b1, bc.gamma[j]});
        }
    }
    double c0 = 0.0;
    double c1 = 0.0;
    DenseMatrix ata(2, 2);
    Vector atb(2, 0.0);
    for (const auto& row : rows) {
        for (int a = 0; a < 2; ++a) {
            atb[a] += row[a] * row[2];
            for (int b = 0; b < 2; ++b) ata(a, b) += row[a] * row[b];
        }
    }
    if (LuDecomposition lu(ata); !lu.singular()) {
        const auto c = lu.solve(atb);
        c0 = c[0];
        c1 = c[1];
    } else if (ata(0, 0) > 0.0) {
        c0 = atb[0] / ata(0, 0);
    } else if (ata(1, 1) > 0.0) {
        c1 = atb[1] / ata(1, 1);
    }
    Vector x;
    x.reserve(sys.unknowns());
    for (double s : sys.grid().nodes) x.push_back(c0 + c1 * (s - s0));
    return x;
}

CpSolution solve_cp(const OdeProblem& problem, int n, const KnotSequence& knots, const CpOptions& opts) {
    const CpSystem sys(problem, n, knots);
    SolveResult res;
    if (opts.least_squares) {
        res = lm_solve([&](const Vector& x) { return weighted_full_residual(sys, x); }, cp_initial_guess(sys),
                       opts.solver);
    } else {
        res = newton_solve([&](const Vector& x) { return squared_residual(sys, x); }, cp_initial_guess(sys),
                           opts.solver);
    }
    CpSolution out{CompositeBernstein(knots, n, res.x), res.report, n, knots.segments(), sys.unknowns(), 0.0};
    out.continuity_inf = inf_norm(continuity_residual(sys, res.x));
    if (out.report.converged && out.continuity_inf > opts.solver.tol) {
        out.report.converged = false;
        out.report.message = "continuity re-check failed";
    }
    return out;
}

nlohmann::ordered_json report_json(const CpSolution& s) {
    nlohmann::ordered_json j;
    j["method"] = "cp";
    j["n"] = s.n;
    j["K"] = s.segments;
    j["iterations"] = s.report.iterations;
    j["residual_inf"] = s.report.residual_inf;
    j["runtime_ms"] = s.report.runtime_ms;
    j["converged"] = s.report.converged;
    return j;
}

}  // namespace cbp
