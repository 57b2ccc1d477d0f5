#include "cbp/knot_collocation.hpp"

#include "cbp/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cbp {

namespace {

void require_level(int level, int m_order, const char* who) {
    if (m_order < 1) throw std::invalid_argument(std::string(who) + ": M must be >= 1");
    if (level < 0 || level >= m_order)
        throw std::invalid_argument(std::string(who) + ": level must lie in [0, M-1]");
}

bool at_left_end(const OdeProblem& p, double a) {
    return std::abs(a - p.domain.s0()) <= 1e-14 * (1.0 + std::abs(a));
}

}  // namespace

Vector ThetaVector::flat() const {
    Vector out(deriv_cps);
    out.insert(out.end(), init_conds.begin(), init_conds.end());
    return out;
}

ThetaVector ThetaVector::from_flat(std::span<const double> theta, int segments, int m_order) {
    if (theta.size() != static_cast<std::size_t>(segments + m_order))
        throw std::invalid_argument("ThetaVector: expected K+M entries");
    return {Vector(theta.begin(), theta.begin() + segments), Vector(theta.begin() + segments, theta.end())};
}

DenseMatrix zeta_matrix(int level, const KnotSequence& knots, int m_order) {
    require_level(level, m_order, "zeta_matrix");
    const int K = knots.segments();
    const int n = level;
    const std::size_t in_block = n + 1;
    const std::size_t out_block = n + 2;
    DenseMatrix z(K * in_block + m_order, K * out_block + m_order);
    for (int i = 0; i < K; ++i) {
        z.set_block(i * in_block, i * out_block, int_matrix_gamma(n, knots.segment(i)));
        const double shift = knots.width(i) / (n + 1);
        for (int j = i + 1; j < K; ++j)
            for (std::size_t a = 0; a < in_block; ++a)
                for (std::size_t b = 0; b < out_block; ++b) z(i * in_block + a, j * out_block + b) = shift;
    }
    // The constant of the derivative being produced, X_0^(M-n-1), is added to every CP.
    const std::size_t psi_row = K * in_block + (m_order - n - 1);
    for (std::size_t c = 0; c < K * out_block; ++c) z(psi_row, c) = 1.0;
    for (int q = 0; q < m_order; ++q) z(K * in_block + q, K * out_block + q) = 1.0;
    return z;
}

DenseMatrix p_matrix(int level, const KnotSequence& knots, int m_order) {
    if (level < 0 || level > m_order) throw std::invalid_argument("p_matrix: level must lie in [0, M]");
    const int K = knots.segments();
    const std::size_t block = level + 1;
    DenseMatrix p(K * block + m_order, K + 1);
    p(0, 0) = 1.0;
    for (int k = 1; k <= K; ++k) p(k * block - 1, k) = 1.0;
    return p;
}

ThetaChain::ThetaChain(int m_order, KnotSequence knots) : m_(m_order), knots_(std::move(knots)) {
    if (m_ < 1) throw std::invalid_argument("ThetaChain: M must be >= 1");
    if (m_ > kMaxDegree) throw std::invalid_argument("ThetaChain: M too large");
    lifts_.push_back(DenseMatrix::identity(unknowns()));
    for (int n = 0; n < m_; ++n) {
        zetas_.push_back(zeta_matrix(n, knots_, m_));
        lifts_.push_back(lifts_.back() * zetas_.back());
    }
    for (int n = 0; n <= m_; ++n) {
        extractors_.push_back(p_matrix(n, knots_, m_));
        transforms_.push_back(lifts_[n] * extractors_.back());
    }
}

std::size_t ThetaChain::unknowns() const noexcept {
    return static_cast<std::size_t>(knots_.segments() + m_);
}

Vector ThetaChain::knot_values(std::span<const double> theta, int derivative) const {
    if (derivative < 0 || derivative > m_) throw std::out_of_range("ThetaChain: derivative outside [0, M]");
    return row_times(theta, transform(derivative));
}

ThetaChain t_chain(int m_order, int r, const KnotSequence& knots) {
    if (m_order != r + 1 && m_order != r + 2)
        throw std::invalid_argument("t_chain: M must be r+1 or r+2");
    return ThetaChain(m_order, knots);
}

CompositeBernstein reconstruct_cbp(std::span<const double> theta, int level, const ThetaChain& chain) {
    if (level < 0 || level > chain.m_order()) throw std::out_of_range("reconstruct_cbp: level outside [0, M]");
    if (theta.size() != chain.unknowns()) throw std::invalid_argument("reconstruct_cbp: expected K+M entries");
    Vector lifted = row_times(theta, chain.lift(level));
    lifted.resize(static_cast<std::size_t>(chain.segments()) * (level + 1));
    return {chain.knots(), level, std::move(lifted)};
}

double extra_condition_node(const KnotSequence& knots) { return knots[0] + 0.5 * knots.width(0); }

Vector assemble_knot_residual(std::span<const double> theta, const OdeProblem& problem,
                              const ThetaChain& chain) {
    const int r = problem.order;
    const int M = chain.m_order();
    if (M != r + 1 && M != r + 2) throw std::invalid_argument("assemble_knot_residual: M must be r+1 or r+2");
    const int K = chain.segments();
    const auto& knots = chain.knots();

    std::vector<Vector> kv;
    for (int d = 0; d <= r; ++d) kv.push_back(chain.knot_values(theta, d));

    Vector out;
    out.reserve(chain.unknowns());
    std::vector<double> all(r + 1);
    for (int k = 0; k <= K; ++k) {
        for (int d = 0; d <= r; ++d) all[d] = kv[d][k];
        try {
            out.push_back(collocation_residual(problem, knots[k], all));
        } catch (const NonFiniteRhs&) {
            throw NonFiniteRhs(k, knots[k]);
        }
    }

    std::vector<double> left(r);
    std::vector<double> right(r);
    if (const auto* ic = std::get_if<InitialConditions>(&problem.conditions)) {
        for (int l = 0; l < r; ++l)
            left[l] = at_left_end(problem, ic->a) ? kv[l].front() : reconstruct_cbp(theta, M - l, chain)(ic->a);
    } else {
        for (int l = 0; l < r; ++l) {
            left[l] = kv[l].front();
            right[l] = kv[l].back();
        }
    }
    const auto cond = condition_residuals(problem.conditions, left, right);
    out.insert(out.end(), cond.begin(), cond.end());

    if (M == r + 2) {
        const double sigma = extra_condition_node(knots);
        for (int d = 0; d <= r; ++d) all[d] = reconstruct_cbp(theta, M - d, chain)(sigma);
        out.push_back(collocation_residual(problem, sigma, all));
    }
    return out;
}

Vector knot_initial_guess(const OdeProblem& problem, const ThetaChain& chain) {
    const int K = chain.segments();
    const int r = problem.order;
    Vector theta(chain.unknowns(), 0.0);
    if (const auto* ic = std::get_if<InitialConditions>(&problem.conditions)) {
        LuDecomposition lu(ic->lambda);
        if (!lu.singular()) {
            const auto y = lu.solve(ic->mu);
            for (int l = 0; l < r; ++l) theta[K + l] = y[l];
        }
        return theta;
    }
    // Boundary data: affine fit through the rows that only touch x and x'.
    const auto& bc = std::get<BoundaryConditions>(problem.conditions);
    const double L = problem.domain.length();
    DenseMatrix ata(2, 2);
    Vector atb(2, 0.0);
    for (std::size_t j = 0; j < bc.gamma.size(); ++j) {
        bool low = true;
        for (std::size_t l = 2; l < bc.alpha.cols(); ++l) low = low && bc.alpha(j, l) == 0.0 && bc.beta(j, l) == 0.0;
        if (!low) continue;
        const double a1 = bc.alpha.cols() > 1 ? bc.alpha(j, 1) : 0.0;
        const double b1 = bc.beta.cols() > 1 ? bc.beta(j, 1) : 0.0;
        const double row[2] = {bc.alpha(j, 0) + bc.beta(j, 0), bc.beta(j, 0) * L + a1 + b1};
        for (int a = 0; a < 2; ++a) {
            atb[a] += row[a] * bc.gamma[j];
            for (int b = 0; b < 2; ++b) ata(a, b) += row[a] * row[b];
        }
    }
    if (LuDecomposition lu(ata); !lu.singular()) {
        const auto c = lu.solve(atb);
        theta[K] = c[0];
        if (chain.m_order() > 1) theta[K + 1] = c[1];
    } else if (ata(0, 0) > 0.0) {
        theta[K] = atb[0] / ata(0, 0);
    }
    return theta;
}

KnotSolution solve_knot(const OdeProblem& problem, const KnotSequence& knots, int m_order,
                        const SolverOptions& opts) {
    if (auto d = validate(problem); !d.empty())
        throw std::invalid_argument("solve_knot: invalid problem (" + d.front().rule + "): " + d.front().message);
    if (std::abs(knots.front() - problem.domain.s0()) > 1e-12 ||
        std::abs(knots.back() - problem.domain.sf()) > 1e-12)
        throw std::invalid_argument("solve_knot: knots must span the problem domain");
    const ThetaChain chain = t_chain(m_order, problem.order, knots);
    auto res = newton_solve([&](const Vector& th) { return assemble_knot_residual(th, problem, chain); },
                            knot_initial_guess(problem, chain), opts);
    KnotSolution out{reconstruct_cbp(res.x, m_order, chain), res.x, res.report, m_order, knots.segments(),
                     chain.unknowns()};
    return out;
}

nlohmann::ordered_json report_json(const KnotSolution& s) {
    nlohmann::ordered_json j;
    j["method"] = "knot";
    j["M"] = s.m_order;
    j["K"] = s.segments;
    j["unknowns"] = s.unknowns;
    j["iterations"] = s.report.iterations;
    j["residual_inf"] = s.report.residual_inf;
    j["runtime_ms"] = s.report.runtime_ms;
    j["converged"] = s.report.converged;
    return j;
}

}  // namespace cbp
