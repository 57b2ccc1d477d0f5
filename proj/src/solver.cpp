#include "cbp/solver.hpp"

#include "cbp/linalg.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>

namespace cbp {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

bool all_finite(const Vector& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double half_sq_norm(const Vector& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return 0.5 * s;
}

// Gauss-Newton pieces: J^T J and J^T F.
void normal_equations(const DenseMatrix& j, const Vector& fx, DenseMatrix& jtj, Vector& jtf) {
    const std::size_t n = j.cols();
    jtj = DenseMatrix(n, n);
    jtf.assign(n, 0.0);
    for (std::size_t r = 0; r < j.rows(); ++r) {
        auto jr = j.row(r);
        for (std::size_t a = 0; a < n; ++a) {
            const double ja = jr[a];
            if (ja == 0.0) continue;
            jtf[a] += ja * fx[r];
            auto row = jtj.row(a);
            for (std::size_t b = 0; b < n; ++b) row[b] += ja * jr[b];
        }
    }
}

// Levenberg-Marquardt step with Marquardt diagonal scaling.
Vector lm_step(const DenseMatrix& jtj, const Vector& jtf, double lambda, double* cond = nullptr) {
    const std::size_t n = jtj.rows();
    double dmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, jtj(i, i));
    const double floor = std::max(1e-12 * dmax, 1e-30);
    DenseMatrix m = jtj;
    for (std::size_t i = 0; i < n; ++i) m(i, i) += lambda * std::max(jtj(i, i), floor);
    LuDecomposition lu(std::move(m));
    if (cond) *cond = lu.condition_estimate();
    if (lu.singular()) return {};
    Vector rhs(jtf);
    for (double& v : rhs) v = -v;
    return lu.solve(rhs);
}

Vector axpy(const Vector& x, double t, const Vector& dx) {
    Vector y(x);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += t * dx[i];
    return y;
}

}  // namespace

void SolverOptions::validate() const {
    if (!(tol > 0.0) || max_iters <= 0 || !(fd_step_scale > 0.0) || line_search_max_halvings <= 0 ||
        !(lm_lambda0 > 0.0))
        throw std::invalid_argument("SolverOptions: all options must be positive");
}

DenseMatrix fd_jacobian(const VectorFunction& f, const Vector& x, const SolverOptions& opts,
                        const Vector* fx) {
    const Vector base = fx ? *fx : f(x);
    if (!all_finite(base)) throw NonFiniteJacobian(0, "fd_jacobian: F is not finite at the base point");
    DenseMatrix j(base.size(), x.size());
    Vector xp(x);
    for (std::size_t c = 0; c < x.size(); ++c) {
        const double h = opts.fd_step_scale * std::max(1.0, std::abs(x[c]));
        xp[c] = x[c] + h;
        const double step = xp[c] - x[c];  // exactly representable step
        const Vector fp = f(xp);
        xp[c] = x[c];
        if (fp.size() != base.size()) throw std::logic_error("fd_jacobian: F changed output size");
        for (std::size_t r = 0; r < base.size(); ++r) {
            const double d = (fp[r] - base[r]) / step;
            if (!std::isfinite(d))
                throw NonFiniteJacobian(c, "fd_jacobian: non-finite column " + std::to_string(c));
            j(r, c) = d;
        }
    }
    return j;
}

SolveResult newton_solve(const VectorFunction& f, Vector x0, const SolverOptions& opts) {
    opts.validate();
    const auto start = Clock::now();
    SolveResult out{std::move(x0), {}};
    auto& rep = out.report;
    Vector fx = f(out.x);
    if (fx.size() != out.x.size()) throw std::invalid_argument("newton_solve: system is not square");
    double norm = inf_norm(fx);
    bool lm_fallback_used = false;
    std::optional<LuDecomposition> last_lu;

    while (true) {
        if (!std::isfinite(norm)) {
            rep.message = "residual is not finite";
            break;
        }
        if (norm <= opts.tol) {
            rep.converged = true;
            // One chord step with the last factorization; kept only if it helps.
            if (last_lu) {
                Vector dx = last_lu->solve(fx);
                Vector xn = axpy(out.x, -1.0, dx);
                Vector fn = f(xn);
                if (const double nn = inf_norm(fn); std::isfinite(nn) && nn < norm) {
                    out.x = std::move(xn);
                    norm = nn;
                }
            }
            break;
        }
        if (rep.iterations >= opts.max_iters) {
            rep.message = "max_iters exceeded";
            break;
        }
        const DenseMatrix j = fd_jacobian(f, out.x, opts, &fx);
        LuDecomposition lu(j);
        rep.jacobian_cond_estimate = lu.condition_estimate();
        Vector dx;
        if (lu.singular()) {
            if (lm_fallback_used) {
                rep.message = "singular Jacobian";
                break;
            }
            lm_fallback_used = true;
            DenseMatrix jtj;
            Vector jtf;
            normal_equations(j, fx, jtj, jtf);
            dx = lm_step(jtj, jtf, opts.lm_lambda0);
            if (dx.empty()) {
                rep.message = "singular Jacobian";
                break;
            }
        } else {
            dx = lu.solve(fx);
            for (double& v : dx) v = -v;
            last_lu = std::move(lu);
        }

        bool accepted = false;
        double t = 1.0;
        for (int h = 0; h <= opts.line_search_max_halvings; ++h, t *= 0.5) {
            Vector xn = axpy(out.x, t, dx);
            Vector fn = f(xn);
            const double nn = inf_norm(fn);
            if (std::isfinite(nn) && nn < norm) {
                out.x = std::move(xn);
                fx = std::move(fn);
                norm = nn;
                accepted = true;
                break;
            }
        }
        ++rep.iterations;
        if (!accepted) {
            rep.message = "line search failed to reduce the residual";
            break;
        }
    }
    rep.residual_inf = norm;
    rep.runtime_ms = elapsed_ms(start);
    return out;
}

SolveResult lm_solve(const VectorFunction& f, Vector x0, const SolverOptions& opts, const JacobianFunction& jac) {
    opts.validate();
    const auto start = Clock::now();
    SolveResult out{std::move(x0), {}};
    auto& rep = out.report;
    Vector fx = f(out.x);
    if (fx.size() < out.x.size()) throw std::invalid_argument("lm_solve: requires rows >= cols");
    double cost = half_sq_norm(fx);
    double lambda = opts.lm_lambda0;

    while (std::isfinite(cost)) {
        if (inf_norm(fx) <= opts.tol) {
            rep.converged = true;
            break;
        }
        if (rep.iterations >= opts.max_iters) {
            rep.message = "max_iters exceeded";
            break;
        }
        const DenseMatrix j = jac ? jac(out.x, fx) : fd_jacobian(f, out.x, opts, &fx);
        if (j.rows() != fx.size() || j.cols() != out.x.size())
            throw std::logic_error("lm_solve: Jacobian has the wrong shape");
        DenseMatrix jtj;
        Vector jtf;
        normal_equations(j, fx, jtj, jtf);
        if (inf_norm(jtf) <= opts.tol) {
            rep.converged = true;
            rep.message = "gradient below tolerance";
            break;
        }
        ++rep.iterations;
        bool accepted = false;
        Vector dx;
        while (lambda < 1e20) {
            dx = lm_step(jtj, jtf, lambda, &rep.jacobian_cond_estimate);
            if (!dx.empty()) {
                Vector xn = axpy(out.x, 1.0, dx);
                Vector fn = f(xn);
                const double cn = half_sq_norm(fn);
                if (std::isfinite(cn) && cn < cost) {
                    out.x = std::move(xn);
                    fx = std::move(fn);
                    cost = cn;
                    lambda = std::max(lambda / 10.0, 1e-15);
                    accepted = true;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if (!accepted) {
            // No damping reduces the cost: stationary to working precision.
            rep.converged = true;
            rep.message = "no descent step found (stationary)";
            break;
        }
        if (inf_norm(dx) <= opts.tol * (1.0 + inf_norm(out.x))) {
            rep.converged = true;
            rep.message = "step below tolerance";
            break;
        }
    }
    rep.residual_inf = inf_norm(fx);
    if (!std::isfinite(rep.residual_inf)) rep.converged = false;
    rep.runtime_ms = elapsed_ms(start);
    return out;
}

AuglagResult auglag_solve(const VectorFunction& f_eq, const VectorFunction& g_ineq, Vector x0,
                          const SolverOptions& opts) {
    opts.validate();
    constexpr int kMaxOuter = 10;
    constexpr double kFeasTol = 1e-8;
    const auto start = Clock::now();

    AuglagResult out;
    out.x = std::move(x0);
    if (!g_ineq) {
        auto r = lm_solve(f_eq, out.x, opts);
        out.x = std::move(r.x);
        out.report = r.report;
        out.equality_inf = r.report.residual_inf;
        out.feasible = r.report.converged && out.equality_inf <= opts.tol;
        out.report.converged = out.feasible;
        return out;
    }

    Vector mu(g_ineq(out.x).size(), 0.0);
    Vector lam(f_eq(out.x).size(), 0.0);
    double rho = 10.0;

    for (int outer = 0; outer < kMaxOuter; ++outer) {
        const double w = std::sqrt(rho);
        const VectorFunction inner = [&](const Vector& x) {
            Vector r = f_eq(x);
            for (std::size_t i = 0; i < r.size(); ++i) r[i] = w * (r[i] + lam[i] / rho);
            const Vector g = g_ineq(x);
            r.reserve(r.size() + g.size());
            for (std::size_t i = 0; i < g.size(); ++i) r.push_back(w * std::max(0.0, mu[i] / rho + g[i]));
            return r;
        };
        const JacobianFunction inner_jac = [&](const Vector& x, const Vector& rx) {
            const VectorFunction both = [&](const Vector& y) {
                Vector v = f_eq(y);
                const Vector g = g_ineq(y);
                v.insert(v.end(), g.begin(), g.end());
                return v;
            };
            DenseMatrix j = fd_jacobian(both, x, opts);
            const std::size_t neq = rx.size() - mu.size();
            for (std::size_t i = 0; i < neq; ++i)
                for (double& v : j.row(i)) v *= w;
            for (std::size_t i = neq; i < j.rows(); ++i) {
                const double s = rx[i] > 0.0 ? w : 0.0;
                for (double& v : j.row(i)) v *= s;
            }
            return j;
        };
        SolverOptions inner_opts = opts;
        inner_opts.max_iters = std::max(opts.max_iters, 200);
        inner_opts.tol = 1e-3 * opts.tol;
        auto r = lm_solve(inner, out.x, inner_opts, inner_jac);
        out.x = std::move(r.x);
        out.report.iterations += r.report.iterations;
        out.report.jacobian_cond_estimate = r.report.jacobian_cond_estimate;

        const Vector g = g_ineq(out.x);
        const auto worst = std::max_element(g.begin(), g.end());
        out.max_violation = g.empty() ? 0.0 : *worst;
        out.violation_index = g.empty() ? 0 : static_cast<std::size_t>(worst - g.begin());
        out.equality_inf = inf_norm(f_eq(out.x));
        if (out.equality_inf <= opts.tol && out.max_violation <= kFeasTol) {
            out.feasible = true;
            break;
        }
        for (std::size_t i = 0; i < g.size(); ++i) mu[i] = std::max(0.0, mu[i] + rho * g[i]);
        const Vector fe = f_eq(out.x);
        for (std::size_t i = 0; i < fe.size(); ++i) lam[i] += rho * fe[i];
        if (out.max_violation > kFeasTol) rho *= 10.0;
    }
    out.report.converged = out.feasible;
    out.report.residual_inf = std::max(out.equality_inf, std::max(0.0, out.max_violation));
    out.report.runtime_ms = elapsed_ms(start);
    if (!out.feasible)
        out.report.message = "infeasible: max violation " + std::to_string(out.max_violation) +
                             " at inequality index " + std::to_string(out.violation_index) +
                             ", equality residual " + std::to_string(out.equality_inf);
    return out;
}

}  // namespace cbp
