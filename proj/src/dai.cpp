#include "cbp/dai.hpp"

#include "cbp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace cbp {

namespace {

Vector knot_cps(const CompositeBernstein& x) {
    Vector out;
    out.reserve(x.segments() + 1);
    for (int i = 0; i < x.segments(); ++i) out.push_back(x.segment_cps(i).front());
    out.push_back(x.segment_cps(x.segments() - 1).back());
    return out;
}

void append(Vector& dst, const Vector& src) { dst.insert(dst.end(), src.begin(), src.end()); }

// Least-squares theta whose knot values of X^(d) match the given targets.
Vector fit_theta(const ThetaChain& chain, const std::vector<std::pair<int, Vector>>& targets) {
    const std::size_t n = chain.unknowns();
    DenseMatrix ata(n, n);
    Vector atb(n, 0.0);
    for (const auto& [d, y] : targets) {
        const DenseMatrix& t = chain.transform(d);
        for (std::size_t k = 0; k < t.cols(); ++k)
            for (std::size_t a = 0; a < n; ++a) {
                if (t(a, k) == 0.0) continue;
                atb[a] += t(a, k) * y[k];
                for (std::size_t b = 0; b < n; ++b) ata(a, b) += t(a, k) * t(b, k);
            }
    }
    double dmax = 0.0;
    for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, ata(i, i));
    for (std::size_t i = 0; i < n; ++i) ata(i, i) += 1e-10 * std::max(dmax, 1.0);
    LuDecomposition lu(ata);
    if (lu.singular()) return Vector(n, 0.0);
    return lu.solve(atb);
}

}  // namespace

std::size_t SolutionBundle::index(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    throw std::out_of_range("SolutionBundle: unknown '" + std::string(name) + "'");
}

const CompositeBernstein& SolutionBundle::cbp(std::string_view name, int derivative) const {
    const auto& v = cbps_[index(name)];
    if (derivative < 0 || derivative >= static_cast<int>(v.size()))
        throw std::out_of_range("SolutionBundle: derivative outside [0, order]");
    return v[derivative];
}

const Vector& SolutionBundle::node_values(std::string_view name, int derivative) const {
    const auto& v = node_values_[index(name)];
    if (derivative < 0 || derivative >= static_cast<int>(v.size()))
        throw std::out_of_range("SolutionBundle: derivative outside [0, order]");
    return v[derivative];
}

DaiLayout::DaiLayout(const DaiProblem& p) : p_(&p) {
    if (p.unknowns.empty()) throw std::invalid_argument("DaiProblem: no unknowns");
    if (!p.equalities) throw std::invalid_argument("DaiProblem: no equality builder");
    const int K = p.knots.segments();
    for (const auto& u : p.unknowns) {
        if (u.order < 1) throw std::invalid_argument("DaiProblem: order of '" + u.name + "' must be >= 1");
        offsets_.push_back(total_);
        if (p.method == DaiMethod::knot) {
            chains_.emplace_back(ThetaChain(u.order, p.knots));
            widths_.push_back(static_cast<std::size_t>(K + u.order));
        } else {
            if (p.cp_degree < u.order)
                throw std::invalid_argument("DaiProblem: cp degree must be >= order of '" + u.name + "'");
            chains_.emplace_back(std::nullopt);
            widths_.push_back(static_cast<std::size_t>(K) * (p.cp_degree + 1));
        }
        total_ += widths_.back();
    }
    if (p.method == DaiMethod::cp && p.strict)
        nodes_ = collocation_grid(p.cp_degree, p.knots).nodes;
    else
        nodes_ = p.knots.knots();
    if (!p.initial_guess.empty() && p.initial_guess.size() != total_)
        throw std::invalid_argument("DaiProblem: initial guess has the wrong length");
}

SolutionBundle DaiLayout::bundle(std::span<const double> x) const {
    if (x.size() != total_) throw std::invalid_argument("DaiLayout: decision vector has the wrong length");
    SolutionBundle b;
    b.knots_ = p_->knots;
    b.nodes_ = nodes_;
    for (std::size_t u = 0; u < p_->unknowns.size(); ++u) {
        const auto& unk = p_->unknowns[u];
        const auto slice = x.subspan(offsets_[u], widths_[u]);
        b.names_.push_back(unk.name);
        b.orders_.push_back(unk.order);
        std::vector<CompositeBernstein> cbps;
        std::vector<Vector> values;
        if (p_->method == DaiMethod::knot) {
            const ThetaChain& ch = *chains_[u];
            for (int d = 0; d <= unk.order; ++d) {
                cbps.push_back(reconstruct_cbp(slice, unk.order - d, ch));
                values.push_back(ch.knot_values(slice, d));
            }
        } else {
            cbps.emplace_back(p_->knots, p_->cp_degree, Vector(slice.begin(), slice.end()));
            for (int d = 1; d <= unk.order; ++d) cbps.push_back(elevate(derivative(cbps.back()), p_->cp_degree));
            for (const auto& c : cbps) values.push_back(p_->strict ? c.flat() : knot_cps(c));
        }
        b.cbps_.push_back(std::move(cbps));
        b.node_values_.push_back(std::move(values));
    }
    return b;
}

Vector DaiLayout::continuity(const SolutionBundle& b) const {
    Vector out;
    if (p_->method == DaiMethod::knot) return out;
    const auto& knots = p_->knots;
    const int n = p_->cp_degree;
    for (const auto& unk : p_->unknowns)
        for (int i = 1; i < knots.segments(); ++i)
            for (int l = 0; l < unk.order; ++l) {
                const auto& c = b.cbp(unk.name, l);
                const double w = std::min(1.0, std::pow(std::min(knots.width(i - 1), knots.width(i)) / n, l));
                out.push_back(w * (c.segment_cps(i - 1).back() - c.segment_cps(i).front()));
            }
    return out;
}

Vector inequality_cps(const InequalityBuilder& b, const SolutionBundle& bundle) {
    const CompositeBernstein g = b.builder(bundle);
    if (!(g.knots() == bundle.knots()))
        throw std::invalid_argument("inequality_cps: builder '" + b.label + "' changed the knot sequence");
    return g.flat();
}

HullCheck verify_hull(std::span<const double> g, double tol) {
    HullCheck out;
    if (g.empty()) return out;
    const auto it = std::max_element(g.begin(), g.end(), [](double a, double b) {
        return a < b || std::isnan(b);
    });
    out.index = static_cast<std::size_t>(it - g.begin());
    out.value = *it;
    out.ok = *it <= tol;  // NaN fails
    return out;
}

CompositeBernstein approximate_nonpoly(const std::function<double(double)>& f, const KnotSequence& knots, int n) {
    return sample_to_cbp(f, knots, n);
}

DaiSolution solve_dai(const DaiProblem& p, const SolverOptions& opts) {
    const DaiLayout layout(p);
    const auto f_eq = [&](const Vector& x) {
        const auto b = layout.bundle(x);
        Vector r = p.equalities(b);
        append(r, layout.continuity(b));
        return r;
    };
    VectorFunction g_ineq;
    if (!p.inequalities.empty()) {
        g_ineq = [&](const Vector& x) {
            const auto b = layout.bundle(x);
            Vector g;
            for (const auto& ib : p.inequalities) append(g, inequality_cps(ib, b));
            return g;
        };
    }
    Vector x0 = p.initial_guess.empty() ? Vector(layout.unknowns(), 0.0) : p.initial_guess;
    auto res = auglag_solve(f_eq, g_ineq, std::move(x0), opts);

    DaiSolution out{p.name, res.x, layout.bundle(res.x), {}, {}, std::move(res), false};
    bool all_ok = true;
    for (const auto& ib : p.inequalities) {
        const auto chk = verify_hull(inequality_cps(ib, out.bundle), kDaiFeasibilityTol);
        out.constraints.push_back({ib.label, chk.value, chk.index, chk.ok});
        all_ok = all_ok && chk.ok;
    }
    if (p.derived) out.derived = p.derived(out.bundle);
    out.feasible = out.result.feasible && all_ok;
    return out;
}

nlohmann::ordered_json bundle_json(const DaiSolution& s) {
    nlohmann::ordered_json j;
    j["name"] = s.name;
    j["feasible"] = s.feasible;
    auto& unk = j["unknowns"] = nlohmann::ordered_json::object();
    for (const auto& name : s.bundle.names()) unk[name] = to_json(s.bundle.cbp(name));
    j["derived"] = nlohmann::ordered_json::array();
    for (const auto& d : s.derived) {
        nlohmann::ordered_json e;
        e["name"] = d.name;
        e["approximation"] = d.approximation;
        e["cbp"] = to_json(d.curve);
        j["derived"].push_back(std::move(e));
    }
    auto& cons = j["constraints"] = nlohmann::ordered_json::array();
    for (const auto& c : s.constraints)
        cons.push_back({{"label", c.label}, {"max_cp_value", c.max_cp_value}, {"verified", c.verified}});
    j["report"] = {{"iterations", s.result.report.iterations},
                   {"equality_inf", s.result.equality_inf},
                   {"max_violation", s.result.max_violation},
                   {"runtime_ms", s.result.report.runtime_ms},
                   {"converged", s.result.report.converged},
                   {"message", s.result.report.message}};
    return j;
}

DaiProblem example5_problem(const Example5Params& prm) {
    if (prm.segments < 1 || prm.m_order < 1 || !(prm.t_final > 0.0))
        throw std::invalid_argument("example5: invalid parameters");
    DaiProblem p;
    p.name = "example5";
    p.knots = KnotSequence::equidistant(0.0, prm.t_final, prm.segments);
    p.unknowns = {{"x", prm.m_order}, {"u", prm.m_order}};
    const auto xdes = std::make_shared<CompositeBernstein>(approximate_nonpoly(example5_target, p.knots, prm.degree));
    const double gamma = prm.gamma;
    p.equalities = [gamma, x0 = prm.x0, v0 = prm.v0](const SolutionBundle& b) {
        const auto& x1 = b.node_values("x", 1);
        const auto& x2 = b.node_values("x", 2);
        const auto& u0 = b.node_values("u", 0);
        Vector r;
        r.reserve(x1.size() + 2);
        for (std::size_t k = 0; k < x1.size(); ++k) r.push_back(x2[k] - (u0[k] - gamma * x1[k]));
        r.push_back(b.node_values("x", 0).front() - x0);
        r.push_back(x1.front() - v0);
        return r;
    };
    const double umax = prm.u_max;
    const double band = prm.band;
    p.inequalities = {
        {"u - u_max", [umax](const SolutionBundle& b) { return add_constant(b.cbp("u"), -umax); }},
        {"-u - u_max", [umax](const SolutionBundle& b) { return add_constant(scale(b.cbp("u"), -1.0), -umax); }},
        {"x - x_des - r",
         [xdes, band](const SolutionBundle& b) {
             return add_constant(cbp_arithmetic(b.cbp("x"), *xdes, CbpOp::sub), -band);
         }},
        {"x_des - x - r",
         [xdes, band](const SolutionBundle& b) {
             return add_constant(cbp_arithmetic(*xdes, b.cbp("x"), CbpOp::sub), -band);
         }},
    };
    p.derived = [xdes](const SolutionBundle&) { return std::vector<DerivedCurve>{{"x_des", *xdes, true}}; };

    // Warm start: x fitted to the target at the knots, u from the dynamics of that fit.
    const ThetaChain chain(prm.m_order, p.knots);
    Vector xk;
    Vector dxk;
    for (double t : p.knots.knots()) {
        xk.push_back(example5_target(t));
        dxk.push_back(2.0 * std::cos(t) * std::cos(2.0 * t) - 4.0 * std::sin(t) * std::sin(2.0 * t));
    }
    const Vector tx = fit_theta(chain, {{0, xk}, {1, dxk}});
    const Vector x1 = chain.knot_values(tx, 1);
    const Vector x2 = chain.knot_values(tx, 2);
    Vector uk(x1.size());
    for (std::size_t k = 0; k < uk.size(); ++k) uk[k] = std::clamp(x2[k] + gamma * x1[k], -umax, umax);
    const Vector tu = fit_theta(chain, {{0, uk}});
    p.initial_guess = tx;
    append(p.initial_guess, tu);
    return p;
}

std::array<CompositeBernstein, 2> example6_position(const SolutionBundle& b, const Example6Params& prm) {
    const auto& knots = b.knots();
    const int n = prm.degree;
    const auto& nu = b.cbp("nu");
    const auto& phi = b.cbp("phi");
    const auto grid = collocation_grid(n, knots);
    std::vector<std::vector<double>> px(knots.segments());
    std::vector<std::vector<double>> py(knots.segments());
    double x0 = prm.p0[0];
    double y0 = prm.p0[1];
    std::vector<double> dx(n + 1);
    std::vector<double> dy(n + 1);
    for (int i = 0; i < knots.segments(); ++i) {
        const auto nu_i = nu.segment(i);
        const auto phi_i = phi.segment(i);
        for (int j = 0; j <= n; ++j) {
            const double s = grid.nodes[i * (n + 1) + j];
            const double v = nu_i(s);
            const double a = phi_i(s);
            dx[j] = v * std::cos(a);
            dy[j] = v * std::sin(a);
        }
        const auto iv = knots.segment(i);
        const auto sx = antiderivative(BernsteinPoly(dx, iv), x0);
        const auto sy = antiderivative(BernsteinPoly(dy, iv), y0);
        px[i] = sx.control_points();
        py[i] = sy.control_points();
        x0 = px[i].back();
        y0 = py[i].back();
    }
    return {CompositeBernstein(knots, std::move(px)), CompositeBernstein(knots, std::move(py))};
}

DaiProblem example6_problem(const Example6Params& prm) {
    if (prm.segments < 1 || prm.degree < 1 || !(prm.length > 0.0) || !(prm.nu_min <= prm.nu_max))
        throw std::invalid_argument("example6: invalid parameters");
    DaiProblem p;
    p.name = "example6";
    p.knots = KnotSequence::equidistant(0.0, prm.length, prm.segments);
    const int n = prm.degree;
    p.unknowns = {{"nu", n}, {"phi", n + 1}};
    p.equalities = [prm](const SolutionBundle& b) {
        const auto pos = example6_position(b, prm);
        return Vector{pos[0].flat().back() - prm.p_des[0], pos[1].flat().back() - prm.p_des[1]};
    };
    const double r2 = prm.r_safe * prm.r_safe;
    const auto sq_dist = [prm](const SolutionBundle& b) {
        const auto pos = example6_position(b, prm);
        const auto dx = add_constant(pos[0], -prm.obstacle[0]);
        const auto dy = add_constant(pos[1], -prm.obstacle[1]);
        return std::array{dx, dy};
    };
    p.inequalities = {
        {"nu - nu_max", [prm](const SolutionBundle& b) { return add_constant(b.cbp("nu"), -prm.nu_max); }},
        {"nu_min - nu",
         [prm](const SolutionBundle& b) { return add_constant(scale(b.cbp("nu"), -1.0), prm.nu_min); }},
        {"u - u_max", [prm](const SolutionBundle& b) { return add_constant(b.cbp("phi", 1), -prm.u_max); }},
        {"-u - u_max",
         [prm](const SolutionBundle& b) { return add_constant(scale(b.cbp("phi", 1), -1.0), -prm.u_max); }},
        {"r_safe^2 - |P - O|^2 (position CPs)",
         [sq_dist, r2](const SolutionBundle& b) {
             const auto d = sq_dist(b);
             Vector g(d[0].flat().size());
             for (std::size_t i = 0; i < g.size(); ++i)
                 g[i] = r2 - (d[0].flat()[i] * d[0].flat()[i] + d[1].flat()[i] * d[1].flat()[i]);
             return CompositeBernstein(b.knots(), d[0].degree(), std::move(g));
         }},
        {"r_safe^2 - |p - O|^2 (product hull)",
         [sq_dist, r2, n](const SolutionBundle& b) {
             const auto d = sq_dist(b);
             auto sum = cbp_arithmetic(cbp_arithmetic(d[0], d[0], CbpOp::mul), cbp_arithmetic(d[1], d[1], CbpOp::mul),
                                       CbpOp::add);
             if (sum.degree() != 2 * (n + 1)) throw std::logic_error("example6: |p - O|^2 must have degree 2(n+1)");
             return add_constant(scale(sum, -1.0), r2);
         }},
    };
    p.derived = [prm](const SolutionBundle& b) {
        const auto pos = example6_position(b, prm);
        return std::vector<DerivedCurve>{{"p_x", pos[0], false}, {"p_y", pos[1], false}};
    };

    // Warm start: constant stretch and a symmetric arc bulging away from the obstacle.
    const int K = prm.segments;
    Vector tnu(K + n, 0.0);
    tnu[K] = 1.0;
    Vector tphi(K + n + 1, 0.0);
    tphi[K] = 1.0;
    tphi[K + 1] = -2.0 / prm.length;
    p.initial_guess = tnu;
    append(p.initial_guess, tphi);
    return p;
}

}  // namespace cbp
