#include "cbp/bench.hpp"

#include "cbp/cp_collocation.hpp"
#include "cbp/knot_collocation.hpp"
#include "cbp/registry.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

namespace cbp::bench {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::ordered_json json_num(double v) {
    if (!std::isfinite(v)) return nullptr;
    return v;
}

KnotSequence make_knots(const SweepSpec& spec, const Interval& domain, int K) {
    if (!spec.knots.empty()) {
        KnotSequence ks(spec.knots);
        if (std::abs(ks.front() - domain.s0()) > 1e-12 || std::abs(ks.back() - domain.sf()) > 1e-12)
            throw UsageError("--knots must span the example domain");
        return ks;
    }
    return KnotSequence::equidistant(domain.s0(), domain.sf(), K);
}

}  // namespace

std::function<double(double)> approx_function(const ApproxSpec& spec) {
    if (spec.fn == "sin") return [](double s) { return std::sin(s); };
    if (spec.fn == "exp") return [](double s) { return std::exp(s); };
    if (spec.fn == "custom") {
        if (spec.coeffs.empty()) throw UsageError("approx: --fn custom needs --coeffs");
        return [c = spec.coeffs](double s) {
            double v = 0.0;
            for (auto it = c.rbegin(); it != c.rend(); ++it) v = v * s + *it;
            return v;
        };
    }
    throw UsageError("approx: --fn must be sin, exp or custom");
}

std::vector<ApproxRow> run_approx(const ApproxSpec& spec) {
    if (!(spec.sf > spec.s0)) throw UsageError("approx: need s0 < sf");
    if (spec.configs.empty()) throw UsageError("approx: no (n, K) configurations");
    if (spec.samples < 2) throw UsageError("approx: --samples must be >= 2");
    const auto f = approx_function(spec);
    std::vector<ApproxRow> rows;
    for (const auto& [n, K] : spec.configs) {
        if (n < 0 || n > kMaxDegree) throw UsageError("approx: n must lie in [0, " + std::to_string(kMaxDegree) + "]");
        if (K < 1) throw UsageError("approx: K must be >= 1");
        const auto knots = KnotSequence::equidistant(spec.s0, spec.sf, K);
        const auto x = sample_to_cbp(f, knots, n);
        ApproxRow row{n, K, K * (n + 1), max_abs_error(x, f, spec.samples), std::nullopt};
        if (!rows.empty()) {
            const auto& prev = rows.back();
            if (prev.total_cps != row.total_cps && prev.max_abs_error > 0.0 && row.max_abs_error > 0.0)
                row.slope = std::log(row.max_abs_error / prev.max_abs_error) /
                            std::log(static_cast<double>(row.total_cps) / prev.total_cps);
        }
        rows.push_back(row);
    }
    return rows;
}

std::string approx_csv(const std::vector<ApproxRow>& rows) {
    std::ostringstream os;
    os << "n,K,total_cps,max_abs_error,slope\n";
    for (const auto& r : rows)
        os << r.n << ',' << r.K << ',' << r.total_cps << ',' << num(r.max_abs_error) << ','
           << (r.slope ? num(*r.slope) : "") << '\n';
    return os.str();
}

nlohmann::ordered_json approx_json(const std::vector<ApproxRow>& rows) {
    auto j = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json e;
        e["n"] = r.n;
        e["K"] = r.K;
        e["total_cps"] = r.total_cps;
        e["max_abs_error"] = json_num(r.max_abs_error);
        e["slope"] = r.slope ? json_num(*r.slope) : nlohmann::ordered_json(nullptr);
        j.push_back(std::move(e));
    }
    return j;
}

SolveOutcome run_solve(const std::string& example, const std::string& method, int n_or_m, const KnotSequence& knots,
                       int samples, const SolverOptions& opts, bool least_squares) {
    OdeExample ex = [&] {
        try {
            return ode_example(example);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }();
    const int r = ex.problem.order;
    SolveOutcome out{{}, CompositeBernstein(knots, 0, Vector(knots.segments(), 0.0)), {}};
    auto& row = out.row;
    row.method = method;
    row.example = example;
    row.K = knots.segments();
    if (method == "cp") {
        if (n_or_m <= r) throw UsageError("cp method needs n > r (r = " + std::to_string(r) + ")");
        if (n_or_m > kMaxDegree) throw UsageError("cp method: n too large");
        CpOptions co;
        co.solver = opts;
        co.least_squares = least_squares;
        const auto s = solve_cp(ex.problem, n_or_m, knots, co);
        row.n = n_or_m;
        row.unknowns = s.unknowns;
        row.residual_inf = s.report.residual_inf;
        row.iterations = s.report.iterations;
        row.runtime_ms = s.report.runtime_ms;
        row.converged = s.report.converged;
        out.x = s.x;
        out.report = report_json(s);
    } else if (method == "knot") {
        if (n_or_m != r + 1 && n_or_m != r + 2)
            throw UsageError("knot method needs M = r+1 or r+2 (r = " + std::to_string(r) + ")");
        const auto s = solve_knot(ex.problem, knots, n_or_m, opts);
        row.M = n_or_m;
        row.unknowns = s.unknowns;
        row.residual_inf = s.report.residual_inf;
        row.iterations = s.report.iterations;
        row.runtime_ms = s.report.runtime_ms;
        row.converged = s.report.converged;
        out.x = s.x;
        out.report = report_json(s);
    } else {
        throw UsageError("--method must be cp or knot");
    }
    row.max_abs_error = max_abs_error(out.x, ex.exact, samples);
    out.report["max_abs_error"] = json_num(row.max_abs_error);
    if (!row.converged) out.report["message"] = "not converged";
    return out;
}

void validate_sweep(const SweepSpec& spec) {
    OdeExample ex = [&] {
        try {
            return ode_example(spec.example);
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }();
    const int r = ex.problem.order;
    if (spec.method != "cp" && spec.method != "knot") throw UsageError("--method must be cp or knot");
    if (spec.samples < 2) throw UsageError("--samples must be >= 2");
    if (spec.jobs < 1) throw UsageError("--jobs must be >= 1");
    if (spec.knots.empty()) {
        if (spec.k_values.size() < 3) throw UsageError("a sweep needs at least 3 K values");
        for (int K : spec.k_values)
            if (K < 1) throw UsageError("K must be >= 1");
    }
    if (spec.method == "cp") {
        if (spec.n_values.empty()) throw UsageError("no n values");
        for (int n : spec.n_values)
            if (n <= r || n > kMaxDegree) throw UsageError("cp method needs r < n <= " + std::to_string(kMaxDegree));
    } else {
        if (spec.m_values.empty()) throw UsageError("no M values");
        for (int m : spec.m_values)
            if (m != r + 1 && m != r + 2) throw UsageError("knot method needs M = r+1 or r+2");
    }
    spec.solver.validate();
}

double fit_order(const std::vector<int>& k, const std::vector<double>& err) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < k.size() && i < err.size(); ++i) {
        if (!(err[i] > 1e-13) || !std::isfinite(err[i]) || k[i] < 1) continue;
        const double x = std::log(static_cast<double>(k[i]));
        const double y = std::log(err[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++m;
    }
    const double den = m * sxx - sx * sx;
    if (m < 2 || std::abs(den) < 1e-300) return std::numeric_limits<double>::quiet_NaN();
    return -(m * sxy - sx * sy) / den;
}

SweepResult run_sweep(const SweepSpec& spec) {
    validate_sweep(spec);
    const auto ex = ode_example(spec.example);
    const auto& params = spec.method == "cp" ? spec.n_values : spec.m_values;
    const std::vector<int> ks = spec.knots.empty() ? spec.k_values : std::vector<int>{static_cast<int>(spec.knots.size()) - 1};

    struct Job {
        int param;
        int K;
    };
    std::vector<Job> jobs;
    for (int p : params)
        for (int K : ks) jobs.push_back({p, K});

    SweepResult res;
    res.rows.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            const auto& jb = jobs[i];
            SweepRow& row = res.rows[i];
            try {
                row = run_solve(spec.example, spec.method, jb.param, make_knots(spec, ex.problem.domain, jb.K),
                                spec.samples, spec.solver, spec.least_squares)
                          .row;
            } catch (const std::exception& e) {
                row.method = spec.method;
                row.example = spec.example;
                (spec.method == "cp" ? row.n : row.M) = jb.param;
                row.K = jb.K;
                row.max_abs_error = std::numeric_limits<double>::quiet_NaN();
                row.residual_inf = std::numeric_limits<double>::quiet_NaN();
                row.converged = false;
                row.error = e.what();
            }
        }
    };
    const int nthreads = std::min<int>(spec.jobs, static_cast<int>(jobs.size()));
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    for (int p : params) {
        std::vector<int> k;
        std::vector<double> e;
        for (const auto& row : res.rows)
            if ((spec.method == "cp" ? row.n : row.M) == p && row.converged) {
                k.push_back(row.K);
                e.push_back(row.max_abs_error);
            }
        OrderFit fit{spec.method, spec.example, spec.method == "cp" ? p : 0, spec.method == "knot" ? p : 0,
                     fit_order(k, e)};
        res.fits.push_back(fit);
    }
    return res;
}

std::string row_csv(const SweepRow& r) {
    std::ostringstream os;
    os << r.method << ',' << r.example << ',' << r.n << ',' << r.M << ',' << r.K << ',' << r.unknowns << ','
       << num(r.max_abs_error) << ',' << num(r.residual_inf) << ',' << r.iterations << ',' << num(r.runtime_ms) << ','
       << (r.converged ? "true" : "false");
    return os.str();
}

std::string sweep_csv(const SweepResult& r) {
    std::ostringstream os;
    os << kSweepHeader << '\n';
    for (const auto& row : r.rows) os << row_csv(row) << '\n';
    // Fitted order: method "<method>-order", order in the max_abs_error column.
    for (const auto& f : r.fits)
        os << f.method << "-order," << f.example << ',' << f.n << ',' << f.M << ",,," << num(f.order) << ",,,,"
           << (std::isnan(f.order) ? "false" : "true") << '\n';
    return os.str();
}

nlohmann::ordered_json sweep_json(const SweepResult& r) {
    nlohmann::ordered_json j;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json e;
        e["method"] = row.method;
        e["example"] = row.example;
        e["n"] = row.n;
        e["M"] = row.M;
        e["K"] = row.K;
        e["unknowns"] = row.unknowns;
        e["max_abs_error"] = json_num(row.max_abs_error);
        e["residual_inf"] = json_num(row.residual_inf);
        e["iterations"] = row.iterations;
        e["runtime_ms"] = row.runtime_ms;
        e["converged"] = row.converged;
        if (!row.error.empty()) e["error"] = row.error;
        rows.push_back(std::move(e));
    }
    auto& fits = j["fitted_order"] = nlohmann::ordered_json::array();
    for (const auto& f : r.fits)
        fits.push_back({{"method", f.method}, {"example", f.example}, {"n", f.n}, {"M", f.M}, {"order", json_num(f.order)}});
    return j;
}

DaiOutcome run_dai(const DaiSpec& spec) {
    if (spec.audit_samples < 2) throw UsageError("dai: --samples must be >= 2");
    DaiProblem p;
    if (spec.example == "example5") {
        auto prm = spec.ex5;
        if (spec.segments) prm.segments = *spec.segments;
        if (prm.segments < 1 || !(prm.t_final > 0.0) || prm.band < 0.0 || prm.u_max < 0.0)
            throw UsageError("dai: invalid example5 parameters");
        p = example5_problem(prm);
    } else if (spec.example == "example6") {
        auto prm = spec.ex6;
        if (spec.segments) prm.segments = *spec.segments;
        if (prm.segments < 1 || prm.degree < 1 || !(prm.length > 0.0) || prm.r_safe < 0.0)
            throw UsageError("dai: invalid example6 parameters");
        p = example6_problem(prm);
    } else {
        throw UsageError("dai: --example must be example5 or example6");
    }
    spec.solver.validate();

    DaiOutcome out{solve_dai(p, spec.solver), {}, true};
    out.bundle = bundle_json(out.solution);
    const auto pts = sample_points(p.knots, spec.audit_samples);
    auto& cons = out.bundle["constraints"];
    for (std::size_t i = 0; i < p.inequalities.size(); ++i) {
        const auto g = p.inequalities[i].builder(out.solution.bundle);
        double mx = -std::numeric_limits<double>::infinity();
        for (double s : pts) mx = std::max(mx, g(s));
        cons[i]["sampled_max"] = json_num(mx);
        out.audit_ok = out.audit_ok && mx <= 1e-6;
    }
    out.bundle["audit"] = {{"samples", spec.audit_samples}, {"ok", out.audit_ok}};
    return out;
}

DenseMatrix run_dump(const DumpSpec& spec) {
    const auto knots = [&] {
        if (!spec.knots.empty()) return KnotSequence(spec.knots);
        if (spec.K < 1) throw UsageError("dump: K must be >= 1");
        return KnotSequence::equidistant(spec.s0, spec.sf, spec.K);
    };
    try {
        const Interval iv(spec.s0, spec.sf);
        if (spec.matrix == "delta") return diff_matrix_delta(spec.n, iv);
        if (spec.matrix == "gamma") return int_matrix_gamma(spec.n, iv);
        if (spec.matrix == "E") return elevation_matrix(spec.n, spec.ne);
        if (spec.matrix == "D") return diff_matrix_D(spec.n, iv);
        if (spec.matrix == "zeta") return zeta_matrix(spec.level, knots(), spec.m_order);
        if (spec.matrix == "P") return p_matrix(spec.level, knots(), spec.m_order);
        if (spec.matrix == "T") {
            const ThetaChain chain(spec.m_order, knots());
            if (spec.level < 0 || spec.level > spec.m_order) throw UsageError("dump: T needs 0 <= level <= M");
            return chain.transform(spec.level);
        }
    } catch (const UsageError&) {
        throw;
    } catch (const std::exception& e) {
        throw UsageError(std::string("dump: ") + e.what());
    }
    throw UsageError("dump: --matrix must be one of delta, gamma, E, D, zeta, P, T");
}

}  // namespace cbp::bench
