// cbp: approximation, ODE solves, convergence sweeps, DAI solves and matrix dumps.

#include "cbp/bench.hpp"
#include "cbp/registry.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

namespace {

using namespace cbp;
using namespace cbp::bench;

struct Output {
    std::string path;
    std::string format = "csv";

    void write(const std::string& text) const {
        if (path.empty() || path == "-") {
            std::cout << text;
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
        f << text;
    }
};

void add_output(CLI::App* cmd, Output& out, bool csv) {
    if (!csv) out.format = "json";
    cmd->add_option("--out", out.path, "Output file (default stdout)");
    cmd->add_option("--format", out.format, "Output format")
        ->check(csv ? CLI::IsMember({"csv", "json"}) : CLI::IsMember({"json"}))
        ->capture_default_str();
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Composite Bernstein polynomial toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "cbp 1.0");

    SolverOptions solver;
    int samples = 2001;

    // approx
    ApproxSpec aspec;
    Output aout;
    std::vector<int> a_n{3};
    std::vector<int> a_k{4};
    auto* approx = app.add_subcommand("approx", "Approximate a function with CBPs by CP sampling");
    approx->add_option("--fn", aspec.fn, "sin | exp | custom")->capture_default_str();
    approx->add_option("--coeffs", aspec.coeffs, "custom: monomial coefficients a0,a1,...")->delimiter(',');
    approx->add_option("--s0", aspec.s0, "Interval start")->capture_default_str();
    approx->add_option("--sf", aspec.sf, "Interval end")->capture_default_str();
    approx->add_option("--n", a_n, "Degrees (paired with --k, or crossed)")->delimiter(',');
    approx->add_option("--k", a_k, "Segment counts")->delimiter(',');
    approx->add_option("--samples", aspec.samples, "Error samples")->capture_default_str();
    add_output(approx, aout, true);

    // solve
    std::string example = "example1";
    std::string method = "knot";
    int s_n = 3;
    std::optional<int> s_m;
    int s_k = 8;
    std::vector<double> knots;
    bool least_squares = false;
    Output sout;
    sout.format = "json";
    auto* solve = app.add_subcommand("solve", "Solve one registry ODE example");
    solve->add_option("--example", example, "example1..example4")->capture_default_str();
    solve->add_option("--method", method, "cp | knot")->check(CLI::IsMember({"cp", "knot"}))->capture_default_str();
    solve->add_option("--n", s_n, "cp degree")->capture_default_str();
    solve->add_option("--m-order", s_m, "knot method M (default r+1)");
    solve->add_option("--k", s_k, "Segments")->capture_default_str();
    solve->add_option("--knots", knots, "Explicit knots s0,...,sK")->delimiter(',');
    solve->add_option("--tol", solver.tol, "Residual tolerance")->capture_default_str();
    solve->add_option("--max-iters", solver.max_iters, "Solver iteration cap")->capture_default_str();
    solve->add_option("--samples", samples, "Error samples")->capture_default_str();
    solve->add_flag("--least-squares", least_squares, "cp: Levenberg-Marquardt on the full system");
    add_output(solve, sout, true);

    // converge
    SweepSpec sw;
    Output cout_;
    std::optional<std::vector<int>> c_m;
    auto* converge = app.add_subcommand("converge", "Convergence sweep over K");
    converge->add_option("--example", sw.example, "example1..example4")->capture_default_str();
    converge->add_option("--method", sw.method, "cp | knot")->check(CLI::IsMember({"cp", "knot"}))->capture_default_str();
    converge->add_option("--n", sw.n_values, "cp degrees")->delimiter(',');
    converge->add_option("--m-order", c_m, "knot M values (default r+1)")->delimiter(',');
    converge->add_option("--k", sw.k_values, "Segment counts")->delimiter(',');
    converge->add_option("--knots", sw.knots, "Explicit knots s0,...,sK")->delimiter(',');
    converge->add_option("--tol", sw.solver.tol, "Residual tolerance")->capture_default_str();
    converge->add_option("--max-iters", sw.solver.max_iters, "Solver iteration cap")->capture_default_str();
    converge->add_option("--samples", sw.samples, "Error samples")->capture_default_str();
    converge->add_option("--jobs", sw.jobs, "Parallel rows")->capture_default_str();
    converge->add_flag("--least-squares", sw.least_squares, "cp: Levenberg-Marquardt on the full system");
    add_output(converge, cout_, true);

    // dai
    DaiSpec ds;
    ds.solver.tol = 1e-9;
    Output dout;
    std::optional<int> d_k;
    auto* dai = app.add_subcommand("dai", "Solve a DAI example (example5, example6)");
    dai->add_option("--example", ds.example, "example5 | example6")->capture_default_str();
    dai->add_option("--k", d_k, "Segments (default 25 / 15)");
    dai->add_option("--tol", ds.solver.tol, "Equality tolerance")->capture_default_str();
    dai->add_option("--samples", ds.audit_samples, "Audit samples")->capture_default_str();
    dai->add_option("--gamma", ds.ex5.gamma, "example5 damping")->capture_default_str();
    dai->add_option("--u-max", ds.ex5.u_max, "example5 input bound")->capture_default_str();
    dai->add_option("--band", ds.ex5.band, "example5 tracking band r")->capture_default_str();
    dai->add_option("--t-final", ds.ex5.t_final, "example5 horizon T")->capture_default_str();
    dai->add_option("--v0", ds.ex5.v0, "example5 x'(0)")->capture_default_str();
    dai->add_option("--r-safe", ds.ex6.r_safe, "example6 obstacle radius")->capture_default_str();
    dai->add_option("--rod-u-max", ds.ex6.u_max, "example6 curvature bound")->capture_default_str();
    add_output(dai, dout, false);

    // dump
    DumpSpec dm;
    Output mout;
    std::optional<int> dm_k;
    auto* dumpc = app.add_subcommand("dump", "Write an operator matrix as CSV");
    dumpc->add_option("--matrix", dm.matrix, "delta | gamma | E | D | zeta | P | T")->required();
    dumpc->add_option("--n", dm.n, "Degree")->capture_default_str();
    dumpc->add_option("--ne", dm.ne, "Elevated degree (E)")->capture_default_str();
    dumpc->add_option("--s0", dm.s0, "Interval start")->capture_default_str();
    dumpc->add_option("--sf", dm.sf, "Interval end")->capture_default_str();
    dumpc->add_option("--k", dm_k, "Segments on [s0, sf] (zeta, P, T)");
    dumpc->add_option("--knots", dm.knots, "Explicit knots (zeta, P, T)")->delimiter(',');
    dumpc->add_option("--m-order", dm.m_order, "M (zeta, P, T)")->capture_default_str();
    dumpc->add_option("--level", dm.level, "zeta/P level, T derivative order")->capture_default_str();
    dumpc->add_option("--out", mout.path, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*approx) {
            if (a_n.size() == a_k.size()) {
                for (std::size_t i = 0; i < a_n.size(); ++i) aspec.configs.emplace_back(a_n[i], a_k[i]);
            } else {
                for (int n : a_n)
                    for (int k : a_k) aspec.configs.emplace_back(n, k);
            }
            const auto rows = run_approx(aspec);
            aout.write(aout.format == "csv" ? approx_csv(rows) : dump(approx_json(rows)));
            return kOk;
        }
        if (*solve) {
            const auto ex = [&] {
                try {
                    return ode_example(example);
                } catch (const std::invalid_argument& e) {
                    throw UsageError(e.what());
                }
            }();
            const int param = method == "cp" ? s_n : s_m.value_or(ex.problem.order + 1);
            if (samples < 2) throw UsageError("--samples must be >= 2");
            solver.validate();
            KnotSequence ks = [&] {
                try {
                    if (!knots.empty()) return KnotSequence(knots);
                    if (s_k < 1) throw UsageError("--k must be >= 1");
                    return KnotSequence::equidistant(ex.problem.domain.s0(), ex.problem.domain.sf(), s_k);
                } catch (const UsageError&) {
                    throw;
                } catch (const std::invalid_argument& e) {
                    throw UsageError(e.what());
                }
            }();
            if (std::abs(ks.front() - ex.problem.domain.s0()) > 1e-12 ||
                std::abs(ks.back() - ex.problem.domain.sf()) > 1e-12)
                throw UsageError("--knots must span the example domain");
            const auto res = run_solve(example, method, param, ks, samples, solver, least_squares);
            if (sout.format == "csv") {
                sout.write(std::string(kSweepHeader) + "\n" + row_csv(res.row) + "\n");
            } else {
                nlohmann::ordered_json j;
                j["example"] = example;
                j["solution"] = to_json(res.x);
                j["report"] = res.report;
                sout.write(dump(j));
            }
            std::fprintf(stderr, "max_abs_error=%.6e converged=%s\n", res.row.max_abs_error,
                         res.row.converged ? "true" : "false");
            return res.row.converged ? kOk : kNotConverged;
        }
        if (*converge) {
            if (!c_m) {
                const auto ex = ode_example(sw.example);
                sw.m_values = {ex.problem.order + 1};
            } else {
                sw.m_values = *c_m;
            }
            const auto res = run_sweep(sw);
            cout_.write(cout_.format == "csv" ? sweep_csv(res) : dump(sweep_json(res)));
            for (const auto& r : res.rows)
                if (!r.converged) return kNotConverged;
            return kOk;
        }
        if (*dai) {
            if (d_k) ds.segments = *d_k;
            const auto res = run_dai(ds);
            dout.write(dump(res.bundle));
            if (!res.solution.feasible) {
                std::fprintf(stderr, "%s\n", res.solution.result.report.message.c_str());
                return kInfeasible;
            }
            return kOk;
        }
        if (*dumpc) {
            if (dm_k) dm.K = *dm_k;
            mout.write(to_csv(run_dump(dm)));
            return kOk;
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kNotConverged;
    }
    return kUsage;
}
