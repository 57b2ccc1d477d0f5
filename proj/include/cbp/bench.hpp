#pragma once

#include "cbp/composite.hpp"
#include "cbp/dai.hpp"
#include "cbp/solver.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace cbp::bench {

enum ExitCode : int { kOk = 0, kUsage = 2, kNotConverged = 3, kInfeasible = 4 };

/// Invalid command parameters; maps to exit code 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

inline constexpr const char* kSweepHeader =
    "method,example,n,M,K,unknowns,max_abs_error,residual_inf,iterations,runtime_ms,converged";

// ---- approx -----------------------------------------------------------------

struct ApproxSpec {
    std::string fn = "sin";         ///< sin | exp | custom
    std::vector<double> coeffs;     ///< custom: monomial coefficients a0 + a1 s + ...
    double s0 = 0.0;
    double sf = 6.283185307179586;
    std::vector<std::pair<int, int>> configs;  ///< (n, K) pairs, in output order
    int samples = 2001;
};

struct ApproxRow {
    int n = 0;
    int K = 0;
    int total_cps = 0;
    double max_abs_error = 0.0;
    std::optional<double> slope;  ///< d log(error) / d log(total_cps) vs the previous row
};

std::function<double(double)> approx_function(const ApproxSpec& spec);
std::vector<ApproxRow> run_approx(const ApproxSpec& spec);
std::string approx_csv(const std::vector<ApproxRow>& rows);
nlohmann::ordered_json approx_json(const std::vector<ApproxRow>& rows);

// ---- solve / converge -------------------------------------------------------

struct SweepSpec {
    std::string example = "example1";
    std::string method = "knot";  ///< cp | knot
    std::vector<int> n_values{3};
    std::vector<int> m_values{3};
    std::vector<int> k_values{4, 8, 16};
    std::vector<double> knots;  ///< explicit knot sequence; replaces k_values when set
    int samples = 2001;
    bool least_squares = false;  ///< cp: LM on the full system
    SolverOptions solver;
    int jobs = 1;
};

struct SweepRow {
    std::string method;
    std::string example;
    int n = 0;  ///< 0 for the knot method
    int M = 0;  ///< 0 for the cp method
    int K = 0;
    std::size_t unknowns = 0;
    double max_abs_error = 0.0;
    double residual_inf = 0.0;
    int iterations = 0;
    double runtime_ms = 0.0;
    bool converged = false;
    std::string error;  ///< set when the row failed with an exception
};

struct OrderFit {
    std::string method;
    std::string example;
    int n = 0;
    int M = 0;
    double order = 0.0;  ///< NaN when fewer than two usable rows
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::vector<OrderFit> fits;
};

/// One solve with its solution curve; throws UsageError on method/parameter mismatch.
struct SolveOutcome {
    SweepRow row;
    CompositeBernstein x;
    nlohmann::ordered_json report;
};

SolveOutcome run_solve(const std::string& example, const std::string& method, int n_or_m, const KnotSequence& knots,
                       int samples, const SolverOptions& opts, bool least_squares = false);

/// Throws UsageError for incompatible parameters before anything runs.
void validate_sweep(const SweepSpec& spec);
/// Rows in parameter order (n or M outer, K inner) regardless of `jobs`.
SweepResult run_sweep(const SweepSpec& spec);
/// Least-squares slope of log(error) against log(K), negated. Rows with
/// error below 1e-13 (exact to round-off) or not converged are skipped.
double fit_order(const std::vector<int>& k, const std::vector<double>& err);

std::string sweep_csv(const SweepResult& r);
nlohmann::ordered_json sweep_json(const SweepResult& r);
std::string row_csv(const SweepRow& r);

// ---- dai ----------------------------------------------------------------------

struct DaiSpec {
    std::string example = "example5";
    std::optional<int> segments;
    Example5Params ex5;
    Example6Params ex6;
    int audit_samples = 10000;
    SolverOptions solver;
};

struct DaiOutcome {
    DaiSolution solution;
    nlohmann::ordered_json bundle;  ///< bundle_json plus the sampling audit
    bool audit_ok = false;
};

/// Dense sampling of every builder output; `sampled_max` next to each constraint.
DaiOutcome run_dai(const DaiSpec& spec);

// ---- dump ---------------------------------------------------------------------

struct DumpSpec {
    std::string matrix;  ///< delta | gamma | E | D | zeta | P | T
    int n = 1;
    int ne = 1;
    double s0 = 0.0;
    double sf = 1.0;
    int K = 1;
    std::vector<double> knots;
    int m_order = 2;
    int level = 0;  ///< zeta / P level, T derivative order
};

DenseMatrix run_dump(const DumpSpec& spec);

}  // namespace cbp::bench
