#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dupc/bounds.hpp"
#include "dupc/scenario.hpp"
#include "dupc/tracker.hpp"

namespace dupc
{

/// One tracker configuration of a sweep; `label` names it in the summary.
struct Variant
{
    std::string label = "adupc";
    Strategy strategy = Strategy::adupc;
    int P = 0;
    int C = 1;
    int C_extra = 0;
    int C_total = 1;
    PredictionMode prediction_mode = PredictionMode::dual_gradient;
    DerivativeMode derivative_mode = DerivativeMode::exact;
};

struct SweepSpec
{
    std::vector<double> h_values{0.05, 0.1, 0.2, 0.4};
    std::vector<Variant> variants;
    int horizon = 2000;
    double tail = 0.5;
    double oracle_tol = 1e-11;
    std::vector<std::uint64_t> seeds{1};
    /// Unset: the contraction-optimal stepsize of the scenario.
    std::optional<double> alpha;
    std::optional<double> beta;
    double inner_tol = 1e-10;
    int inner_max_iters = 100;

    /// Throws ConfigError on empty or unsorted h values and invalid budgets.
    void validate() const;
};

struct SweepRow
{
    double h = 0.0;
    std::string strategy;
    int P = 0;
    int C = 0;
    std::optional<double> err_primal;
    std::optional<double> err_dual;
    /// Failure or guard message; empty when the row is clean.
    std::string issue;
    bool failed = false;
};

struct SweepResult
{
    /// Sorted by (h, strategy, P).
    std::vector<SweepRow> rows;
    [[nodiscard]] bool any_failed() const;
};

struct SweepOptions
{
    int threads = 1;
    /// When nonempty, every run's trajectory CSV is written here.
    std::string log_dir;
};

/// Runs every (h, variant, seed) cell. Errors are tail maxima of |x_k - x*(t_k)|
/// against solve_oracle; with several seeds the worst seed is reported. A run
/// that throws becomes a failed row and the sweep goes on. Rows whose error is
/// not at least 100x above the oracle tolerance carry a guard note.
SweepResult run_sweep(const Scenario& scenario, const SweepSpec& sweep, const SweepOptions& opts = {});

/// `h,strategy,P,C,steady_state_err_primal,steady_state_err_dual`
void write_summary_csv(std::ostream& os, const SweepResult& result);
/// `h,strategy,P,C,issue` for rows with an issue.
void write_issues_csv(std::ostream& os, const SweepResult& result);

struct SlopeFit
{
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Least squares on (log h, log err). Needs >= 3 points, all positive;
/// throws DegenerateFit when every error is below 1e-14.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

/// Slope of one sweep label over its rows; nullopt when a row is missing.
std::optional<SlopeFit> sweep_slope(const SweepResult& result, const std::string& label);

struct BudgetRow
{
    double h = 0.0;
    BudgetSplit split;
    std::optional<double> err_pc;
    std::optional<double> err_cec;
    std::optional<double> err_tc;
    double bound_pc = 0.0;
    double bound_cec = 0.0;
    double bound_tc = 0.0;
    std::string issue;
};

struct BudgetComparison
{
    std::vector<BudgetRow> rows;
    [[nodiscard]] bool any_failed() const;
};

/// Per h: split the period with compute_budget, run adupc (P, C),
/// correction_plus_extra (C, C') and total_correction (C''), and put the
/// bound formulas next to the measured steady-state primal errors.
BudgetComparison compare_budgeted(const Scenario& scenario, const RuntimeBudget& budget,
                                  const std::vector<double>& h_values, const SweepSpec& base,
                                  const SweepOptions& opts = {});

/// `h,P,C,C_extra,C_total,feasible,err_pc,err_cec,err_tc,bound_pc,bound_cec,bound_tc`
void write_budget_csv(std::ostream& os, const BudgetComparison& cmp);

}  // namespace dupc
