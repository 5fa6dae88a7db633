#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dupc/dual_solvers.hpp"
#include "dupc/prediction.hpp"
#include "dupc/trajectory.hpp"

namespace dupc
{

enum class Strategy
{
    adupc,
    correction_only,
    correction_plus_extra,
    total_correction,
};

std::string to_string(Strategy s);
/// Throws ConfigError on an unknown name.
Strategy strategy_from_string(const std::string& name);
std::string to_string(DerivativeMode m);
DerivativeMode derivative_mode_from_string(const std::string& name);
std::string to_string(PredictionMode m);
PredictionMode prediction_mode_from_string(const std::string& name);

struct TrackerConfig
{
    double alpha = 0.1;
    double beta = 0.1;
    int P = 0;
    int C = 1;
    /// C' of correction_plus_extra.
    int C_extra = 0;
    /// C'' of total_correction.
    int C_total = 1;
    Strategy strategy = Strategy::adupc;
    PredictionMode prediction_mode = PredictionMode::dual_gradient;
    DerivativeMode derivative_mode = DerivativeMode::exact;
    double h = 0.1;
    int k_max = 100;
    double t0 = 0.0;
    double inner_tol = 1e-10;
    int inner_max_iters = 100;

    /// Throws ConfigError on nonpositive h or stepsizes and negative budgets.
    void validate() const;
};

/// t_k = t0 + k h for k = 0..k_max.
std::vector<double> sampling_times(const TrackerConfig& cfg);

/// Prediction-correction: per step, predict from (x_k, lambda_k) on f(.; t_k), then run
/// C correction rounds on f(.; t_{k+1}). With P = 0 and dual-gradient
/// prediction nothing is added, so the run coincides with correction-only.
TrajectoryLog run_adupc(const TimeVaryingProblem& problem, const TrackerConfig& cfg, const PrimalDualState& init,
                        const OracleTrajectory* oracle = nullptr);
TrajectoryLog run_adupc(const TimeVaryingProblem& problem, const TrackerConfig& cfg, const PrimalDualState& init,
                        std::optional<double> oracle_tol);

/// correction_only: C rounds per sample. correction_plus_extra: C rounds,
/// log the delivered iterate, then C_extra more rounds on the same function.
/// total_correction: C_total rounds.
TrajectoryLog run_baseline(const TimeVaryingProblem& problem, const TrackerConfig& cfg,
                           const PrimalDualState& init, const OracleTrajectory* oracle = nullptr);
TrajectoryLog run_baseline(const TimeVaryingProblem& problem, const TrackerConfig& cfg,
                           const PrimalDualState& init, std::optional<double> oracle_tol);

/// run_adupc or run_baseline according to cfg.strategy.
TrajectoryLog run_strategy(const TimeVaryingProblem& problem, const TrackerConfig& cfg,
                           const PrimalDualState& init, const OracleTrajectory* oracle = nullptr);

/// Wall-time split of one sampling period: r1 h for correction, r2 h for
/// prediction (t_bar of it spent forming the prediction data).
struct RuntimeBudget
{
    double r1 = 0.5;
    double r2 = 0.5;
    double t_C = 0.021;
    double t_P = 0.003;
    double t_bar = 0.008;

    void validate() const;
};

struct BudgetSplit
{
    int C = 0;
    int P = 0;
    int C_extra = 0;
    int C_total = 0;
    /// False when not even one correction fits in r1 h.
    bool feasible = false;
};

BudgetSplit compute_budget(const RuntimeBudget& budget, double h);

}  // namespace dupc
