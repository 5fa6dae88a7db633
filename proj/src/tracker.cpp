#include "dupc/tracker.hpp"

#include <algorithm>
#include <cmath>

namespace dupc
{

std::string to_string(Strategy s)
{
    switch (s)
    {
    case Strategy::adupc: return "adupc";
    case Strategy::correction_only: return "correction_only";
    case Strategy::correction_plus_extra: return "correction_plus_extra";
    case Strategy::total_correction: return "total_correction";
    }
    return "unknown";
}

Strategy strategy_from_string(const std::string& name)
{
    for (Strategy s : {Strategy::adupc, Strategy::correction_only, Strategy::correction_plus_extra,
                       Strategy::total_correction})
        if (to_string(s) == name) return s;
    throw ConfigError("unknown strategy '" + name + "'");
}

std::string to_string(DerivativeMode m)
{
    return m == DerivativeMode::exact ? "exact" : "backward_difference";
}

DerivativeMode derivative_mode_from_string(const std::string& name)
{
    if (name == "exact") return DerivativeMode::exact;
    if (name == "backward_difference") return DerivativeMode::backward_difference;
    throw ConfigError("unknown derivative mode '" + name + "'");
}

std::string to_string(PredictionMode m)
{
    return m == PredictionMode::exact_kkt ? "exact_kkt" : "dual_gradient";
}

PredictionMode prediction_mode_from_string(const std::string& name)
{
    if (name == "exact_kkt") return PredictionMode::exact_kkt;
    if (name == "dual_gradient") return PredictionMode::dual_gradient;
    throw ConfigError("unknown prediction mode '" + name + "'");
}

void TrackerConfig::validate() const
{
    if (!(h > 0.0)) throw ConfigError("sampling period h must be positive");
    if (!(alpha > 0.0)) throw ConfigError("correction stepsize alpha must be positive");
    if (!(beta > 0.0)) throw ConfigError("prediction stepsize beta must be positive");
    if (P < 0 || C < 0 || C_extra < 0 || C_total < 0) throw ConfigError("iteration budgets must be nonnegative");
    if (k_max < 0) throw ConfigError("horizon k_max must be nonnegative");
    if (!(inner_tol > 0.0) || inner_max_iters < 1) throw ConfigError("invalid inner solver settings");
}

std::vector<double> sampling_times(const TrackerConfig& cfg)
{
    std::vector<double> t(static_cast<std::size_t>(cfg.k_max) + 1);
    for (int k = 0; k <= cfg.k_max; ++k) t[k] = cfg.t0 + k * cfg.h;
    return t;
}

namespace
{

struct Recorder
{
    const ConstraintSet& cs;
    const std::vector<double>& times;
    const OracleTrajectory* oracle;
    TrajectoryLog& log;

    void operator()(int k, const Vector& x, const Vector& lambda) const
    {
        TrajectoryRow row{k, times[k], x, lambda, std::nullopt, std::nullopt};
        if (oracle)
        {
            row.primal_err = (x - oracle->solutions[k].x_star).norm();
            row.dual_err = (lambda - oracle->solutions[k].lambda_star).norm();
        }
        log.max_image_deviation = std::max(log.max_image_deviation, image_deviation(lambda, cs));
        log.rows.push_back(std::move(row));
    }
};

void check_oracle(const OracleTrajectory* oracle, const std::vector<double>& times)
{
    if (oracle && oracle->solutions.size() != times.size())
        throw InvalidArgument("oracle trajectory does not match the sampling schedule");
}

void add_warning(TrajectoryLog& log, const char* name, double step, const TimeVaryingProblem& problem)
{
    if (auto w = stepsize_warning(name, step, problem.bounds, problem.constraints)) log.warnings.push_back(*w);
}

}  // namespace

TrajectoryLog run_adupc(const TimeVaryingProblem& problem, const TrackerConfig& cfg, const PrimalDualState& init,
                        const OracleTrajectory* oracle)
{
    cfg.validate();
    if (cfg.strategy != Strategy::adupc) throw ConfigError("run_adupc needs strategy adupc");
    if (cfg.derivative_mode == DerivativeMode::exact && !problem.has_mixed_grad())
        throw ConfigError("problem has no mixed-gradient oracle; use backward_difference");

    const std::vector<double> times = sampling_times(cfg);
    check_oracle(oracle, times);

    TrajectoryLog log;
    log.strategy = to_string(Strategy::adupc);
    log.P = cfg.P;
    log.C = cfg.C;
    add_warning(log, "alpha", cfg.alpha, problem);

    const PredictionConfig pcfg{cfg.beta, cfg.P, cfg.prediction_mode, cfg.derivative_mode};
    const bool predicting = cfg.prediction_mode == PredictionMode::exact_kkt || cfg.P > 0;
    if (predicting && cfg.prediction_mode == PredictionMode::dual_gradient) add_warning(log, "beta", cfg.beta, problem);

    const Recorder record{problem.constraints, times, oracle, log};
    MixedGradientCache cache;
    PrimalDualState state = init;
    state.t = times[0];
    state.k = 0;
    record(0, state.x, state.lambda);

    for (int k = 0; k < cfg.k_max; ++k)
    {
        try
        {
            Vector x = state.x;
            Vector lambda = state.lambda;
            if (predicting)
            {
                if (auto c = cache.evaluate(problem, cfg.derivative_mode, state.x, state.t))
                {
                    const PredictionStep step = predict(problem, state, cfg.h, *c, pcfg);
                    x += step.delta_x;
                    lambda += step.delta_lambda;
                }
            }
            dual_ascent_rounds(problem, times[k + 1], x, lambda, cfg.alpha, cfg.C, cfg.inner_tol,
                               cfg.inner_max_iters);
            state.x = std::move(x);
            state.lambda = std::move(lambda);
            state.k = k + 1;
            state.t = times[k + 1];
        }
        catch (Error& e)
        {
            e.attach_step(k + 1);
            throw;
        }
        record(k + 1, state.x, state.lambda);
    }
    return log;
}

TrajectoryLog run_baseline(const TimeVaryingProblem& problem, const TrackerConfig& cfg,
                           const PrimalDualState& init, const OracleTrajectory* oracle)
{
    cfg.validate();
    if (cfg.strategy == Strategy::adupc) throw ConfigError("run_baseline needs a correction strategy");

    const std::vector<double> times = sampling_times(cfg);
    check_oracle(oracle, times);

    TrajectoryLog log;
    log.strategy = to_string(cfg.strategy);
    log.P = 0;
    log.C = cfg.strategy == Strategy::total_correction ? cfg.C_total : cfg.C;
    log.C_extra = cfg.strategy == Strategy::correction_plus_extra ? cfg.C_extra : 0;
    add_warning(log, "alpha", cfg.alpha, problem);

    const Recorder record{problem.constraints, times, oracle, log};
    Vector x = init.x;
    Vector lambda = init.lambda;
    record(0, x, lambda);

    for (int k = 0; k < cfg.k_max; ++k)
    {
        const double t = times[k + 1];
        try
        {
            dual_ascent_rounds(problem, t, x, lambda, cfg.alpha, log.C, cfg.inner_tol, cfg.inner_max_iters);
        }
        catch (Error& e)
        {
            e.attach_step(k + 1);
            throw;
        }
        record(k + 1, x, lambda);
        if (log.C_extra > 0)
        {
            try
            {
                dual_ascent_rounds(problem, t, x, lambda, cfg.alpha, log.C_extra, cfg.inner_tol,
                                   cfg.inner_max_iters);
            }
            catch (Error& e)
            {
                e.attach_step(k + 1);
                throw;
            }
            log.max_image_deviation = std::max(log.max_image_deviation, image_deviation(lambda, problem.constraints));
        }
    }
    return log;
}

namespace
{

template <typename Runner>
TrajectoryLog with_oracle(const TimeVaryingProblem& problem, const TrackerConfig& cfg, const PrimalDualState& init,
                          std::optional<double> oracle_tol, Runner run)
{
    if (!oracle_tol) return run(problem, cfg, init, nullptr);
    cfg.validate();
    const std::vector<double> times = sampling_times(cfg);
    const OracleTrajectory oracle = compute_oracle_trajectory(problem, times, *oracle_tol);
    return run(problem, cfg, init, &oracle);
}

}  // namespace

TrajectoryLog run_adupc(const TimeVaryingProblem& problem, const TrackerConfig& cfg, const PrimalDualState& init,
                        std::optional<double> oracle_tol)
{
    return with_oracle(problem, cfg, init, oracle_tol,
                       [](const auto& p, const auto& c, const auto& s, const OracleTrajectory* o) {
                           return run_adupc(p, c, s, o);
                       });
}

TrajectoryLog run_baseline(const TimeVaryingProblem& problem, const TrackerConfig& cfg,
                           const PrimalDualState& init, std::optional<double> oracle_tol)
{
    return with_oracle(problem, cfg, init, oracle_tol,
                       [](const auto& p, const auto& c, const auto& s, const OracleTrajectory* o) {
                           return run_baseline(p, c, s, o);
                       });
}

TrajectoryLog run_strategy(const TimeVaryingProblem& problem, const TrackerConfig& cfg,
                           const PrimalDualState& init, const OracleTrajectory* oracle)
{
    if (cfg.strategy == Strategy::adupc) return run_adupc(problem, cfg, init, oracle);
    return run_baseline(problem, cfg, init, oracle);
}

void RuntimeBudget::validate() const
{
    if (!(r1 > 0.0 && r1 <= 1.0) || !(r2 > 0.0 && r2 <= 1.0)) throw ConfigError("budget fractions must lie in (0, 1]");
    if (r1 + r2 > 1.0 + 1e-12) throw ConfigError("budget fractions must satisfy r1 + r2 <= 1");
    if (!(t_C > 0.0) || !(t_P > 0.0) || !(t_bar > 0.0)) throw ConfigError("budget timings must be positive");
}

BudgetSplit compute_budget(const RuntimeBudget& budget, double h)
{
    budget.validate();
    if (!(h > 0.0)) throw InvalidArgument("sampling period h must be positive");

    constexpr double slack = 1e-9;
    auto fl = [](double v) { return static_cast<int>(std::floor(v + slack)); };

    BudgetSplit out;
    out.C = fl(budget.r1 * h / budget.t_C);
    out.P = std::max(0, fl((budget.r2 * h - budget.t_bar) / budget.t_P));
    out.C_extra = fl(budget.r2 * h / budget.t_C);
    out.C_total = fl(h / budget.t_C);
    out.feasible = out.C >= 1;
    return out;
}

}  // namespace dupc
