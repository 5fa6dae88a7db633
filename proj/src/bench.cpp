#include "dupc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

#include "dupc/dual_solvers.hpp"

namespace dupc
{

namespace
{

/// Runs job(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& job)
{
    const std::size_t workers = std::min<std::size_t>(std::max(1, threads), count);
    if (workers <= 1)
    {
        for (std::size_t i = 0; i < count; ++i) job(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) job(i);
        });
    for (auto& t : pool) t.join();
}

TrackerConfig tracker_for(const Variant& v, const SweepSpec& sweep, const TimeVaryingProblem& problem, double h)
{
    TrackerConfig cfg;
    const double opt = optimal_stepsize(problem.bounds, problem.constraints);
    cfg.alpha = sweep.alpha.value_or(opt);
    cfg.beta = sweep.beta.value_or(opt);
    cfg.P = v.P;
    cfg.C = v.C;
    cfg.C_extra = v.C_extra;
    cfg.C_total = v.C_total;
    cfg.strategy = v.strategy;
    cfg.prediction_mode = v.prediction_mode;
    cfg.derivative_mode = v.derivative_mode;
    cfg.h = h;
    cfg.k_max = sweep.horizon;
    cfg.inner_tol = sweep.inner_tol;
    cfg.inner_max_iters = sweep.inner_max_iters;
    return cfg;
}

struct Instance
{
    std::uint64_t seed = 0;
    GeneratedScenario scenario;
};

std::vector<Instance> instances(const Scenario& scenario, const std::vector<std::uint64_t>& seeds)
{
    std::vector<Instance> out;
    for (std::uint64_t s : seeds)
    {
        Scenario copy = scenario;
        copy.seed = s;
        out.push_back({s, generate_scenario(copy)});
    }
    return out;
}

/// Oracle trajectories for every (instance, h), computed in parallel.
std::vector<std::vector<std::optional<OracleTrajectory>>> oracles(const std::vector<Instance>& inst,
                                                                  const std::vector<double>& hs, int horizon,
                                                                  double tol, int threads,
                                                                  std::vector<std::vector<std::string>>& errors)
{
    std::vector<std::vector<std::optional<OracleTrajectory>>> out(inst.size(),
                                                                  std::vector<std::optional<OracleTrajectory>>(hs.size()));
    errors.assign(inst.size(), std::vector<std::string>(hs.size()));
    parallel_for(inst.size() * hs.size(), threads, [&](std::size_t job) {
        const std::size_t s = job / hs.size();
        const std::size_t j = job % hs.size();
        TrackerConfig cfg;
        cfg.h = hs[j];
        cfg.k_max = horizon;
        try
        {
            out[s][j] = compute_oracle_trajectory(inst[s].scenario.problem, sampling_times(cfg), tol);
        }
        catch (const std::exception& e)
        {
            errors[s][j] = std::string("oracle: ") + e.what();
        }
    });
    return out;
}

std::string log_name(const std::string& label, double h, std::uint64_t seed)
{
    return label + "_h" + format_double(h) + "_seed" + std::to_string(seed) + ".csv";
}

void write_log(const std::string& dir, const std::string& name, const TrajectoryLog& log)
{
    if (dir.empty()) return;
    std::filesystem::create_directories(dir);
    std::ofstream os(std::filesystem::path(dir) / name);
    log.write_csv(os);
}

std::string opt_str(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

void SweepSpec::validate() const
{
    if (h_values.empty()) throw ConfigError("sweep needs at least one h value");
    for (std::size_t i = 0; i < h_values.size(); ++i)
    {
        if (!(h_values[i] > 0.0)) throw ConfigError("h values must be positive");
        if (i > 0 && !(h_values[i] > h_values[i - 1])) throw ConfigError("h values must be strictly increasing");
    }
    if (horizon < 1) throw ConfigError("horizon must be at least 1");
    if (!(tail > 0.0 && tail <= 1.0)) throw ConfigError("tail fraction must lie in (0, 1]");
    if (!(oracle_tol > 0.0)) throw ConfigError("oracle tolerance must be positive");
    if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
    if (alpha && !(*alpha > 0.0)) throw ConfigError("alpha must be positive");
    if (beta && !(*beta > 0.0)) throw ConfigError("beta must be positive");
    std::vector<std::string> labels;
    for (const auto& v : variants)
    {
        if (v.P < 0 || v.C < 0 || v.C_extra < 0 || v.C_total < 0) throw ConfigError("variant budgets must be nonnegative");
        if (v.label.empty()) throw ConfigError("variant label must not be empty");
        labels.push_back(v.label);
    }
    std::sort(labels.begin(), labels.end());
    if (std::adjacent_find(labels.begin(), labels.end()) != labels.end()) throw ConfigError("variant labels must be unique");
}

bool SweepResult::any_failed() const
{
    return std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.failed; });
}

SweepResult run_sweep(const Scenario& scenario, const SweepSpec& sweep, const SweepOptions& opts)
{
    sweep.validate();
    if (sweep.variants.empty()) throw ConfigError("sweep needs at least one variant");
    const std::vector<Instance> inst = instances(scenario, sweep.seeds);
    const auto& hs = sweep.h_values;
    std::vector<std::vector<std::string>> oracle_errors;
    const auto orc = oracles(inst, hs, sweep.horizon, sweep.oracle_tol, opts.threads, oracle_errors);

    const std::size_t nv = sweep.variants.size();
    const std::size_t cells = inst.size() * hs.size() * nv;
    struct Cell
    {
        std::optional<double> primal;
        std::optional<double> dual;
        std::string error;
    };
    std::vector<Cell> results(cells);
    std::mutex io;

    parallel_for(cells, opts.threads, [&](std::size_t job) {
        const std::size_t s = job / (hs.size() * nv);
        const std::size_t j = (job / nv) % hs.size();
        const Variant& v = sweep.variants[job % nv];
        Cell& cell = results[job];
        if (!orc[s][j])
        {
            cell.error = oracle_errors[s][j];
            return;
        }
        try
        {
            const TimeVaryingProblem& problem = inst[s].scenario.problem;
            const TrackerConfig cfg = tracker_for(v, sweep, problem, hs[j]);
            const TrajectoryLog log = run_strategy(problem, cfg, zero_state(problem), &*orc[s][j]);
            cell.primal = log.steady_state_primal(sweep.tail);
            cell.dual = log.steady_state_dual(sweep.tail);
            if (!opts.log_dir.empty())
            {
                std::lock_guard<std::mutex> lock(io);
                write_log(opts.log_dir, log_name(v.label, hs[j], inst[s].seed), log);
            }
        }
        catch (const std::exception& e)
        {
            cell.error = e.what();
        }
    });

    SweepResult out;
    for (std::size_t j = 0; j < hs.size(); ++j)
        for (std::size_t vi = 0; vi < nv; ++vi)
        {
            const Variant& v = sweep.variants[vi];
            SweepRow row;
            row.h = hs[j];
            row.strategy = v.label;
            row.P = v.strategy == Strategy::adupc ? v.P : 0;
            row.C = v.strategy == Strategy::total_correction ? v.C_total : v.C;
            for (std::size_t s = 0; s < inst.size(); ++s)
            {
                const Cell& c = results[(s * hs.size() + j) * nv + vi];
                if (!c.error.empty())
                {
                    row.failed = true;
                    row.issue = "seed " + std::to_string(inst[s].seed) + ": " + c.error;
                    break;
                }
                row.err_primal = std::max(row.err_primal.value_or(0.0), c.primal.value_or(0.0));
                row.err_dual = std::max(row.err_dual.value_or(0.0), c.dual.value_or(0.0));
            }
            if (row.failed)
            {
                row.err_primal.reset();
                row.err_dual.reset();
            }
            else if (row.err_primal && *row.err_primal < 100.0 * sweep.oracle_tol)
            {
                row.issue = "oracle tolerance " + format_double(sweep.oracle_tol) +
                            " is not 100x below the measured error " + format_double(*row.err_primal);
            }
            out.rows.push_back(std::move(row));
        }

    std::sort(out.rows.begin(), out.rows.end(), [](const SweepRow& a, const SweepRow& b) {
        return std::tie(a.h, a.strategy, a.P) < std::tie(b.h, b.strategy, b.P);
    });
    return out;
}

void write_summary_csv(std::ostream& os, const SweepResult& result)
{
    os << "h,strategy,P,C,steady_state_err_primal,steady_state_err_dual\n";
    for (const auto& r : result.rows)
        os << format_double(r.h) << ',' << r.strategy << ',' << r.P << ',' << r.C << ',' << opt_str(r.err_primal) << ','
           << opt_str(r.err_dual) << '\n';
}

void write_issues_csv(std::ostream& os, const SweepResult& result)
{
    os << "h,strategy,P,C,issue\n";
    for (const auto& r : result.rows)
    {
        if (r.issue.empty()) continue;
        std::string msg = r.issue;
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        os << format_double(r.h) << ',' << r.strategy << ',' << r.P << ',' << r.C << ',' << msg << '\n';
    }
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points)
{
    if (points.size() < 3) throw InvalidArgument("slope fit needs at least three points");
    bool all_tiny = true;
    for (const auto& [h, e] : points)
    {
        if (!(h > 0.0)) throw InvalidArgument("slope fit needs positive h");
        if (e >= 1e-14) all_tiny = false;
    }
    if (all_tiny) throw DegenerateFit("all errors are below 1e-14");
    for (const auto& [h, e] : points)
        if (!(e > 0.0)) throw InvalidArgument("slope fit needs positive errors");

    const double n = static_cast<double>(points.size());
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& [h, e] : points)
    {
        sx += std::log(h);
        sy += std::log(e);
    }
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (const auto& [h, e] : points)
    {
        const double dx = std::log(h) - mx;
        const double dy = std::log(e) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (!(sxx > 0.0)) throw DegenerateFit("all h values coincide");

    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

std::optional<SlopeFit> sweep_slope(const SweepResult& result, const std::string& label)
{
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : result.rows)
    {
        if (r.strategy != label) continue;
        if (!r.err_primal) return std::nullopt;
        pts.emplace_back(r.h, *r.err_primal);
    }
    if (pts.size() < 3) return std::nullopt;
    return fit_slope(pts);
}

bool BudgetComparison::any_failed() const
{
    return std::any_of(rows.begin(), rows.end(), [](const BudgetRow& r) { return !r.issue.empty() && r.split.feasible; });
}

BudgetComparison compare_budgeted(const Scenario& scenario, const RuntimeBudget& budget,
                                  const std::vector<double>& h_values, const SweepSpec& base, const SweepOptions& opts)
{
    budget.validate();
    SweepSpec spec = base;
    spec.h_values = h_values;
    spec.variants.clear();
    spec.seeds = {base.seeds.empty() ? scenario.seed : base.seeds.front()};
    spec.validate();

    const GeneratedScenario gen = [&] {
        Scenario copy = scenario;
        copy.seed = spec.seeds.front();
        return generate_scenario(copy);
    }();
    const TimeVaryingProblem& problem = gen.problem;

    BudgetComparison out;
    for (double h : h_values)
    {
        BudgetRow row;
        row.h = h;
        row.split = compute_budget(budget, h);

        AnalysisInputs ai;
        ai.bounds = problem.bounds;
        ai.spectral = spectral(problem.constraints);
        const double opt = optimal_stepsize(problem.bounds, problem.constraints);
        ai.alpha = spec.alpha.value_or(opt);
        ai.beta = spec.beta.value_or(opt);
        ai.P = row.split.P;
        ai.C = std::max(1, row.split.C);
        ai.C_extra = row.split.C_extra;
        ai.C_total = std::max(1, row.split.C_total);
        ai.h = h;
        const BoundReport rep = compute_bound_report(ai);
        row.bound_pc = rep.err_pc;
        row.bound_cec = rep.err_cec;
        row.bound_tc = rep.err_tc;
        if (!row.split.feasible) row.issue = "infeasible: no correction step fits in r1 h";
        out.rows.push_back(std::move(row));
    }

    std::vector<std::optional<OracleTrajectory>> orc(h_values.size());
    std::vector<std::string> oerr(h_values.size());
    parallel_for(h_values.size(), opts.threads, [&](std::size_t j) {
        if (!out.rows[j].split.feasible) return;
        TrackerConfig cfg;
        cfg.h = h_values[j];
        cfg.k_max = spec.horizon;
        try
        {
            orc[j] = compute_oracle_trajectory(problem, sampling_times(cfg), spec.oracle_tol);
        }
        catch (const std::exception& e)
        {
            oerr[j] = std::string("oracle: ") + e.what();
        }
    });

    const std::size_t jobs = h_values.size() * 3;
    std::vector<std::optional<double>> errs(jobs);
    std::vector<std::string> msgs(jobs);
    std::mutex io;
    parallel_for(jobs, opts.threads, [&](std::size_t job) {
        const std::size_t j = job / 3;
        const BudgetSplit& split = out.rows[j].split;
        if (!split.feasible) return;
        if (!orc[j])
        {
            msgs[job] = oerr[j];
            return;
        }
        Variant v;
        switch (job % 3)
        {
        case 0: v = {"adupc", Strategy::adupc, split.P, split.C, 0, 1}; break;
        case 1: v = {"correction_plus_extra", Strategy::correction_plus_extra, 0, split.C, split.C_extra, 1}; break;
        default: v = {"total_correction", Strategy::total_correction, 0, split.C, 0, split.C_total}; break;
        }
        try
        {
            const TrackerConfig cfg = tracker_for(v, spec, problem, h_values[j]);
            const TrajectoryLog log = run_strategy(problem, cfg, zero_state(problem), &*orc[j]);
            errs[job] = log.steady_state_primal(spec.tail);
            if (!opts.log_dir.empty())
            {
                std::lock_guard<std::mutex> lock(io);
                write_log(opts.log_dir, "budget_" + log_name(v.label, h_values[j], spec.seeds.front()), log);
            }
        }
        catch (const std::exception& e)
        {
            msgs[job] = v.label + ": " + e.what();
        }
    });

    for (std::size_t j = 0; j < h_values.size(); ++j)
    {
        BudgetRow& row = out.rows[j];
        row.err_pc = errs[3 * j];
        row.err_cec = errs[3 * j + 1];
        row.err_tc = errs[3 * j + 2];
        for (int s = 0; s < 3; ++s)
            if (!msgs[3 * j + s].empty()) row.issue += (row.issue.empty() ? "" : "; ") + msgs[3 * j + s];
    }
    return out;
}

void write_budget_csv(std::ostream& os, const BudgetComparison& cmp)
{
    os << "h,P,C,C_extra,C_total,feasible,err_pc,err_cec,err_tc,bound_pc,bound_cec,bound_tc\n";
    for (const auto& r : cmp.rows)
        os << format_double(r.h) << ',' << r.split.P << ',' << r.split.C << ',' << r.split.C_extra << ','
           << r.split.C_total << ',' << (r.split.feasible ? 1 : 0) << ',' << opt_str(r.err_pc) << ','
           << opt_str(r.err_cec) << ',' << opt_str(r.err_tc) << ',' << format_double(r.bound_pc) << ','
           << format_double(r.bound_cec) << ',' << format_double(r.bound_tc) << '\n';
}

}  // namespace dupc
