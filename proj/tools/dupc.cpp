#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "dupc/bench.hpp"
#include "dupc/bounds.hpp"
#include "dupc/config.hpp"
#include "dupc/distributed.hpp"
#include "dupc/tracker.hpp"

namespace fs = std::filesystem;
using namespace dupc;

namespace
{

struct Common
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    int threads = std::max(1u, std::thread::hardware_concurrency());
};

RunConfig load(const Common& c)
{
    RunConfig cfg = c.config.empty() ? default_config() : load_config(c.config);
    if (c.seed)
    {
        cfg.scenario.seed = *c.seed;
        cfg.sweep.seeds = {*c.seed};
    }
    return cfg;
}

/// Opens out_dir/name, or returns stdout when no directory was given.
std::ostream& sink(const Common& c, const std::string& name, std::ofstream& file)
{
    if (c.out_dir.empty()) return std::cout;
    fs::create_directories(c.out_dir);
    file.open(fs::path(c.out_dir) / name);
    if (!file) throw ConfigError("cannot write " + (fs::path(c.out_dir) / name).string());
    return file;
}

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--config", c.config, "JSON config file");
    sub->add_option("--seed", c.seed, "Override the scenario seed");
    sub->add_option("--out-dir", c.out_dir, "Directory for output files");
    sub->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

struct AnalyzeArgs
{
    std::optional<double> m, L, C0, C1, C2, C3, sigma_max, sigma_min, alpha, beta, h;
    std::optional<int> P, C, C_extra, C_total;
    bool backward = false;
    bool json_only = false;
};

int cmd_analyze(const Common& c, const AnalyzeArgs& a)
{
    const RunConfig cfg = load(c);
    AnalysisInputs in;
    const bool explicit_spectrum = a.sigma_max && a.sigma_min;
    if (explicit_spectrum)
    {
        in.spectral = {*a.sigma_max, *a.sigma_min};
        in.bounds = {};
    }
    else
    {
        const GeneratedScenario gen = generate_scenario(cfg.scenario);
        in.bounds = gen.problem.bounds;
        in.spectral = spectral(gen.problem.constraints);
    }
    auto set = [](auto& dst, const auto& src) {
        if (src) dst = *src;
    };
    set(in.bounds.m, a.m);
    set(in.bounds.L, a.L);
    set(in.bounds.C0, a.C0);
    set(in.bounds.C1, a.C1);
    set(in.bounds.C2, a.C2);
    set(in.bounds.C3, a.C3);
    in.bounds.validate();

    const double opt = 2.0 / (in.spectral.sigma_max * in.spectral.sigma_max / in.bounds.m +
                              in.spectral.sigma_min * in.spectral.sigma_min / in.bounds.L);
    in.alpha = a.alpha.value_or(cfg.alpha.value_or(opt));
    in.beta = a.beta.value_or(cfg.beta.value_or(opt));
    in.P = a.P.value_or(cfg.tracker.P);
    in.C = a.C.value_or(cfg.tracker.C);
    in.C_extra = a.C_extra.value_or(cfg.tracker.C_extra);
    in.C_total = a.C_total.value_or(cfg.tracker.C_total);
    in.h = a.h.value_or(cfg.tracker.h);
    in.mode = a.backward || cfg.tracker.derivative_mode == DerivativeMode::backward_difference
                  ? BoundMode::backward_difference
                  : BoundMode::exact_derivative;

    const BoundReport r = compute_bound_report(in);
    if (!a.json_only)
    {
        std::cout << "sigma_max     " << in.spectral.sigma_max << "\nsigma_min     " << in.spectral.sigma_min
                  << "\nkappa_A       " << in.spectral.kappa_A() << '\n';
        write_report_text(std::cout, r);
        std::cout << '\n';
    }
    std::cout << report_to_json(r) << '\n';
    if (!c.out_dir.empty())
    {
        std::ofstream f;
        sink(c, "bounds.json", f) << report_to_json(r) << '\n';
    }
    return 0;
}

int cmd_run(const Common& c, bool distributed)
{
    const RunConfig cfg = load(c);
    const GeneratedScenario gen = generate_scenario(cfg.scenario);
    const TimeVaryingProblem& problem = gen.problem;

    TrackerConfig tc = cfg.tracker;
    const double opt = optimal_stepsize(problem.bounds, problem.constraints);
    tc.alpha = cfg.alpha.value_or(opt);
    tc.beta = cfg.beta.value_or(opt);
    tc.validate();

    std::optional<OracleTrajectory> oracle;
    if (cfg.oracle_tol) oracle = compute_oracle_trajectory(problem, sampling_times(tc), *cfg.oracle_tol);
    const OracleTrajectory* op = oracle ? &*oracle : nullptr;

    TrajectoryLog log;
    if (distributed)
    {
        if (!gen.lifted) throw ConfigError("distributed runs need a consensus scenario");
        DistributedConfig dc;
        dc.tracker = tc;
        const DistributedResult res = simulate_distributed_adupc(*gen.lifted, dc, zero_state(problem), op);
        log = res.log;
        std::ofstream f;
        if (!c.out_dir.empty()) res.comm.write_csv(sink(c, "comm_budget.csv", f));
        std::cerr << "budget exact: " << (res.budget_exact ? "yes" : "no")
                  << ", access audit: " << (res.audit.ok() ? "clean" : "VIOLATIONS") << '\n';
        for (const auto& v : res.audit.violations) std::cerr << "  " << v << '\n';
        if (!res.budget_exact || !res.audit.ok()) return 1;
    }
    else
    {
        log = run_strategy(problem, tc, zero_state(problem), op);
    }

    for (const auto& w : log.warnings) std::cerr << "warning: " << w << '\n';
    std::ofstream f;
    log.write_csv(sink(c, "trajectory.csv", f));
    if (oracle)
    {
        std::cerr << "steady-state primal error " << format_double(*log.steady_state_primal(cfg.sweep.tail))
                  << ", dual error " << format_double(*log.steady_state_dual(cfg.sweep.tail)) << '\n';
    }
    std::cerr << "max dual deviation from im(A) " << format_double(log.max_image_deviation) << '\n';
    return 0;
}

int cmd_sweep(const Common& c, bool write_logs)
{
    const RunConfig cfg = load(c);
    SweepOptions opts;
    opts.threads = c.threads;
    if (write_logs && !c.out_dir.empty()) opts.log_dir = (fs::path(c.out_dir) / "runs").string();
    const SweepResult res = run_sweep(cfg.scenario, cfg.sweep, opts);

    std::ofstream f;
    write_summary_csv(sink(c, "summary.csv", f), res);
    if (!c.out_dir.empty())
    {
        std::ofstream fi(fs::path(c.out_dir) / "issues.csv");
        write_issues_csv(fi, res);
    }
    for (const auto& r : res.rows)
        if (!r.issue.empty()) std::cerr << "h=" << r.h << " " << r.strategy << ": " << r.issue << '\n';
    for (const auto& v : cfg.sweep.variants)
    {
        try
        {
            if (auto fit = sweep_slope(res, v.label))
                std::cerr << "slope " << v.label << " = " << fit->slope << " (r2 " << fit->r2 << ")\n";
        }
        catch (const Error& e)
        {
            std::cerr << "slope " << v.label << ": " << e.what() << '\n';
        }
    }
    return res.any_failed() ? 1 : 0;
}

int cmd_compare(const Common& c)
{
    const RunConfig cfg = load(c);
    SweepOptions opts;
    opts.threads = c.threads;
    const BudgetComparison cmp = compare_budgeted(cfg.scenario, cfg.budget, cfg.budget_h_values, cfg.sweep, opts);
    std::ofstream f;
    write_budget_csv(sink(c, "budget.csv", f), cmp);
    for (const auto& r : cmp.rows)
        if (!r.issue.empty()) std::cerr << "h=" << r.h << ": " << r.issue << '\n';
    return cmp.any_failed() ? 1 : 0;
}

int cmd_graph(const Common& c, int N, double degree, const std::string& out)
{
    const RunConfig cfg = load(c);
    const CommGraph g = random_connected_graph(N > 0 ? N : cfg.scenario.N,
                                               degree > 0 ? degree : cfg.scenario.graph.expected_degree,
                                               cfg.scenario.seed);
    if (out.empty())
    {
        g.write_edge_list(std::cout);
        return 0;
    }
    std::ofstream f(out);
    if (!f) throw ConfigError("cannot write " + out);
    g.write_edge_list(f);
    return 0;
}

int cmd_calibrate(const Common& c, int steps)
{
    const RunConfig cfg = load(c);
    const GeneratedScenario gen = generate_scenario(cfg.scenario);
    const TimeVaryingProblem& problem = gen.problem;
    const double opt = optimal_stepsize(problem.bounds, problem.constraints);
    using clock = std::chrono::steady_clock;

    PrimalDualState s = zero_state(problem);
    auto t0 = clock::now();
    for (int k = 0; k < steps; ++k)
        dual_ascent_rounds(problem, k * 0.1, s.x, s.lambda, opt, 1, cfg.tracker.inner_tol, cfg.tracker.inner_max_iters);
    const double t_C = std::chrono::duration<double>(clock::now() - t0).count() / steps;

    t0 = clock::now();
    for (int k = 0; k < steps; ++k) (void)problem.hessian(s.x, k * 0.1).llt();
    const double t_bar = std::chrono::duration<double>(clock::now() - t0).count() / steps;

    PredictionConfig pc{opt, steps, PredictionMode::dual_gradient, DerivativeMode::exact};
    const Vector mixed = problem.mixed_grad ? problem.mixed_grad(s.x, 0.0) : Vector::Zero(problem.dimension);
    t0 = clock::now();
    (void)approx_prediction(problem, s, 0.1, mixed, pc);
    const double t_P = std::chrono::duration<double>(clock::now() - t0).count() / steps;

    nlohmann::ordered_json j;
    j["budget"] = {{"r1", cfg.budget.r1}, {"r2", cfg.budget.r2}, {"t_C", t_C}, {"t_P", t_P}, {"t_bar", t_bar},
                   {"h_values", cfg.budget_h_values}};
    std::ofstream f;
    sink(c, "budget_calibrated.json", f) << j.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dual prediction-correction tracking of time-varying constrained programs"};
    app.require_subcommand(1);
    Common common;

    AnalyzeArgs aa;
    auto* analyze = app.add_subcommand("analyze", "Print every bound for the configured constants");
    add_common(analyze, common);
    analyze->add_option("--m", aa.m);
    analyze->add_option("--L", aa.L);
    analyze->add_option("--C0", aa.C0);
    analyze->add_option("--C1", aa.C1);
    analyze->add_option("--C2", aa.C2);
    analyze->add_option("--C3", aa.C3);
    analyze->add_option("--sigma-max", aa.sigma_max);
    analyze->add_option("--sigma-min", aa.sigma_min);
    analyze->add_option("--alpha", aa.alpha);
    analyze->add_option("--beta", aa.beta);
    analyze->add_option("--P", aa.P);
    analyze->add_option("--C", aa.C);
    analyze->add_option("--C-extra", aa.C_extra);
    analyze->add_option("--C-total", aa.C_total);
    analyze->add_option("--sampling-period", aa.h, "Sampling period h");
    analyze->add_flag("--backward-difference", aa.backward, "Bound for backward-difference derivatives");
    analyze->add_flag("--json", aa.json_only, "Print only the JSON report");

    bool distributed = false;
    auto* run = app.add_subcommand("run", "Run one tracker and write its trajectory");
    add_common(run, common);
    run->add_flag("--distributed", distributed, "Node-local simulation of a consensus scenario");

    bool write_logs = false;
    auto* sweep = app.add_subcommand("sweep", "Sweep sampling periods and write summary.csv");
    add_common(sweep, common);
    sweep->add_flag("--logs", write_logs, "Also write each run's trajectory under out-dir/runs");

    auto* compare = app.add_subcommand("compare-budget", "Compare strategies under a fixed run-time budget");
    add_common(compare, common);

    int graph_n = 0;
    double graph_degree = 0.0;
    std::string graph_out;
    auto* graph = app.add_subcommand("graph-gen", "Draw a connected random graph as an edge list");
    add_common(graph, common);
    graph->add_option("--nodes", graph_n, "Node count (default: scenario N)");
    graph->add_option("--degree", graph_degree, "Expected degree (default: scenario value)");
    graph->add_option("--out", graph_out, "Output file (default: stdout)");

    bool defaults = false;
    auto* config = app.add_subcommand("config", "Configuration helpers");
    config->add_flag("--defaults", defaults, "Print the default configuration")->required();

    int cal_steps = 50;
    auto* calibrate = app.add_subcommand("calibrate", "Measure t_C, t_P and t_bar on this machine");
    add_common(calibrate, common);
    calibrate->add_option("--steps", cal_steps)->check(CLI::PositiveNumber);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (*analyze) return cmd_analyze(common, aa);
        if (*run) return cmd_run(common, distributed);
        if (*sweep) return cmd_sweep(common, write_logs);
        if (*compare) return cmd_compare(common);
        if (*graph) return cmd_graph(common, graph_n, graph_degree, graph_out);
        if (*config)
        {
            std::cout << to_json(default_config()).dump(2) << '\n';
            return 0;
        }
        if (*calibrate) return cmd_calibrate(common, cal_steps);
    }
    catch (const ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
