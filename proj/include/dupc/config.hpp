#pragma once

#include <optional>
#include <string>

#include "dupc/bench.hpp"
#include "json.hpp"

namespace dupc
{

/// One run document: scenario, single-run tracker settings, sweep and budget.
struct RunConfig
{
    Scenario scenario;
    /// Used by `run`; alpha and beta fall back to the optimal stepsize.
    TrackerConfig tracker;
    std::optional<double> alpha;
    std::optional<double> beta;
    std::optional<double> oracle_tol = 1e-11;
    SweepSpec sweep;
    RuntimeBudget budget;
    std::vector<double> budget_h_values{0.02, 0.04, 0.08, 0.16, 0.32, 0.64, 1.28, 2.56, 5.12};
};

/// Defaults with the three criterion-style sweep variants filled in.
RunConfig default_config();

nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Missing keys keep their defaults; unknown keys and ill-typed values throw ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

}  // namespace dupc
