#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dupc/problem_model.hpp"

namespace dupc
{

struct TrajectoryRow
{
    int k = 0;
    double t = 0.0;
    Vector x;
    Vector lambda;
    std::optional<double> primal_err;
    std::optional<double> dual_err;
};

/// Per-step record of a tracker run. Error columns are filled only when an
/// oracle trajectory was attached.
struct TrajectoryLog
{
    std::string strategy = "running_dual_ascent";
    int P = 0;
    int C = 1;
    int C_extra = 0;
    std::vector<TrajectoryRow> rows;
    /// Largest relative distance of any logged dual iterate from im(A).
    double max_image_deviation = 0.0;
    std::vector<std::string> warnings;

    /// Header `k,t,x_0..,lambda_0..,primal_err,dual_err`, plus
    /// `strategy,P,C,C_extra` when with_strategy is set.
    void write_csv(std::ostream& os, bool with_strategy = true) const;

    /// Max error over the steps k >= ceil((1 - tail) * k_last); nullopt
    /// without an oracle.
    [[nodiscard]] std::optional<double> steady_state_primal(double tail = 0.5) const;
    [[nodiscard]] std::optional<double> steady_state_dual(double tail = 0.5) const;
};

/// Shortest round-trip representation used for every floating value we emit.
std::string format_double(double v);

}  // namespace dupc
