#include "dupc/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>

namespace dupc
{

std::string format_double(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void TrajectoryLog::write_csv(std::ostream& os, bool with_strategy) const
{
    const Eigen::Index n = rows.empty() ? 0 : rows.front().x.size();
    const Eigen::Index p = rows.empty() ? 0 : rows.front().lambda.size();

    os << "k,t";
    for (Eigen::Index i = 0; i < n; ++i) os << ",x_" << i;
    for (Eigen::Index i = 0; i < p; ++i) os << ",lambda_" << i;
    os << ",primal_err,dual_err";
    if (with_strategy) os << ",strategy,P,C,C_extra";
    os << '\n';

    for (const auto& r : rows)
    {
        os << r.k << ',' << format_double(r.t);
        for (Eigen::Index i = 0; i < r.x.size(); ++i) os << ',' << format_double(r.x(i));
        for (Eigen::Index i = 0; i < r.lambda.size(); ++i) os << ',' << format_double(r.lambda(i));
        os << ',';
        if (r.primal_err) os << format_double(*r.primal_err);
        os << ',';
        if (r.dual_err) os << format_double(*r.dual_err);
        if (with_strategy) os << ',' << strategy << ',' << P << ',' << C << ',' << C_extra;
        os << '\n';
    }
}

namespace
{

template <typename Field>
std::optional<double> tail_max(const std::vector<TrajectoryRow>& rows, double tail, Field field)
{
    if (rows.empty()) return std::nullopt;
    const int k_last = rows.back().k;
    const int k_from = static_cast<int>(std::ceil((1.0 - tail) * k_last));
    std::optional<double> best;
    for (const auto& r : rows)
    {
        if (r.k < k_from) continue;
        const auto& v = field(r);
        if (!v) return std::nullopt;
        best = best ? std::max(*best, *v) : *v;
    }
    return best;
}

}  // namespace

std::optional<double> TrajectoryLog::steady_state_primal(double tail) const
{
    return tail_max(rows, tail, [](const TrajectoryRow& r) -> const auto& { return r.primal_err; });
}

std::optional<double> TrajectoryLog::steady_state_dual(double tail) const
{
    return tail_max(rows, tail, [](const TrajectoryRow& r) -> const auto& { return r.dual_err; });
}

}  // namespace dupc
