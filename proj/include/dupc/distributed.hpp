#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "dupc/dual_solvers.hpp"
#include "dupc/tracker.hpp"

namespace dupc
{

/// Undirected simple graph on nodes 0..N-1. Edges are stored as (i, j) with
/// i < j, sorted; edge e is the e-th block row of the incidence matrix.
class CommGraph
{
public:
    CommGraph() = default;
    /// Normalises each pair to i < j. Throws InvalidArgument on self-loops,
    /// duplicates or out-of-range nodes.
    CommGraph(int N, std::vector<std::pair<int, int>> edges);

    [[nodiscard]] int N() const { return N_; }
    [[nodiscard]] const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    [[nodiscard]] const std::vector<int>& neighbors(int i) const { return neighbors_[i]; }
    /// Indices of the edges touching node i, ascending.
    [[nodiscard]] const std::vector<int>& incident_edges(int i) const { return incident_[i]; }
    [[nodiscard]] int degree(int i) const { return static_cast<int>(neighbors_[i].size()); }
    [[nodiscard]] bool connected() const;

    /// `# nodes N` header, then one `i j` line per edge.
    void write_edge_list(std::ostream& os) const;
    /// Reads `i j` lines, skipping `#` comments. N comes from a `# nodes N`
    /// comment when present, else from the largest index.
    static CommGraph read_edge_list(std::istream& is);

private:
    int N_ = 0;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> neighbors_;
    std::vector<std::vector<int>> incident_;
};

/// Erdos-Renyi with p = degree / (N - 1), redrawn until connected.
CommGraph random_connected_graph(int N, double expected_degree, std::uint64_t seed);

CommGraph path_graph(int N);

/// f_i(y; t) with y in R^n.
struct LocalObjective
{
    TimeVaryingProblem::GradientOracle grad;
    TimeVaryingProblem::HessianOracle hessian;
    TimeVaryingProblem::GradientOracle mixed_grad;
    SmoothnessBounds bounds;
};

/// sum_i f_i(y_i; t) subject to y_i - y_j = 0 on every edge.
struct LiftedProblem
{
    CommGraph graph;
    std::vector<LocalObjective> locals;
    int n = 1;
    ConstraintSet constraints;
    /// m = min m_i, L = max L_i, C1 and C2 as maxima, C0 and C3 as the
    /// Euclidean norm of the per-node bounds.
    SmoothnessBounds bounds;

    /// The same problem with stacked oracles and a block-diagonal Hessian.
    [[nodiscard]] TimeVaryingProblem centralized() const;
};

/// Incidence matrix with +I on the lower endpoint and -I on the higher one.
Matrix incidence_matrix(const CommGraph& graph, int n);

/// Throws DisconnectedGraph when the graph is not connected.
LiftedProblem build_lifted(const CommGraph& graph, std::vector<LocalObjective> locals, int n);

struct CommBudgetRow
{
    int k = 0;
    int node = 0;
    long long scalars_sent = 0;
    long long expected = 0;
};

struct CommBudgetLog
{
    std::vector<CommBudgetRow> rows;
    /// `k,node,scalars_sent`
    void write_csv(std::ostream& os) const;
};

/// Records which node touched which objective and whose messages it read.
struct AccessAudit
{
    long long oracle_calls = 0;
    long long message_reads = 0;
    std::vector<std::string> violations;

    [[nodiscard]] bool ok() const { return violations.empty(); }
};

struct DistributedConfig
{
    TrackerConfig tracker;
    /// Nonzero: process nodes within each round in a seeded random order.
    std::uint64_t node_order_seed = 0;
};

struct DistributedResult
{
    TrajectoryLog log;
    CommBudgetLog comm;
    AccessAudit audit;
    /// Every node sent exactly (P + C) N_i n scalars in every prediction step.
    bool budget_exact = false;
};

/// Node-local ADuPC in lockstep rounds. A round is: every node minimises its
/// own Lagrangian term using only the duals of incident edges, the new local
/// variables are exchanged with neighbours at a barrier, and both endpoints of
/// each edge apply the same dual update (the lower one owns it, the higher one
/// keeps a mirror). Prediction uses dual-gradient rounds only.
DistributedResult simulate_distributed_adupc(const LiftedProblem& lifted, const DistributedConfig& cfg,
                                             const PrimalDualState& init, const OracleTrajectory* oracle = nullptr);

}  // namespace dupc
