#include "dupc/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>

#include "dupc/rng.hpp"

namespace dupc
{

CommGraph::CommGraph(int N, std::vector<std::pair<int, int>> edges) : N_(N)
{
    if (N < 1) throw InvalidArgument("graph needs at least one node");
    std::set<std::pair<int, int>> seen;
    for (auto& [i, j] : edges)
    {
        if (i < 0 || j < 0 || i >= N || j >= N) throw InvalidArgument("edge endpoint out of range");
        if (i == j) throw InvalidArgument("self-loop at node " + std::to_string(i));
        if (i > j) std::swap(i, j);
        if (!seen.insert({i, j}).second)
            throw InvalidArgument("duplicate edge " + std::to_string(i) + " " + std::to_string(j));
    }
    edges_.assign(seen.begin(), seen.end());
    neighbors_.assign(N, {});
    incident_.assign(N, {});
    for (int e = 0; e < static_cast<int>(edges_.size()); ++e)
    {
        const auto [i, j] = edges_[e];
        neighbors_[i].push_back(j);
        neighbors_[j].push_back(i);
        incident_[i].push_back(e);
        incident_[j].push_back(e);
    }
    for (auto& nb : neighbors_) std::sort(nb.begin(), nb.end());
}

bool CommGraph::connected() const
{
    if (N_ == 0) return false;
    std::vector<char> seen(N_, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    int count = 1;
    while (!q.empty())
    {
        const int u = q.front();
        q.pop();
        for (int v : neighbors_[u])
            if (!seen[v])
            {
                seen[v] = 1;
                ++count;
                q.push(v);
            }
    }
    return count == N_;
}

void CommGraph::write_edge_list(std::ostream& os) const
{
    os << "# nodes " << N_ << '\n';
    for (const auto& [i, j] : edges_) os << i << ' ' << j << '\n';
}

CommGraph CommGraph::read_edge_list(std::istream& is)
{
    std::vector<std::pair<int, int>> edges;
    int declared = -1;
    int largest = -1;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line))
    {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
        {
            std::istringstream cs(line.substr(hash + 1));
            std::string word;
            int value = 0;
            if (cs >> word && word == "nodes" && cs >> value) declared = value;
            line.erase(hash);
        }
        std::istringstream ls(line);
        int i = 0;
        int j = 0;
        if (!(ls >> i)) continue;
        std::string rest;
        if (!(ls >> j) || (ls >> rest))
            throw InvalidArgument("malformed edge on line " + std::to_string(lineno));
        edges.emplace_back(i, j);
        largest = std::max({largest, i, j});
    }
    const int N = declared >= 0 ? declared : largest + 1;
    return CommGraph(N, std::move(edges));
}

CommGraph random_connected_graph(int N, double expected_degree, std::uint64_t seed)
{
    if (N < 2) throw InvalidArgument("random graph needs at least two nodes");
    if (!(expected_degree > 0.0)) throw InvalidArgument("expected degree must be positive");
    const double p = std::min(1.0, expected_degree / (N - 1));
    for (std::uint64_t attempt = 0; attempt < 10000; ++attempt)
    {
        Rng rng(stream_seed(seed, attempt));
        std::vector<std::pair<int, int>> edges;
        for (int i = 0; i < N; ++i)
            for (int j = i + 1; j < N; ++j)
                if (rng.uniform() < p) edges.emplace_back(i, j);
        CommGraph g(N, std::move(edges));
        if (g.connected()) return g;
    }
    throw DisconnectedGraph("no connected graph drawn in 10000 attempts; raise the expected degree");
}

CommGraph path_graph(int N)
{
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < N; ++i) edges.emplace_back(i, i + 1);
    return CommGraph(N, std::move(edges));
}

Matrix incidence_matrix(const CommGraph& graph, int n)
{
    const auto& edges = graph.edges();
    Matrix A = Matrix::Zero(static_cast<Eigen::Index>(edges.size()) * n, static_cast<Eigen::Index>(graph.N()) * n);
    for (int e = 0; e < static_cast<int>(edges.size()); ++e)
    {
        const auto [i, j] = edges[e];
        A.block(e * n, i * n, n, n) = Matrix::Identity(n, n);
        A.block(e * n, j * n, n, n) = -Matrix::Identity(n, n);
    }
    return A;
}

LiftedProblem build_lifted(const CommGraph& graph, std::vector<LocalObjective> locals, int n)
{
    if (n < 1) throw InvalidArgument("local dimension must be positive");
    if (static_cast<int>(locals.size()) != graph.N()) throw InvalidArgument("need one local objective per node");
    if (graph.edges().empty()) throw InvalidArgument("graph has no edges");
    if (!graph.connected()) throw DisconnectedGraph("communication graph is not connected");

    LiftedProblem lp;
    lp.graph = graph;
    lp.n = n;
    const Matrix A = incidence_matrix(graph, n);
    lp.constraints = analyze_constraints(A, Vector::Zero(A.rows()));

    SmoothnessBounds agg;
    agg.m = locals.front().bounds.m;
    agg.L = locals.front().bounds.L;
    double c0 = 0.0;
    double c3 = 0.0;
    for (const auto& f : locals)
    {
        f.bounds.validate();
        agg.m = std::min(agg.m, f.bounds.m);
        agg.L = std::max(agg.L, f.bounds.L);
        agg.C1 = std::max(agg.C1, f.bounds.C1);
        agg.C2 = std::max(agg.C2, f.bounds.C2);
        c0 += f.bounds.C0 * f.bounds.C0;
        c3 += f.bounds.C3 * f.bounds.C3;
    }
    agg.C0 = std::sqrt(c0);
    agg.C3 = std::sqrt(c3);
    lp.bounds = agg;
    lp.locals = std::move(locals);
    return lp;
}

TimeVaryingProblem LiftedProblem::centralized() const
{
    TimeVaryingProblem p;
    const int N = graph.N();
    const int nn = n;
    const std::vector<LocalObjective> fs = locals;
    p.dimension = N * nn;
    p.grad = [fs, N, nn](const Vector& x, double t) {
        Vector g(N * nn);
        for (int i = 0; i < N; ++i) g.segment(i * nn, nn) = fs[i].grad(x.segment(i * nn, nn), t);
        return g;
    };
    p.hessian = [fs, N, nn](const Vector& x, double t) {
        Matrix H = Matrix::Zero(N * nn, N * nn);
        for (int i = 0; i < N; ++i) H.block(i * nn, i * nn, nn, nn) = fs[i].hessian(x.segment(i * nn, nn), t);
        return H;
    };
    const bool has_mixed = std::all_of(fs.begin(), fs.end(), [](const LocalObjective& f) { return bool(f.mixed_grad); });
    if (has_mixed)
    {
        p.mixed_grad = [fs, N, nn](const Vector& x, double t) {
            Vector g(N * nn);
            for (int i = 0; i < N; ++i) g.segment(i * nn, nn) = fs[i].mixed_grad(x.segment(i * nn, nn), t);
            return g;
        };
    }
    p.bounds = bounds;
    p.constraints = constraints;
    return p;
}

void CommBudgetLog::write_csv(std::ostream& os) const
{
    os << "k,node,scalars_sent\n";
    for (const auto& r : rows) os << r.k << ',' << r.node << ',' << r.scalars_sent << '\n';
}

namespace
{

struct NodeState
{
    Vector y;
    /// Dual of each incident edge, in graph.incident_edges(i) order.
    std::vector<Vector> dual;
    std::vector<Vector> delta_dual;
    /// +1 on the lower endpoint of the edge, -1 on the higher one.
    std::vector<double> sign;
    std::vector<int> peer;
    /// Last value received from each peer, same order as `dual`.
    std::vector<Vector> inbox;
    long long sent = 0;
    Eigen::LLT<Matrix> hessian_factor;
    Vector mixed;
};

/// Message passing with barrier delivery and access checks.
class Network
{
public:
    Network(const CommGraph& g, AccessAudit& audit) : graph_(g), audit_(audit), pending_(g.N()) {}

    void send(int from, int to, const Vector& v, NodeState& sender)
    {
        const auto& nb = graph_.neighbors(from);
        if (!std::binary_search(nb.begin(), nb.end(), to))
            audit_.violations.push_back("node " + std::to_string(from) + " sent to non-neighbour " + std::to_string(to));
        pending_[to].push_back({from, v});
        sender.sent += v.size();
    }

    /// Delivers every pending message into the recipients' inboxes.
    void barrier(std::vector<NodeState>& nodes)
    {
        for (int to = 0; to < graph_.N(); ++to)
        {
            for (auto& [from, v] : pending_[to])
            {
                auto& node = nodes[to];
                const auto it = std::find(node.peer.begin(), node.peer.end(), from);
                if (it == node.peer.end())
                {
                    audit_.violations.push_back("node " + std::to_string(to) + " received from non-neighbour " +
                                                std::to_string(from));
                    continue;
                }
                node.inbox[it - node.peer.begin()] = std::move(v);
                ++audit_.message_reads;
            }
            pending_[to].clear();
        }
    }

private:
    const CommGraph& graph_;
    AccessAudit& audit_;
    std::vector<std::vector<std::pair<int, Vector>>> pending_;
};

class Simulator
{
public:
    Simulator(const LiftedProblem& lp, const DistributedConfig& cfg, DistributedResult& out)
        : lp_(lp), cfg_(cfg.tracker), out_(out), net_(lp.graph, out.audit), order_(lp.graph.N())
    {
        std::iota(order_.begin(), order_.end(), 0);
        if (cfg.node_order_seed != 0) rng_.emplace(cfg.node_order_seed);
    }

    void init(const PrimalDualState& s)
    {
        const int N = lp_.graph.N();
        const int n = lp_.n;
        nodes_.resize(N);
        for (int i = 0; i < N; ++i)
        {
            NodeState& node = nodes_[i];
            node.y = s.x.segment(i * n, n);
            for (int e : lp_.graph.incident_edges(i))
            {
                const auto [lo, hi] = lp_.graph.edges()[e];
                node.dual.push_back(s.lambda.segment(e * n, n));
                node.delta_dual.push_back(Vector::Zero(n));
                node.sign.push_back(lo == i ? 1.0 : -1.0);
                node.peer.push_back(lo == i ? hi : lo);
                node.inbox.push_back(Vector::Zero(n));
            }
        }
    }

    const LocalObjective& objective(int caller, int owner)
    {
        ++out_.audit.oracle_calls;
        if (caller != owner)
            out_.audit.violations.push_back("node " + std::to_string(caller) + " evaluated the objective of node " +
                                            std::to_string(owner));
        return lp_.locals[owner];
    }

    /// Per-node mixed gradient at (y_i, t_k); false when unavailable (first
    /// backward-difference step).
    bool mixed_gradients(int k, double t_k, double t_km1)
    {
        if (cfg_.derivative_mode == DerivativeMode::backward_difference && k == 0) return false;
        for (int i : schedule())
        {
            const LocalObjective& f = objective(i, i);
            NodeState& node = nodes_[i];
            if (cfg_.derivative_mode == DerivativeMode::exact)
                node.mixed = f.mixed_grad(node.y, t_k);
            else
                node.mixed = (f.grad(node.y, t_k) - f.grad(node.y, t_km1)) / (t_k - t_km1);
        }
        return true;
    }

    void predict(double t_k)
    {
        for (int i : schedule())
        {
            NodeState& node = nodes_[i];
            node.hessian_factor.compute(objective(i, i).hessian(node.y, t_k));
            if (node.hessian_factor.info() != Eigen::Success)
                throw SingularHessian("local prediction Hessian of node " + std::to_string(i) + " is not positive definite");
            for (auto& d : node.delta_dual) d.setZero();
        }

        std::vector<Vector> dy(nodes_.size());
        for (int r = 0; r < cfg_.P; ++r)
        {
            for (int i : schedule())
            {
                NodeState& node = nodes_[i];
                dy[i] = -node.hessian_factor.solve(cfg_.h * node.mixed + dual_force(node, node.delta_dual));
                for (int peer : node.peer) net_.send(i, peer, dy[i], node);
            }
            net_.barrier(nodes_);
            for (int i : schedule()) edge_update(nodes_[i], dy[i], node_delta_duals(i), cfg_.beta);
        }

        for (int i : schedule())
        {
            NodeState& node = nodes_[i];
            node.y += dy[i];
            for (std::size_t e = 0; e < node.dual.size(); ++e) node.dual[e] += node.delta_dual[e];
        }
    }

    void correct(double t_next)
    {
        for (int r = 0; r < cfg_.C; ++r)
        {
            for (int i : schedule())
            {
                NodeState& node = nodes_[i];
                const LocalObjective& f = objective(i, i);
                const Vector force = dual_force(node, node.dual);
                node.y = damped_newton([&](const Vector& v) { return Vector(f.grad(v, t_next) + force); },
                                       [&](const Vector& v) { return f.hessian(v, t_next); }, node.y,
                                       cfg_.inner_tol, cfg_.inner_max_iters);
                for (int peer : node.peer) net_.send(i, peer, node.y, node);
            }
            net_.barrier(nodes_);
            for (int i : schedule()) edge_update(nodes_[i], nodes_[i].y, node_duals(i), cfg_.alpha);
        }
    }

    void stack(Vector& x, Vector& lambda)
    {
        const int n = lp_.n;
        x.resize(static_cast<Eigen::Index>(nodes_.size()) * n);
        lambda.resize(static_cast<Eigen::Index>(lp_.graph.edges().size()) * n);
        for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
        {
            const NodeState& node = nodes_[i];
            x.segment(i * n, n) = node.y;
            const auto& inc = lp_.graph.incident_edges(i);
            for (std::size_t e = 0; e < inc.size(); ++e)
            {
                if (node.sign[e] > 0)
                {
                    lambda.segment(inc[e] * n, n) = node.dual[e];
                    continue;
                }
                const NodeState& owner = nodes_[node.peer[e]];
                const auto& oinc = lp_.graph.incident_edges(node.peer[e]);
                const auto pos = std::find(oinc.begin(), oinc.end(), inc[e]) - oinc.begin();
                if (owner.dual[pos] != node.dual[e])
                    out_.audit.violations.push_back("mirror of edge " + std::to_string(inc[e]) + " diverged at node " +
                                                    std::to_string(i));
            }
        }
    }

    void reset_counters()
    {
        for (auto& node : nodes_) node.sent = 0;
    }

    long long sent(int i) const { return nodes_[i].sent; }

private:
    const std::vector<int>& schedule()
    {
        if (rng_)
            for (std::size_t i = order_.size(); i > 1; --i)
                std::swap(order_[i - 1], order_[rng_->below(i)]);
        return order_;
    }

    static Vector dual_force(const NodeState& node, const std::vector<Vector>& duals)
    {
        Vector f = Vector::Zero(node.y.size());
        for (std::size_t e = 0; e < duals.size(); ++e) f += node.sign[e] * duals[e];
        return f;
    }

    std::vector<Vector>& node_duals(int i) { return nodes_[i].dual; }
    std::vector<Vector>& node_delta_duals(int i) { return nodes_[i].delta_dual; }

    /// lambda_e += step (y_lo - y_hi) using the node's own value and the one
    /// received from the peer; both endpoints compute the same number.
    void edge_update(NodeState& node, const Vector& own, std::vector<Vector>& duals, double step)
    {
        for (std::size_t e = 0; e < duals.size(); ++e)
        {
            const Vector& other = node.inbox[e];
            ++out_.audit.message_reads;
            if (node.sign[e] > 0)
                duals[e] += step * (own - other);
            else
                duals[e] += step * (other - own);
        }
    }

    const LiftedProblem& lp_;
    const TrackerConfig& cfg_;
    DistributedResult& out_;
    Network net_;
    std::vector<NodeState> nodes_;
    std::vector<int> order_;
    std::optional<Rng> rng_;
};

}  // namespace

DistributedResult simulate_distributed_adupc(const LiftedProblem& lifted, const DistributedConfig& cfg,
                                             const PrimalDualState& init, const OracleTrajectory* oracle)
{
    const TrackerConfig& tc = cfg.tracker;
    tc.validate();
    if (tc.strategy != Strategy::adupc) throw ConfigError("distributed simulation runs adupc only");
    if (tc.prediction_mode != PredictionMode::dual_gradient)
        throw ConfigError("distributed prediction uses dual-gradient rounds");
    if (tc.derivative_mode == DerivativeMode::exact &&
        !std::all_of(lifted.locals.begin(), lifted.locals.end(), [](const LocalObjective& f) { return bool(f.mixed_grad); }))
        throw ConfigError("local objectives lack mixed gradients; use backward_difference");

    const int N = lifted.graph.N();
    const int n = lifted.n;
    if (init.x.size() != N * n || init.lambda.size() != lifted.constraints.rows())
        throw InvalidArgument("initial state does not match the lifted problem");

    const std::vector<double> times = sampling_times(tc);
    if (oracle && oracle->solutions.size() != times.size())
        throw InvalidArgument("oracle trajectory does not match the sampling schedule");

    DistributedResult out;
    out.log.strategy = "adupc_distributed";
    out.log.P = tc.P;
    out.log.C = tc.C;
    if (auto w = stepsize_warning("alpha", tc.alpha, lifted.bounds, lifted.constraints)) out.log.warnings.push_back(*w);
    if (tc.P > 0)
        if (auto w = stepsize_warning("beta", tc.beta, lifted.bounds, lifted.constraints)) out.log.warnings.push_back(*w);

    Simulator sim(lifted, cfg, out);
    sim.init(init);

    auto record = [&](int k) {
        Vector x;
        Vector lambda;
        sim.stack(x, lambda);
        TrajectoryRow row{k, times[k], x, lambda, std::nullopt, std::nullopt};
        if (oracle)
        {
            row.primal_err = (x - oracle->solutions[k].x_star).norm();
            row.dual_err = (lambda - oracle->solutions[k].lambda_star).norm();
        }
        out.log.max_image_deviation = std::max(out.log.max_image_deviation, image_deviation(lambda, lifted.constraints));
        out.log.rows.push_back(std::move(row));
    };

    record(0);
    out.budget_exact = true;
    for (int k = 0; k < tc.k_max; ++k)
    {
        sim.reset_counters();
        bool predicted = false;
        try
        {
            if (tc.P > 0 && sim.mixed_gradients(k, times[k], k > 0 ? times[k - 1] : times[k]))
            {
                sim.predict(times[k]);
                predicted = true;
            }
            sim.correct(times[k + 1]);
        }
        catch (Error& e)
        {
            e.attach_step(k + 1);
            throw;
        }
        const int rounds = (predicted ? tc.P : 0) + tc.C;
        for (int i = 0; i < N; ++i)
        {
            const long long expected = static_cast<long long>(rounds) * lifted.graph.degree(i) * n;
            out.comm.rows.push_back({k + 1, i, sim.sent(i), expected});
            if (sim.sent(i) != expected) out.budget_exact = false;
            if (predicted && sim.sent(i) != static_cast<long long>(tc.P + tc.C) * lifted.graph.degree(i) * n)
                out.budget_exact = false;
        }
        record(k + 1);
    }
    return out;
}

}  // namespace dupc
