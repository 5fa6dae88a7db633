#include <cmath>
#include <sstream>

#include "doctest.h"
#include "dupc/distributed.hpp"
#include "dupc/scenario.hpp"
#include "helpers.hpp"

using namespace dupc;

namespace
{

LocalObjective static_local(double target)
{
    LocalObjective f;
    f.grad = [target](const Vector& y, double) { return Vector(y.array() - target); };
    f.hessian = [](const Vector& y, double) { return Matrix(Matrix::Identity(y.size(), y.size())); };
    f.mixed_grad = [](const Vector& y, double) { return Vector(Vector::Zero(y.size())); };
    f.bounds = {1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    return f;
}

GeneratedScenario consensus(int N, double degree, std::uint64_t seed, int n = 1)
{
    Scenario sc;
    sc.N = N;
    sc.n = n;
    sc.seed = seed;
    sc.omega = 0.5;
    sc.graph.expected_degree = degree;
    return generate_scenario(sc);
}

TrackerConfig tracker_for(const LiftedProblem& lifted, int P, int C)
{
    TrackerConfig cfg;
    cfg.alpha = optimal_stepsize(lifted.bounds, lifted.constraints);
    cfg.beta = cfg.alpha;
    cfg.P = P;
    cfg.C = C;
    cfg.h = 0.1;
    cfg.k_max = 30;
    cfg.inner_tol = 1e-13;
    return cfg;
}

double max_coordinate_gap(const TrajectoryLog& a, const TrajectoryLog& b)
{
    double gap = 0.0;
    for (std::size_t k = 0; k < a.rows.size(); ++k)
    {
        gap = std::max(gap, (a.rows[k].x - b.rows[k].x).cwiseAbs().maxCoeff());
        gap = std::max(gap, (a.rows[k].lambda - b.rows[k].lambda).cwiseAbs().maxCoeff());
    }
    return gap;
}

}  // namespace

TEST_CASE("graph construction and validation")
{
    const CommGraph g(4, {{2, 1}, {0, 1}, {3, 2}});
    REQUIRE(g.edges().size() == 3);
    CHECK(g.edges()[0] == std::make_pair(0, 1));
    CHECK(g.edges()[1] == std::make_pair(1, 2));
    CHECK(g.edges()[2] == std::make_pair(2, 3));
    CHECK(g.degree(1) == 2);
    CHECK(g.neighbors(2) == std::vector<int>{1, 3});
    CHECK(g.incident_edges(2) == std::vector<int>{1, 2});
    CHECK(g.connected());
    CHECK_FALSE(CommGraph(4, {{0, 1}, {2, 3}}).connected());

    CHECK_THROWS_AS(CommGraph(3, {{1, 1}}), InvalidArgument);
    CHECK_THROWS_AS(CommGraph(3, {{0, 1}, {1, 0}}), InvalidArgument);
    CHECK_THROWS_AS(CommGraph(3, {{0, 3}}), InvalidArgument);
    CHECK_THROWS_AS(CommGraph(0, {}), InvalidArgument);
}

TEST_CASE("edge list round trip")
{
    const CommGraph g = random_connected_graph(12, 3.0, 5);
    std::ostringstream os;
    g.write_edge_list(os);
    CHECK(os.str().rfind("# nodes 12\n", 0) == 0);
    std::istringstream is(os.str());
    const CommGraph back = CommGraph::read_edge_list(is);
    CHECK(back.N() == 12);
    CHECK(back.edges() == g.edges());

    std::istringstream extra("# nodes 5\n0 1 # first\n\n1 2\n");
    const CommGraph h = CommGraph::read_edge_list(extra);
    CHECK(h.N() == 5);
    CHECK(h.edges().size() == 2);

    std::istringstream implicit("0 1\n1 3\n");
    CHECK(CommGraph::read_edge_list(implicit).N() == 4);

    std::istringstream bad("0 1 2\n");
    CHECK_THROWS_AS(CommGraph::read_edge_list(bad), InvalidArgument);
    std::istringstream half("0\n");
    CHECK_THROWS_AS(CommGraph::read_edge_list(half), InvalidArgument);
}

TEST_CASE("random graphs are connected and seeded")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        const CommGraph a = random_connected_graph(20, 3.0, seed);
        const CommGraph b = random_connected_graph(20, 3.0, seed);
        CHECK(a.connected());
        CHECK(a.edges() == b.edges());
    }
    CHECK(random_connected_graph(20, 3.0, 1).edges() != random_connected_graph(20, 3.0, 2).edges());
    CHECK(random_connected_graph(6, 50.0, 1).edges().size() == 15);
    CHECK_THROWS_AS(random_connected_graph(1, 3.0, 1), InvalidArgument);
}

TEST_CASE("lifted problem examples")
{
    const LiftedProblem path = build_lifted(path_graph(3), {static_local(0), static_local(1), static_local(2)}, 1);
    Matrix A(2, 3);
    A << 1, -1, 0, 0, 1, -1;
    CHECK(path.constraints.A() == A);
    CHECK(std::abs(path.constraints.kappa_A() - std::sqrt(3.0)) < 1e-12);
    CHECK(path.constraints.rank() == 2);

    const LiftedProblem edge = build_lifted(path_graph(2), {static_local(0), static_local(1)}, 1);
    CHECK(edge.constraints.A() == (Matrix(1, 2) << 1, -1).finished());
    CHECK(edge.constraints.rank() == 1);

    const CommGraph tri(3, {{0, 1}, {0, 2}, {1, 2}});
    const LiftedProblem t = build_lifted(tri, {static_local(0), static_local(1), static_local(2)}, 1);
    CHECK(t.constraints.rows() == 3);
    CHECK(t.constraints.cols() == 3);
    CHECK(t.constraints.rank() == 2);

    const Matrix B = incidence_matrix(path_graph(3), 2);
    CHECK(B.rows() == 4);
    CHECK(B.cols() == 6);
    CHECK(B.block(0, 0, 2, 2) == Matrix::Identity(2, 2));
    CHECK(B.block(0, 2, 2, 2) == -Matrix::Identity(2, 2));
}

TEST_CASE("lifted problem rejects bad inputs")
{
    CHECK_THROWS_AS(build_lifted(CommGraph(4, {{0, 1}, {2, 3}}),
                                 {static_local(0), static_local(0), static_local(0), static_local(0)}, 1),
                    DisconnectedGraph);
    CHECK_THROWS_AS(build_lifted(path_graph(3), {static_local(0)}, 1), InvalidArgument);
    CHECK_THROWS_AS(build_lifted(CommGraph(1, {}), {static_local(0)}, 1), InvalidArgument);
}

TEST_CASE("centralized view stacks the local oracles")
{
    const GeneratedScenario gen = consensus(6, 3.0, 3, 2);
    const LiftedProblem& lifted = *gen.lifted;
    const TimeVaryingProblem p = lifted.centralized();
    CHECK(p.dimension == 12);
    Rng rng(1);
    const Vector y = testing::gaussian(rng, 12, 1);
    const Vector g = p.grad(y, 0.7);
    const Matrix H = p.hessian(y, 0.7);
    for (int i = 0; i < 6; ++i)
    {
        CHECK((g.segment(2 * i, 2) - lifted.locals[i].grad(y.segment(2 * i, 2), 0.7)).norm() == 0.0);
        CHECK((H.block(2 * i, 2 * i, 2, 2) - lifted.locals[i].hessian(y.segment(2 * i, 2), 0.7)).norm() == 0.0);
    }
    CHECK(H.block(0, 2, 2, 2).norm() == 0.0);
}

TEST_CASE("node-local run matches the centralized tracker")
{
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
    {
        const GeneratedScenario gen = consensus(12, 3.0, seed);
        const LiftedProblem& lifted = *gen.lifted;
        const TrackerConfig tc = tracker_for(lifted, 4, 2);
        const TimeVaryingProblem p = lifted.centralized();
        const TrajectoryLog central = run_adupc(p, tc, zero_state(p));
        const DistributedResult dist = simulate_distributed_adupc(lifted, {tc, 0}, zero_state(p));
        CHECK(max_coordinate_gap(central, dist.log) <= 1e-9);
        CHECK(dist.budget_exact);
        CHECK(dist.audit.ok());
        CHECK(dist.audit.oracle_calls > 0);
        CHECK(dist.audit.message_reads > 0);
        CHECK(dist.log.strategy == "adupc_distributed");
    }
}

TEST_CASE("two-dimensional local variables")
{
    const GeneratedScenario gen = consensus(5, 2.5, 9, 2);
    const LiftedProblem& lifted = *gen.lifted;
    const TrackerConfig tc = tracker_for(lifted, 3, 3);
    const TimeVaryingProblem p = lifted.centralized();
    const TrajectoryLog central = run_adupc(p, tc, zero_state(p));
    const DistributedResult dist = simulate_distributed_adupc(lifted, {tc, 0}, zero_state(p));
    CHECK(max_coordinate_gap(central, dist.log) <= 1e-9);
    for (const CommBudgetRow& row : dist.comm.rows)
        CHECK(row.scalars_sent == 6LL * lifted.graph.degree(row.node) * 2);
}

TEST_CASE("communication budget per step")
{
    // node 0 of a star with four leaves has degree four
    const CommGraph star(5, {{0, 1}, {0, 2}, {0, 3}, {0, 4}});
    std::vector<LocalObjective> locals;
    for (int i = 0; i < 5; ++i) locals.push_back(static_local(i));
    const LiftedProblem lifted = build_lifted(star, locals, 1);
    TrackerConfig tc = tracker_for(lifted, 3, 3);
    tc.k_max = 5;
    const DistributedResult r = simulate_distributed_adupc(lifted, {tc, 0}, zero_state(lifted.centralized()));
    REQUIRE(r.comm.rows.size() == 25);
    for (const CommBudgetRow& row : r.comm.rows)
    {
        if (row.node == 0) CHECK(row.scalars_sent == 24);
        else CHECK(row.scalars_sent == 6);
        CHECK(row.scalars_sent == row.expected);
    }
    CHECK(r.budget_exact);

    std::ostringstream os;
    r.comm.write_csv(os);
    CHECK(os.str().rfind("k,node,scalars_sent\n1,0,24\n1,1,6\n", 0) == 0);
}

TEST_CASE("time-invariant locals reach consensus at the mean")
{
    const CommGraph g = random_connected_graph(8, 3.0, 4);
    std::vector<LocalObjective> locals;
    double mean = 0.0;
    for (int i = 0; i < 8; ++i)
    {
        locals.push_back(static_local(0.5 * i - 1.0));
        mean += (0.5 * i - 1.0) / 8.0;
    }
    const LiftedProblem lifted = build_lifted(g, locals, 1);
    TrackerConfig tc = tracker_for(lifted, 2, 2);
    tc.k_max = 400;
    const DistributedResult r = simulate_distributed_adupc(lifted, {tc, 0}, zero_state(lifted.centralized()));
    const Vector& y = r.log.rows.back().x;
    CHECK((y.array() - y.mean()).abs().maxCoeff() < 1e-6);
    CHECK(std::abs(y.mean() - mean) < 1e-6);
}

TEST_CASE("processing order does not change the result")
{
    const GeneratedScenario gen = consensus(10, 3.0, 6);
    const LiftedProblem& lifted = *gen.lifted;
    const TrackerConfig tc = tracker_for(lifted, 3, 2);
    const PrimalDualState init = zero_state(lifted.centralized());
    const DistributedResult a = simulate_distributed_adupc(lifted, {tc, 0}, init);
    const DistributedResult b = simulate_distributed_adupc(lifted, {tc, 12345}, init);
    CHECK(max_coordinate_gap(a.log, b.log) == 0.0);
    CHECK(b.audit.ok());
}

TEST_CASE("backward differences in the node-local run")
{
    const GeneratedScenario gen = consensus(8, 3.0, 2);
    const LiftedProblem& lifted = *gen.lifted;
    TrackerConfig tc = tracker_for(lifted, 4, 2);
    tc.derivative_mode = DerivativeMode::backward_difference;
    const TimeVaryingProblem p = lifted.centralized();
    const TrajectoryLog central = run_adupc(p, tc, zero_state(p));
    const DistributedResult dist = simulate_distributed_adupc(lifted, {tc, 0}, zero_state(p));
    CHECK(max_coordinate_gap(central, dist.log) <= 1e-9);
    CHECK(dist.budget_exact);
    // no prediction traffic on the first step
    for (const CommBudgetRow& row : dist.comm.rows)
    {
        const long long rounds = row.k == 1 ? 2 : 6;
        CHECK(row.scalars_sent == rounds * lifted.graph.degree(row.node));
    }
}

TEST_CASE("unsupported distributed settings")
{
    const GeneratedScenario gen = consensus(6, 3.0, 1);
    const LiftedProblem& lifted = *gen.lifted;
    const PrimalDualState init = zero_state(lifted.centralized());
    TrackerConfig tc = tracker_for(lifted, 2, 1);
    tc.prediction_mode = PredictionMode::exact_kkt;
    CHECK_THROWS_AS(simulate_distributed_adupc(lifted, {tc, 0}, init), ConfigError);
    tc = tracker_for(lifted, 2, 1);
    tc.strategy = Strategy::correction_only;
    CHECK_THROWS_AS(simulate_distributed_adupc(lifted, {tc, 0}, init), ConfigError);
    tc = tracker_for(lifted, 2, 1);
    PrimalDualState wrong = init;
    wrong.x = Vector::Zero(3);
    CHECK_THROWS_AS(simulate_distributed_adupc(lifted, {tc, 0}, wrong), InvalidArgument);
}
