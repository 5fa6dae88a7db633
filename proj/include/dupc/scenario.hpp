#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dupc/distributed.hpp"
#include "json.hpp"

namespace dupc
{

enum class ScenarioKind
{
    consensus_xiao,
    synthetic_quadratic,
    custom,
};

std::string to_string(ScenarioKind k);
ScenarioKind scenario_kind_from_string(const std::string& name);

struct GraphSpec
{
    double expected_degree = 4.0;
    /// When set, the graph is read from this edge list instead of drawn.
    std::string edge_file;
};

struct Scenario
{
    ScenarioKind kind = ScenarioKind::consensus_xiao;
    /// Consensus: number of nodes and local dimension.
    int N = 50;
    int n = 1;
    double amp = 2.5;
    double omega = 3.14159265358979323846 / 80.0;
    std::uint64_t seed = 1;
    double a_min = -10.0;
    double a_max = 10.0;
    GraphSpec graph;

    /// Synthetic quadratic: dimension, constraint rows and rank of A, and the
    /// spectrum bounds of Q.
    int dim = 6;
    int rows = 4;
    int rank = 3;
    double m = 1.0;
    double L = 1.25;

    /// Custom: {"Q": [[..]], "A": [[..]], "b": [..], "amp": [..], "phase": [..]}
    /// giving f = 0.5 (x - r(t))^T Q (x - r(t)), r_j = amp_j cos(omega t + phase_j).
    nlohmann::json custom;
};

/// f_i(y; t) = 0.5 |y - amp cos(omega t + phi)|^2 + sum_j log(1 + exp(y_j - a_j)),
/// m = 1, L = 1.25, C0 = amp omega sqrt(n), C1 = sqrt(3)/18, C2 = 0, C3 = amp omega^2 sqrt(n).
LocalObjective xiao_local(double amp, double omega, const Vector& a, const Vector& phi);

/// f = 0.5 (x - r(t))^T Q (x - r(t)) with r_j(t) = amp_j cos(omega t + phase_j).
struct TrackingQuadratic
{
    Matrix Q;
    Vector amp;
    Vector phase;
    double omega = 0.0;

    [[nodiscard]] Vector target(double t) const;
    [[nodiscard]] Vector target_rate(double t) const;
    [[nodiscard]] Vector target_accel(double t) const;
};

struct GeneratedScenario
{
    TimeVaryingProblem problem;
    /// Present for consensus scenarios.
    std::optional<LiftedProblem> lifted;
    /// Present for the quadratic scenarios.
    std::optional<TrackingQuadratic> quadratic;
    /// Consensus draws, node-major.
    std::vector<Vector> a;
    std::vector<Vector> phi;
};

/// Deterministic in spec.seed. Throws ConfigError on an invalid spec.
GeneratedScenario generate_scenario(const Scenario& spec);

/// x*(t) of a tracking quadratic under A x = b, in closed form.
Vector quadratic_optimizer(const TrackingQuadratic& q, const ConstraintSet& cs, double t);

/// The stepsize minimising the contraction factor: 2 / (sigma_max^2/m + sigma_min^2/L).
double optimal_stepsize(const SmoothnessBounds& bounds, const ConstraintSet& cs);

}  // namespace dupc
