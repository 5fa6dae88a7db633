#include "dupc/scenario.hpp"

#include <cmath>
#include <fstream>

#include "dupc/rng.hpp"

namespace dupc
{

namespace
{

constexpr double kTwoPi = 6.283185307179586;

double logistic(double z)
{
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Matrix random_gaussian(Rng& rng, int r, int c)
{
    Matrix M(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) M(i, j) = rng.normal();
    return M;
}

Matrix json_matrix(const nlohmann::json& j, const char* name)
{
    if (!j.contains(name) || !j[name].is_array() || j[name].empty()) throw ConfigError(std::string("custom scenario needs ") + name);
    const auto& rows = j[name];
    const auto cols = rows[0].size();
    Matrix M(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        if (!rows[i].is_array() || rows[i].size() != cols) throw ConfigError(std::string("ragged matrix ") + name);
        for (std::size_t k = 0; k < cols; ++k) M(i, k) = rows[i][k].get<double>();
    }
    return M;
}

Vector json_vector(const nlohmann::json& j, const char* name, Eigen::Index size, double fill)
{
    if (!j.contains(name)) return Vector::Constant(size, fill);
    const auto& v = j[name];
    if (!v.is_array() || static_cast<Eigen::Index>(v.size()) != size)
        throw ConfigError(std::string("custom scenario field ") + name + " has the wrong length");
    Vector out(size);
    for (Eigen::Index i = 0; i < size; ++i) out(i) = v[i].get<double>();
    return out;
}

TimeVaryingProblem quadratic_problem(const TrackingQuadratic& q, ConstraintSet cs, SmoothnessBounds bounds)
{
    TimeVaryingProblem p;
    p.dimension = static_cast<int>(q.Q.rows());
    p.grad = [q](const Vector& x, double t) { return Vector(q.Q * (x - q.target(t))); };
    p.hessian = [q](const Vector&, double) { return q.Q; };
    p.mixed_grad = [q](const Vector&, double t) { return Vector(-(q.Q * q.target_rate(t))); };
    p.bounds = bounds;
    p.constraints = std::move(cs);
    return p;
}

GeneratedScenario consensus(const Scenario& s)
{
    if (s.N < 2) throw ConfigError("consensus scenario needs N >= 2");
    if (s.n < 1) throw ConfigError("local dimension n must be positive");
    if (!(s.a_max >= s.a_min)) throw ConfigError("a_max must not be below a_min");

    CommGraph graph;
    if (!s.graph.edge_file.empty())
    {
        std::ifstream in(s.graph.edge_file);
        if (!in) throw ConfigError("cannot open graph file " + s.graph.edge_file);
        graph = CommGraph::read_edge_list(in);
        if (graph.N() != s.N) throw ConfigError("graph file node count does not match N");
    }
    else
    {
        graph = random_connected_graph(s.N, s.graph.expected_degree, stream_seed(s.seed, 0));
    }

    GeneratedScenario out;
    std::vector<LocalObjective> locals;
    for (int i = 0; i < s.N; ++i)
    {
        Rng rng(stream_seed(s.seed, 1 + static_cast<std::uint64_t>(i)));
        Vector a(s.n);
        Vector phi(s.n);
        for (int j = 0; j < s.n; ++j)
        {
            a(j) = rng.uniform(s.a_min, s.a_max);
            phi(j) = rng.uniform(0.0, kTwoPi);
        }
        locals.push_back(xiao_local(s.amp, s.omega, a, phi));
        out.a.push_back(a);
        out.phi.push_back(phi);
    }
    out.lifted = build_lifted(graph, std::move(locals), s.n);
    out.problem = out.lifted->centralized();
    return out;
}

GeneratedScenario synthetic(const Scenario& s)
{
    if (s.dim < 1 || s.rows < 1 || s.rank < 1 || s.rank > std::min(s.dim, s.rows))
        throw ConfigError("synthetic scenario needs 1 <= rank <= min(dim, rows)");
    if (!(s.m > 0.0) || !(s.L >= s.m)) throw ConfigError("synthetic scenario needs L >= m > 0");

    Rng rng(stream_seed(s.seed, 0));
    Eigen::HouseholderQR<Matrix> qr(random_gaussian(rng, s.dim, s.dim));
    const Matrix U = qr.householderQ();
    Vector eig(s.dim);
    for (int i = 0; i < s.dim; ++i)
        eig(i) = s.dim == 1 ? s.m : s.m + (s.L - s.m) * (i == 0 ? 0.0 : i == s.dim - 1 ? 1.0 : rng.uniform());
    TrackingQuadratic q;
    q.Q = U * eig.asDiagonal() * U.transpose();
    q.Q = 0.5 * (q.Q + q.Q.transpose()).eval();
    q.amp = Vector::Constant(s.dim, s.amp);
    q.phase.resize(s.dim);
    for (int i = 0; i < s.dim; ++i) q.phase(i) = rng.uniform(0.0, kTwoPi);
    q.omega = s.omega;

    const Matrix A = random_gaussian(rng, s.rows, s.rank) * random_gaussian(rng, s.rank, s.dim);
    const Vector u = random_gaussian(rng, s.dim, 1);
    const Vector b = A * u;

    SmoothnessBounds bounds;
    bounds.m = s.m;
    bounds.L = s.L;
    bounds.C0 = s.L * s.amp * s.omega * std::sqrt(double(s.dim));
    bounds.C3 = s.L * s.amp * s.omega * s.omega * std::sqrt(double(s.dim));

    GeneratedScenario out;
    out.problem = quadratic_problem(q, analyze_constraints(A, b), bounds);
    out.quadratic = q;
    return out;
}

GeneratedScenario custom(const Scenario& s)
{
    const auto& j = s.custom;
    if (!j.is_object()) throw ConfigError("custom scenario needs a 'custom' object");
    TrackingQuadratic q;
    q.Q = json_matrix(j, "Q");
    if (q.Q.rows() != q.Q.cols()) throw ConfigError("Q must be square");
    if ((q.Q - q.Q.transpose()).norm() > 1e-12 * std::max(1.0, q.Q.norm())) throw ConfigError("Q must be symmetric");
    const Matrix A = json_matrix(j, "A");
    if (A.cols() != q.Q.rows()) throw ConfigError("A column count does not match Q");
    const Vector b = json_vector(j, "b", A.rows(), 0.0);
    q.amp = json_vector(j, "amp", q.Q.rows(), s.amp);
    q.phase = json_vector(j, "phase", q.Q.rows(), 0.0);
    q.omega = s.omega;

    Eigen::SelfAdjointEigenSolver<Matrix> es(q.Q);
    SmoothnessBounds bounds;
    bounds.m = es.eigenvalues().minCoeff();
    bounds.L = es.eigenvalues().maxCoeff();
    if (!(bounds.m > 0.0)) throw ConfigError("Q must be positive definite");
    bounds.C0 = bounds.L * q.amp.norm() * s.omega;
    bounds.C3 = bounds.L * q.amp.norm() * s.omega * s.omega;

    GeneratedScenario out;
    try
    {
        out.problem = quadratic_problem(q, analyze_constraints(A, b), bounds);
    }
    catch (const Error& e)
    {
        throw ConfigError(std::string("custom scenario: ") + e.what());
    }
    out.quadratic = q;
    return out;
}

}  // namespace

std::string to_string(ScenarioKind k)
{
    switch (k)
    {
    case ScenarioKind::consensus_xiao: return "consensus_xiao";
    case ScenarioKind::synthetic_quadratic: return "synthetic_quadratic";
    case ScenarioKind::custom: return "custom";
    }
    return "unknown";
}

ScenarioKind scenario_kind_from_string(const std::string& name)
{
    for (ScenarioKind k : {ScenarioKind::consensus_xiao, ScenarioKind::synthetic_quadratic, ScenarioKind::custom})
        if (to_string(k) == name) return k;
    throw ConfigError("unknown scenario kind '" + name + "'");
}

LocalObjective xiao_local(double amp, double omega, const Vector& a, const Vector& phi)
{
    LocalObjective f;
    f.grad = [amp, omega, a, phi](const Vector& y, double t) {
        Vector g(y.size());
        for (Eigen::Index j = 0; j < y.size(); ++j)
            g(j) = y(j) - amp * std::cos(omega * t + phi(j)) + logistic(y(j) - a(j));
        return g;
    };
    f.hessian = [a](const Vector& y, double) {
        Vector d(y.size());
        for (Eigen::Index j = 0; j < y.size(); ++j)
        {
            const double s = logistic(y(j) - a(j));
            d(j) = 1.0 + s * (1.0 - s);
        }
        return Matrix(d.asDiagonal());
    };
    f.mixed_grad = [amp, omega, phi](const Vector&, double t) {
        Vector g(phi.size());
        for (Eigen::Index j = 0; j < phi.size(); ++j) g(j) = amp * omega * std::sin(omega * t + phi(j));
        return g;
    };
    const double rn = std::sqrt(static_cast<double>(a.size()));
    f.bounds.m = 1.0;
    f.bounds.L = 1.25;
    f.bounds.C0 = std::abs(amp) * omega * rn;
    f.bounds.C1 = std::sqrt(3.0) / 18.0;
    f.bounds.C2 = 0.0;
    f.bounds.C3 = std::abs(amp) * omega * omega * rn;
    return f;
}

Vector TrackingQuadratic::target(double t) const
{
    Vector r(amp.size());
    for (Eigen::Index j = 0; j < r.size(); ++j) r(j) = amp(j) * std::cos(omega * t + phase(j));
    return r;
}

Vector TrackingQuadratic::target_rate(double t) const
{
    Vector r(amp.size());
    for (Eigen::Index j = 0; j < r.size(); ++j) r(j) = -amp(j) * omega * std::sin(omega * t + phase(j));
    return r;
}

Vector TrackingQuadratic::target_accel(double t) const
{
    return -omega * omega * target(t);
}

GeneratedScenario generate_scenario(const Scenario& spec)
{
    if (!(spec.omega >= 0.0)) throw ConfigError("omega must be nonnegative");
    switch (spec.kind)
    {
    case ScenarioKind::consensus_xiao: return consensus(spec);
    case ScenarioKind::synthetic_quadratic: return synthetic(spec);
    case ScenarioKind::custom: return custom(spec);
    }
    throw ConfigError("unknown scenario kind");
}

Vector quadratic_optimizer(const TrackingQuadratic& q, const ConstraintSet& cs, double t)
{
    const Matrix& Z = cs.null_basis();
    const Vector& xp = cs.particular_solution();
    if (Z.cols() == 0) return xp;
    const Matrix reduced = Z.transpose() * q.Q * Z;
    const Vector z = reduced.llt().solve(Z.transpose() * (q.Q * (q.target(t) - xp)));
    return xp + Z * z;
}

double optimal_stepsize(const SmoothnessBounds& bounds, const ConstraintSet& cs)
{
    const double smax2 = cs.sigma_max() * cs.sigma_max();
    const double smin2 = cs.sigma_min_pos() * cs.sigma_min_pos();
    return 2.0 / (smax2 / bounds.m + smin2 / bounds.L);
}

}  // namespace dupc
