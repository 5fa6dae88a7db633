#include "dupc/dual_solvers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dupc
{

namespace
{

constexpr double kArmijoC = 1e-4;
constexpr double kMinStep = 1e-12;

// -H^{-1} g by LLT, falling back to LDLT.
bool newton_direction(const Matrix& H, const Vector& g, Vector& d)
{
    Eigen::LLT<Matrix> llt(H);
    if (llt.info() == Eigen::Success)
    {
        d = -llt.solve(g);
        return true;
    }
    Eigen::LDLT<Matrix> ldlt(H);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) return false;
    d = -ldlt.solve(g);
    return d.allFinite();
}

}  // namespace

Vector damped_newton(const GradientFn& grad, const HessianFn& hessian, Vector x, double tol, int max_iters)
{
    if (!(tol > 0.0)) throw InvalidArgument("inner tolerance must be positive");
    Vector g = grad(x);
    double gnorm = g.norm();

    for (int it = 0; it < max_iters && gnorm > tol; ++it)
    {
        Vector d;
        if (!newton_direction(hessian(x), g, d))
            throw SingularHessian("Hessian is not positive definite in inner minimisation");

        const double merit = 0.5 * gnorm * gnorm;
        double step = 1.0;
        for (;;)
        {
            Vector trial = x + step * d;
            Vector g_trial = grad(trial);
            const double trial_norm = g_trial.norm();
            if (0.5 * trial_norm * trial_norm <= merit - kArmijoC * step * gnorm * gnorm)
            {
                x = std::move(trial);
                g = std::move(g_trial);
                gnorm = trial_norm;
                break;
            }
            step *= 0.5;
            if (step < kMinStep)
            {
                std::ostringstream os;
                os << "line search stalled in inner minimisation, residual " << gnorm;
                throw NoConvergence(os.str(), gnorm);
            }
        }
    }

    if (gnorm > tol)
    {
        std::ostringstream os;
        os << "inner minimisation did not reach " << tol << " in " << max_iters
           << " iterations, residual " << gnorm;
        throw NoConvergence(os.str(), gnorm);
    }
    return x;
}

Vector inner_primal_min(const TimeVaryingProblem& problem, const Vector& lambda, double t,
                        const Vector& warm_start, double tol, int max_iters)
{
    const Vector dual_force = problem.constraints.A().transpose() * lambda;
    Vector x = warm_start.size() == problem.dimension ? warm_start : Vector::Zero(problem.dimension);
    return damped_newton([&](const Vector& v) { return Vector(problem.grad(v, t) + dual_force); },
                         [&](const Vector& v) { return problem.hessian(v, t); }, std::move(x), tol, max_iters);
}

double contraction_factor(double alpha, const SmoothnessBounds& bounds, const ConstraintSet& cs)
{
    if (alpha < 0.0) throw InvalidArgument("stepsize must be nonnegative");
    const double smax2 = cs.sigma_max() * cs.sigma_max();
    const double smin2 = cs.sigma_min_pos() * cs.sigma_min_pos();
    return std::max(std::abs(1.0 - alpha * smax2 / bounds.m), std::abs(1.0 - alpha * smin2 / bounds.L));
}

std::optional<std::string> stepsize_warning(const char* name, double alpha,
                                            const SmoothnessBounds& bounds, const ConstraintSet& cs)
{
    const double limit = 2.0 * bounds.m / (cs.sigma_max() * cs.sigma_max());
    if (alpha < limit) return std::nullopt;
    std::ostringstream os;
    os << name << " = " << alpha << " is not below 2m/sigma_max^2 = " << limit
       << "; convergence is not guaranteed";
    return os.str();
}

void dual_ascent_rounds(const TimeVaryingProblem& problem, double t, Vector& x, Vector& lambda,
                        double alpha, int rounds, double inner_tol, int inner_max_iters)
{
    const Matrix& A = problem.constraints.A();
    const Vector& b = problem.constraints.b();
    for (int r = 0; r < rounds; ++r)
    {
        x = inner_primal_min(problem, lambda, t, x, inner_tol, inner_max_iters);
        lambda += alpha * (A * x - b);
    }
}

DualAscentResult dual_ascent(const TimeVaryingProblem& problem, double t, const PrimalDualState& init,
                             const DualAscentConfig& cfg, const OracleSolution* oracle)
{
    const ConstraintSet& cs = problem.constraints;
    DualAscentResult out;
    if (auto w = stepsize_warning("alpha", cfg.alpha, problem.bounds, cs)) out.warnings.push_back(*w);

    Vector x = init.x;
    Vector lambda = project_onto_image(init.lambda, cs);
    if (oracle) out.dual_err.push_back((lambda - oracle->lambda_star).norm());

    for (int i = 0; i < cfg.max_iters; ++i)
    {
        x = inner_primal_min(problem, lambda, t, x, cfg.inner_tol, cfg.inner_max_iters);
        if (oracle) out.primal_err.push_back((x - oracle->x_star).norm());
        lambda += cfg.alpha * (cs.A() * x - cs.b());
        if (oracle) out.dual_err.push_back((lambda - oracle->lambda_star).norm());
        out.max_image_deviation = std::max(out.max_image_deviation, image_deviation(lambda, cs));
    }

    out.state.x = std::move(x);
    out.state.lambda = std::move(lambda);
    out.state.k = init.k;
    out.state.t = t;
    return out;
}

TrajectoryLog running_dual_ascent(const TimeVaryingProblem& problem, std::span<const double> times,
                                  const PrimalDualState& init, const DualAscentConfig& cfg,
                                  const OracleTrajectory* oracle)
{
    if (times.empty()) throw InvalidArgument("sampling schedule is empty");
    if (oracle && oracle->solutions.size() != times.size())
        throw InvalidArgument("oracle trajectory does not match the sampling schedule");

    const ConstraintSet& cs = problem.constraints;
    TrajectoryLog log;
    log.strategy = "running_dual_ascent";
    log.P = 0;
    log.C = 1;
    if (auto w = stepsize_warning("alpha", cfg.alpha, problem.bounds, cs)) log.warnings.push_back(*w);

    Vector x = init.x;
    Vector lambda = init.lambda;

    auto record = [&](int k) {
        TrajectoryRow row{k, times[k], x, lambda, std::nullopt, std::nullopt};
        if (oracle)
        {
            row.primal_err = (x - oracle->solutions[k].x_star).norm();
            row.dual_err = (lambda - oracle->solutions[k].lambda_star).norm();
        }
        log.max_image_deviation = std::max(log.max_image_deviation, image_deviation(lambda, cs));
        log.rows.push_back(std::move(row));
    };

    record(0);
    for (std::size_t k = 1; k < times.size(); ++k)
    {
        try
        {
            dual_ascent_rounds(problem, times[k], x, lambda, cfg.alpha, 1, cfg.inner_tol,
                               cfg.inner_max_iters);
        }
        catch (Error& e)
        {
            e.attach_step(static_cast<int>(k));
            throw;
        }
        record(static_cast<int>(k));
    }
    return log;
}

OracleSolution solve_oracle(const TimeVaryingProblem& problem, double t, double tol, const Vector& warm_start)
{
    if (!(tol > 0.0)) throw InvalidArgument("oracle tolerance must be positive");
    const ConstraintSet& cs = problem.constraints;
    const Matrix& Z = cs.null_basis();
    const Vector& xp = cs.particular_solution();

    Vector x = xp;
    if (warm_start.size() == problem.dimension && Z.cols() > 0)
        x += Z * (Z.transpose() * (warm_start - xp));

    auto kkt = [&](const Vector& g, const Vector& xx, Vector& lambda) {
        lambda = cs.dual_from_gradient(g);
        const double stationarity = (g + cs.A().transpose() * lambda).norm();
        const double feasibility = (cs.A() * xx - cs.b()).norm();
        return std::max(stationarity, feasibility);
    };

    Vector g = problem.grad(x, t);
    Vector lambda;
    double residual = kkt(g, x, lambda);

    constexpr int kMaxNewton = 100;
    for (int it = 0; it < kMaxNewton && residual > tol && Z.cols() > 0; ++it)
    {
        const Vector gr = Z.transpose() * g;
        const Matrix Hr = Z.transpose() * problem.hessian(x, t) * Z;
        Vector dz;
        if (!newton_direction(Hr, gr, dz)) throw SingularKKT("reduced KKT matrix is singular");

        const double gr2 = gr.squaredNorm();
        double step = 1.0;
        for (;;)
        {
            Vector trial = x + step * (Z * dz);
            Vector g_trial = problem.grad(trial, t);
            const double trial2 = (Z.transpose() * g_trial).squaredNorm();
            if (0.5 * trial2 <= 0.5 * gr2 - kArmijoC * step * gr2)
            {
                x = std::move(trial);
                g = std::move(g_trial);
                break;
            }
            step *= 0.5;
            if (step < kMinStep) break;
        }
        if (step < kMinStep)
        {
            residual = kkt(g, x, lambda);
            break;
        }
        residual = kkt(g, x, lambda);
    }

    if (residual > tol)
    {
        std::ostringstream os;
        os << "oracle KKT residual " << residual << " above tolerance " << tol << " at t = " << t;
        throw NoConvergence(os.str(), residual);
    }

    OracleSolution sol;
    sol.x_star = std::move(x);
    sol.lambda_star = project_onto_image(lambda, cs);
    sol.kkt_residual = residual;
    return sol;
}

OracleTrajectory compute_oracle_trajectory(const TimeVaryingProblem& problem,
                                           std::span<const double> times, double tol)
{
    OracleTrajectory out;
    out.times.assign(times.begin(), times.end());
    out.solutions.reserve(times.size());
    Vector warm;
    for (double t : times)
    {
        out.solutions.push_back(solve_oracle(problem, t, tol, warm));
        warm = out.solutions.back().x_star;
    }
    return out;
}

}  // namespace dupc
