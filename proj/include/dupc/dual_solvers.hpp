#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dupc/problem_model.hpp"
#include "dupc/trajectory.hpp"

namespace dupc
{

struct DualAscentConfig
{
    double alpha = 0.1;
    int max_iters = 100;
    double inner_tol = 1e-10;
    int inner_max_iters = 100;
};

/// KKT point of one sampled problem; lambda_star is the im(A) representative.
struct OracleSolution
{
    Vector x_star;
    Vector lambda_star;
    double kkt_residual = 0.0;
};

/// Oracle solutions along a sampling schedule, index-aligned with `times`.
struct OracleTrajectory
{
    std::vector<double> times;
    std::vector<OracleSolution> solutions;
};

using GradientFn = std::function<Vector(const Vector&)>;
using HessianFn = std::function<Matrix(const Vector&)>;

/// Damped Newton on a strongly convex function given by its gradient and
/// Hessian. Backtracking (Armijo, c = 1e-4, halving) is done on 0.5 |grad|^2.
/// Throws NoConvergence when |grad| > tol after max_iters, SingularHessian
/// when the Hessian is not positive definite.
Vector damped_newton(const GradientFn& grad, const HessianFn& hessian, Vector x, double tol, int max_iters);

/// argmin_x f(x; t) + lambda^T A x by damped Newton. The step is backtracked
/// (Armijo, c = 1e-4, halving) on the merit 0.5 |grad_x L|^2, for which the
/// Newton direction is always a descent direction. Throws NoConvergence with
/// the final residual when |grad_x L| > tol after max_iters.
Vector inner_primal_min(const TimeVaryingProblem& problem, const Vector& lambda, double t,
                        const Vector& warm_start, double tol = 1e-10, int max_iters = 100);

/// max{|1 - alpha sigma_max^2 / m|, |1 - alpha sigma_min^2 / L|}.
double contraction_factor(double alpha, const SmoothnessBounds& bounds, const ConstraintSet& cs);

/// Message when alpha >= 2 m / sigma_max^2, where the contraction guarantee is lost.
std::optional<std::string> stepsize_warning(const char* name, double alpha,
                                            const SmoothnessBounds& bounds, const ConstraintSet& cs);

/// `rounds` dual-ascent iterations on f(.; t): x <- argmin L(., lambda), then
/// lambda <- lambda + alpha (A x - b). x is the warm start and the output.
void dual_ascent_rounds(const TimeVaryingProblem& problem, double t, Vector& x, Vector& lambda,
                        double alpha, int rounds, double inner_tol, int inner_max_iters);

struct DualAscentResult
{
    PrimalDualState state;
    /// |lambda_i - lambda*| for i = 0..max_iters (only with an oracle).
    std::vector<double> dual_err;
    /// |x_i - x*| for i = 1..max_iters (only with an oracle).
    std::vector<double> primal_err;
    double max_image_deviation = 0.0;
    std::vector<std::string> warnings;
};

/// Time-invariant dual ascent at time t. init.lambda is projected onto im(A)
/// on entry.
DualAscentResult dual_ascent(const TimeVaryingProblem& problem, double t, const PrimalDualState& init,
                             const DualAscentConfig& cfg, const OracleSolution* oracle = nullptr);

/// Running (correction-only) dual ascent: one primal minimisation and one
/// dual update per sample. Row 0 is the initial state at times[0]; row k is
/// the iterate produced from f(.; times[k]).
TrajectoryLog running_dual_ascent(const TimeVaryingProblem& problem, std::span<const double> times,
                                  const PrimalDualState& init, const DualAscentConfig& cfg,
                                  const OracleTrajectory* oracle = nullptr);

/// Newton on the KKT conditions of the sampled problem to residual <= tol.
/// The primal iteration is carried out in null(A) around A^+ b, which is the
/// bordered Newton system solved exactly; lambda* is recovered as the
/// minimum-norm (hence im(A)) least-squares multiplier.
OracleSolution solve_oracle(const TimeVaryingProblem& problem, double t, double tol = 1e-11,
                            const Vector& warm_start = Vector());

/// solve_oracle at every time, warm-starting each solve from the previous one.
OracleTrajectory compute_oracle_trajectory(const TimeVaryingProblem& problem,
                                           std::span<const double> times, double tol = 1e-11);

}  // namespace dupc
