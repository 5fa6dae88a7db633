#include "dupc/prediction.hpp"

#include <algorithm>
#include <sstream>

namespace dupc
{

Vector backward_diff_mixed_grad(const TimeVaryingProblem& problem, const Vector& x_k, double t_k,
                                double t_km1)
{
    const double h = t_k - t_km1;
    if (!(h > 0.0)) throw ZeroSamplingPeriod("backward difference needs t_k > t_{k-1}");
    return (problem.grad(x_k, t_k) - problem.grad(x_k, t_km1)) / h;
}

std::optional<Vector> MixedGradientCache::evaluate(const TimeVaryingProblem& problem, DerivativeMode mode,
                                                   const Vector& x_k, double t_k)
{
    std::optional<Vector> out;
    if (mode == DerivativeMode::exact)
    {
        if (!problem.has_mixed_grad())
            throw InvalidArgument("problem has no mixed-gradient oracle; use backward differences");
        out = problem.mixed_grad(x_k, t_k);
    }
    else if (prev_valid)
    {
        out = backward_diff_mixed_grad(problem, x_k, t_k, prev_t);
    }
    prev_t = t_k;
    prev_valid = true;
    return out;
}

PredictionStep exact_prediction_kkt(const TimeVaryingProblem& problem, const PrimalDualState& state, double h,
                                    const Vector& mixed_grad)
{
    const ConstraintSet& cs = problem.constraints;
    const Eigen::Index n = cs.cols();
    const Eigen::Index p = cs.rows();

    Matrix K = Matrix::Zero(n + p, n + p);
    K.topLeftCorner(n, n) = problem.hessian(state.x, state.t);
    K.topRightCorner(n, p) = cs.A().transpose();
    K.bottomLeftCorner(p, n) = cs.A();

    Vector rhs = Vector::Zero(n + p);
    rhs.head(n) = -h * mixed_grad;

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(K);
    const Vector sol = cod.solve(rhs);
    const double residual = (K * sol - rhs).norm();
    if (!sol.allFinite() || residual > 1e-8 * std::max(1.0, rhs.norm()))
    {
        std::ostringstream os;
        os << "prediction KKT system is singular, residual " << residual;
        throw SingularKKT(os.str());
    }

    PredictionStep out;
    out.delta_x = sol.head(n);
    out.delta_lambda = project_onto_image(sol.tail(p), cs);
    return out;
}

PredictionStep approx_prediction(const TimeVaryingProblem& problem, const PrimalDualState& state, double h,
                                 const Vector& mixed_grad, const PredictionConfig& cfg)
{
    if (cfg.P < 0) throw InvalidArgument("prediction budget P must be nonnegative");
    const ConstraintSet& cs = problem.constraints;
    PredictionStep out;
    out.delta_x = Vector::Zero(cs.cols());
    out.delta_lambda = Vector::Zero(cs.rows());
    if (cfg.P == 0) return out;

    Eigen::LLT<Matrix> llt(problem.hessian(state.x, state.t));
    if (llt.info() != Eigen::Success) throw SingularHessian("prediction Hessian is not positive definite");
    const Vector linear = h * mixed_grad;
    const Matrix& A = cs.A();

    for (int r = 0; r < cfg.P; ++r)
    {
        out.delta_x = -llt.solve(linear + A.transpose() * out.delta_lambda);
        const Vector residual = A * out.delta_x;
        out.delta_lambda += cfg.beta * residual;
        out.feasibility_log.push_back(residual.norm());
    }
    return out;
}

PredictionStep predict(const TimeVaryingProblem& problem, const PrimalDualState& state, double h,
                       const Vector& mixed_grad, const PredictionConfig& cfg)
{
    if (cfg.mode == PredictionMode::exact_kkt) return exact_prediction_kkt(problem, state, h, mixed_grad);
    return approx_prediction(problem, state, h, mixed_grad, cfg);
}

}  // namespace dupc
