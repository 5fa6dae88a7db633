#pragma once

#include <optional>
#include <vector>

#include "dupc/problem_model.hpp"

namespace dupc
{

enum class PredictionMode
{
    exact_kkt,
    dual_gradient,
};

enum class DerivativeMode
{
    exact,
    backward_difference,
};

struct PredictionConfig
{
    double beta = 0.1;
    int P = 0;
    PredictionMode mode = PredictionMode::dual_gradient;
    DerivativeMode derivative_mode = DerivativeMode::exact;
};

struct PredictionStep
{
    Vector delta_x;
    Vector delta_lambda;
    /// |A dx_p| after each dual-gradient round (empty for the exact solve).
    std::vector<double> feasibility_log;
};

/// (grad f(x_k; t_k) - grad f(x_k; t_km1)) / h with both gradients taken at x_k.
/// Throws ZeroSamplingPeriod when t_k - t_km1 <= 0.
Vector backward_diff_mixed_grad(const TimeVaryingProblem& problem, const Vector& x_k, double t_k,
                                double t_km1);

/// Remembers the previous sampling time so the tracker can form backward
/// differences. The first call has no predecessor and yields nullopt, which
/// the tracker treats as "skip prediction".
struct MixedGradientCache
{
    double prev_t = 0.0;
    bool prev_valid = false;

    std::optional<Vector> evaluate(const TimeVaryingProblem& problem, DerivativeMode mode, const Vector& x_k,
                                   double t_k);
};

/// min 0.5 dx^T H dx + h c^T dx  s.t.  A dx = 0, with H = hess f(x_k; t_k),
/// solved on the bordered KKT system by a minimum-norm complete orthogonal
/// decomposition. delta_lambda is the multiplier, projected onto im(A).
PredictionStep exact_prediction_kkt(const TimeVaryingProblem& problem, const PrimalDualState& state, double h,
                                    const Vector& mixed_grad);

/// P rounds of dual gradient on the same QP starting from dlambda = 0:
///   dx <- -H^{-1}(h c + A^T dlambda),  dlambda <- dlambda + beta A dx.
/// H is factored once. P = 0 returns zeros.
PredictionStep approx_prediction(const TimeVaryingProblem& problem, const PrimalDualState& state, double h,
                                 const Vector& mixed_grad, const PredictionConfig& cfg);

/// Dispatches on cfg.mode.
PredictionStep predict(const TimeVaryingProblem& problem, const PrimalDualState& state, double h,
                       const Vector& mixed_grad, const PredictionConfig& cfg);

}  // namespace dupc
