#pragma once

#include <ostream>
#include <string>

#include "dupc/problem_model.hpp"

namespace dupc
{

/// sigma_max and the smallest positive singular value of A.
struct SpectralData
{
    double sigma_max = 1.0;
    double sigma_min = 1.0;

    [[nodiscard]] double kappa_A() const { return sigma_max / sigma_min; }
};

SpectralData spectral(const ConstraintSet& cs);

/// max{|1 - alpha sigma_max^2 / m|, |1 - alpha sigma_min^2 / L|}.
double contraction_factor(double alpha, const SmoothnessBounds& bounds, const SpectralData& sd);

struct DriftBounds
{
    double primal = 0.0;
    double dual = 0.0;
};

/// Per-step motion of the optimal pair: ((kf kA^2 + 1)/m) C0 h and (kf kA / sigma_min) C0 h.
DriftBounds drift_bounds(const SmoothnessBounds& bounds, const SpectralData& sd, double h);

/// max of the two drift slopes times C0 h.
double drift_constant_K(const SmoothnessBounds& bounds, const SpectralData& sd, double h);

struct Deltas
{
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
    double d4 = 0.0;
};

/// d1 = (kf kA^2 + 1)/m, d2 = kf kA / sigma_min,
/// d3 = C1 C0^2 d1^2 / 2 + d1 C2 C0 + C3 / 2, d4 = d1 C1 C0 + C2.
Deltas deltas(const SmoothnessBounds& bounds, const SpectralData& sd);

/// d3 + h C3 / 2.
double delta3_tilde(double d3, double C3, double h);

struct ConvergenceConditions
{
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    /// (1 - gamma1) / gamma2; +inf when gamma2 = 0, 0 when gamma1 >= 1.
    double h_max = 0.0;
    /// gamma1 < 1.
    bool contractive = false;
};

/// gamma1 = rho_C^C (2 rho_P^P + 1),
/// gamma2 = (kf kA^2 / m) (d1 C1 C0 + C2) rho_C^(C-1) (rho_P^P + 1).
ConvergenceConditions convergence_conditions(double rho_P, double rho_C, int P, int C,
                                             const SmoothnessBounds& bounds, const SpectralData& sd);

double tau(double gamma1, double gamma2, double h);

enum class BoundMode
{
    exact_derivative,
    backward_difference,
};

struct AsymptoticErrors
{
    double dual = 0.0;
    double primal = 0.0;
    double tau = 0.0;
};

struct BoundInputs
{
    SmoothnessBounds bounds;
    SpectralData spectral;
    double rho_P = 0.0;
    double rho_C = 0.0;
    int P = 0;
    int C = 1;
    double h = 0.1;
};

/// Limsup error bounds of the tracker. Exact derivatives:
///   dual   = rho_C^C [rho_P^P (d2 d3 h + d2 C0) + d2 d3 h] h / (1 - tau)
///   primal = sigma_max rho_C^(C-1) [same] h / ((1 - tau) m)
/// Backward differences use d3~ in place of d3 and add C3 h^2 / 2 to each numerator.
/// Throws NotContractive when tau(h) >= 1.
AsymptoticErrors asymptotic_errors(BoundMode mode, const BoundInputs& in);

struct BaselineBounds
{
    double err_cec = 0.0;
    double err_tc = 0.0;
};

/// err_cec = (sigma_max/m) rho_C^(C-1) (rho_C^(C+C') K / (1 - rho_C^C) + K),
/// err_tc  = (sigma_max/m) rho_C^(C''-1) (rho_C^C'' K / (1 - rho_C^C'') + K).
BaselineBounds baseline_error_bounds(double rho_C, int C, int C_extra, int C_total, double K, double sigma_max,
                                     double m);

struct PerturbationBounds
{
    double x_bound = 0.0;
    double lambda_bound = 0.0;
};

/// Sensitivity of min 0.5 x^T Q x + c^T x s.t. A x = 0 with m I <= Q <= L I:
/// |x*| <= (1/m)(1 + (L/m) sigma_max^2 / sigma_min^2) |c|, |lambda*| <= (L/m)(sigma_max / sigma_min^2) |c|.
PerturbationBounds qp_perturbation_bounds(double m, double L, const SpectralData& sd, double c_norm);

/// Everything `analyze` prints. Entries that do not exist for the given
/// inputs (tau >= 1) are +inf.
struct BoundReport
{
    double delta1 = 0.0;
    double delta2 = 0.0;
    double delta3 = 0.0;
    double delta4 = 0.0;
    double delta3_tilde = 0.0;
    double rho_P = 0.0;
    double rho_C = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double tau_h = 0.0;
    double h_max = 0.0;
    double K = 0.0;
    double asym_dual = 0.0;
    double asym_primal = 0.0;
    double err_cec = 0.0;
    double err_tc = 0.0;
    double err_pc = 0.0;
    bool contractive = false;
};

struct AnalysisInputs
{
    SmoothnessBounds bounds;
    SpectralData spectral;
    double alpha = 0.1;
    double beta = 0.1;
    int P = 0;
    int C = 1;
    int C_extra = 0;
    int C_total = 1;
    double h = 0.1;
    BoundMode mode = BoundMode::exact_derivative;
};

BoundReport compute_bound_report(const AnalysisInputs& in);

void write_report_text(std::ostream& os, const BoundReport& r);
/// JSON object; non-finite values are written as null.
std::string report_to_json(const BoundReport& r, int indent = 2);

}  // namespace dupc
