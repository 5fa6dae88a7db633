#include "dupc/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>
#include <utility>
#include <vector>

#include "json.hpp"

namespace dupc
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

double ipow(double base, int e) { return e <= 0 ? 1.0 : std::pow(base, e); }

}  // namespace

SpectralData spectral(const ConstraintSet& cs) { return {cs.sigma_max(), cs.sigma_min_pos()}; }

double contraction_factor(double alpha, const SmoothnessBounds& bounds, const SpectralData& sd)
{
    if (alpha < 0.0) throw InvalidArgument("stepsize must be nonnegative");
    return std::max(std::abs(1.0 - alpha * sd.sigma_max * sd.sigma_max / bounds.m),
                    std::abs(1.0 - alpha * sd.sigma_min * sd.sigma_min / bounds.L));
}

Deltas deltas(const SmoothnessBounds& b, const SpectralData& sd)
{
    const double kf = b.kappa_f();
    const double kA = sd.kappa_A();
    Deltas d;
    d.d1 = (kf * kA * kA + 1.0) / b.m;
    d.d2 = kf * kA / sd.sigma_min;
    d.d3 = b.C1 * b.C0 * b.C0 * d.d1 * d.d1 / 2.0 + d.d1 * b.C2 * b.C0 + b.C3 / 2.0;
    d.d4 = d.d1 * b.C1 * b.C0 + b.C2;
    return d;
}

double delta3_tilde(double d3, double C3, double h) { return d3 + h * C3 / 2.0; }

DriftBounds drift_bounds(const SmoothnessBounds& bounds, const SpectralData& sd, double h)
{
    if (!(h > 0.0)) throw InvalidArgument("sampling period h must be positive");
    const Deltas d = deltas(bounds, sd);
    return {d.d1 * bounds.C0 * h, d.d2 * bounds.C0 * h};
}

double drift_constant_K(const SmoothnessBounds& bounds, const SpectralData& sd, double h)
{
    const DriftBounds db = drift_bounds(bounds, sd, h);
    return std::max(db.primal, db.dual);
}

ConvergenceConditions convergence_conditions(double rho_P, double rho_C, int P, int C,
                                             const SmoothnessBounds& bounds, const SpectralData& sd)
{
    const double kA = sd.kappa_A();
    const Deltas d = deltas(bounds, sd);
    const double rP = ipow(rho_P, P);

    ConvergenceConditions out;
    out.gamma1 = ipow(rho_C, C) * (2.0 * rP + 1.0);
    out.gamma2 = (bounds.kappa_f() * kA * kA / bounds.m) * (d.d1 * bounds.C1 * bounds.C0 + bounds.C2) *
                 ipow(rho_C, C - 1) * (rP + 1.0);
    out.contractive = out.gamma1 < 1.0;
    if (!out.contractive)
        out.h_max = 0.0;
    else if (out.gamma2 == 0.0)
        out.h_max = kInf;
    else
        out.h_max = (1.0 - out.gamma1) / out.gamma2;
    return out;
}

double tau(double gamma1, double gamma2, double h) { return gamma1 + gamma2 * h; }

AsymptoticErrors asymptotic_errors(BoundMode mode, const BoundInputs& in)
{
    const SmoothnessBounds& b = in.bounds;
    const ConvergenceConditions cc = convergence_conditions(in.rho_P, in.rho_C, in.P, in.C, b, in.spectral);
    const double t = tau(cc.gamma1, cc.gamma2, in.h);
    if (!(t < 1.0))
    {
        std::ostringstream os;
        os << "tau(h) = " << t << " >= 1 at h = " << in.h << "; no asymptotic bound";
        throw NotContractive(os.str());
    }

    const Deltas d = deltas(b, in.spectral);
    const bool bd = mode == BoundMode::backward_difference;
    const double d3 = bd ? delta3_tilde(d.d3, b.C3, in.h) : d.d3;
    const double h = in.h;
    const double bracket = ipow(in.rho_P, in.P) * (d.d2 * d3 * h + d.d2 * b.C0) + d.d2 * d3 * h;
    const double extra = bd ? b.C3 / 2.0 * h * h : 0.0;

    AsymptoticErrors out;
    out.tau = t;
    out.dual = (ipow(in.rho_C, in.C) * bracket * h + extra) / (1.0 - t);
    out.primal = (in.spectral.sigma_max * ipow(in.rho_C, in.C - 1) * bracket * h + extra) / ((1.0 - t) * b.m);
    return out;
}

BaselineBounds baseline_error_bounds(double rho_C, int C, int C_extra, int C_total, double K, double sigma_max,
                                     double m)
{
    auto form = [&](int c_first, int c_tail, int c_den) {
        const double den = 1.0 - ipow(rho_C, c_den);
        if (!(den > 0.0)) return K == 0.0 ? 0.0 : kInf;
        return sigma_max / m * ipow(rho_C, c_first - 1) * (ipow(rho_C, c_tail) * K / den + K);
    };
    return {form(C, C + C_extra, C), form(C_total, C_total, C_total)};
}

PerturbationBounds qp_perturbation_bounds(double m, double L, const SpectralData& sd, double c_norm)
{
    if (c_norm < 0.0) throw InvalidArgument("|c| must be nonnegative");
    const double smax = sd.sigma_max;
    const double smin2 = sd.sigma_min * sd.sigma_min;
    return {(1.0 / m) * (1.0 + (L / m) * smax * smax / smin2) * c_norm, (L / m) * (smax / smin2) * c_norm};
}

BoundReport compute_bound_report(const AnalysisInputs& in)
{
    in.bounds.validate();
    if (!(in.h > 0.0)) throw InvalidArgument("sampling period h must be positive");

    BoundReport r;
    const Deltas d = deltas(in.bounds, in.spectral);
    r.delta1 = d.d1;
    r.delta2 = d.d2;
    r.delta3 = d.d3;
    r.delta4 = d.d4;
    r.delta3_tilde = delta3_tilde(d.d3, in.bounds.C3, in.h);
    r.rho_P = contraction_factor(in.beta, in.bounds, in.spectral);
    r.rho_C = contraction_factor(in.alpha, in.bounds, in.spectral);

    const ConvergenceConditions cc = convergence_conditions(r.rho_P, r.rho_C, in.P, in.C, in.bounds, in.spectral);
    r.gamma1 = cc.gamma1;
    r.gamma2 = cc.gamma2;
    r.h_max = cc.h_max;
    r.tau_h = tau(cc.gamma1, cc.gamma2, in.h);
    r.contractive = r.tau_h < 1.0;
    r.K = drift_constant_K(in.bounds, in.spectral, in.h);

    if (r.contractive)
    {
        const AsymptoticErrors ae =
            asymptotic_errors(in.mode, {in.bounds, in.spectral, r.rho_P, r.rho_C, in.P, in.C, in.h});
        r.asym_dual = ae.dual;
        r.asym_primal = ae.primal;
    }
    else
    {
        r.asym_dual = r.asym_primal = kInf;
    }
    r.err_pc = r.asym_primal;

    if (r.rho_C < 1.0)
    {
        const BaselineBounds bb =
            baseline_error_bounds(r.rho_C, in.C, in.C_extra, in.C_total, r.K, in.spectral.sigma_max, in.bounds.m);
        r.err_cec = bb.err_cec;
        r.err_tc = bb.err_tc;
    }
    else
    {
        r.err_cec = r.err_tc = kInf;
    }
    return r;
}

namespace
{

std::vector<std::pair<const char*, double>> report_fields(const BoundReport& r)
{
    return {{"delta1", r.delta1}, {"delta2", r.delta2},           {"delta3", r.delta3},
            {"delta4", r.delta4}, {"delta3_tilde", r.delta3_tilde}, {"rho_P", r.rho_P},
            {"rho_C", r.rho_C},   {"gamma1", r.gamma1},           {"gamma2", r.gamma2},
            {"tau_h", r.tau_h},   {"h_max", r.h_max},             {"K", r.K},
            {"asym_dual", r.asym_dual}, {"asym_primal", r.asym_primal}, {"err_cec", r.err_cec},
            {"err_tc", r.err_tc}, {"err_pc", r.err_pc}};
}

}  // namespace

void write_report_text(std::ostream& os, const BoundReport& r)
{
    for (const auto& [name, value] : report_fields(r))
        os << std::left << std::setw(14) << name << std::setprecision(10) << value << '\n';
    os << std::left << std::setw(14) << "contractive" << (r.contractive ? "yes" : "no") << '\n';
}

std::string report_to_json(const BoundReport& r, int indent)
{
    nlohmann::ordered_json j;
    for (const auto& [name, value] : report_fields(r))
    {
        if (std::isfinite(value))
            j[name] = value;
        else
            j[name] = nullptr;
    }
    j["contractive"] = r.contractive;
    return j.dump(indent);
}

}  // namespace dupc
