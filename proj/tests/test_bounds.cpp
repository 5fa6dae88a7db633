#include <cmath>
#include <limits>
#include <sstream>

#include "doctest.h"
#include "dupc/bounds.hpp"
#include "dupc/scenario.hpp"
#include "helpers.hpp"
#include "json.hpp"

using namespace dupc;

namespace
{

SmoothnessBounds make_bounds(double m, double L, double C0 = 0, double C1 = 0, double C2 = 0, double C3 = 0)
{
    return {m, L, C0, C1, C2, C3};
}

struct KKTSolution
{
    Vector x;
    Vector lambda;
};

/// Minimum-norm solution of the bordered system [Q A^T; A 0] [x; l] = [-c; 0].
KKTSolution brute_force_kkt(const Matrix& Q, const Vector& c, const Matrix& A)
{
    const Eigen::Index n = Q.rows();
    const Eigen::Index p = A.rows();
    Matrix K = Matrix::Zero(n + p, n + p);
    K.topLeftCorner(n, n) = Q;
    K.topRightCorner(n, p) = A.transpose();
    K.bottomLeftCorner(p, n) = A;
    Vector rhs = Vector::Zero(n + p);
    rhs.head(n) = -c;
    const Vector sol = Eigen::CompleteOrthogonalDecomposition<Matrix>(K).solve(rhs);
    return {sol.head(n), sol.tail(p)};
}

}  // namespace

TEST_CASE("drift bound examples")
{
    const SpectralData unit{1.0, 1.0};
    const DriftBounds d = drift_bounds(make_bounds(1, 1, 1), unit, 0.1);
    CHECK(d.primal == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(d.dual == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(drift_constant_K(make_bounds(1, 1, 1), unit, 0.1) == doctest::Approx(0.2).epsilon(1e-12));

    const DriftBounds zero = drift_bounds(make_bounds(1, 1, 0), unit, 0.1);
    CHECK(zero.primal == 0.0);
    CHECK(zero.dual == 0.0);
    CHECK(drift_constant_K(make_bounds(1, 1, 0), unit, 0.1) == 0.0);

    const SpectralData sd{2.0, 0.5};
    const SmoothnessBounds b = make_bounds(0.7, 1.9, 1.3);
    const DriftBounds full = drift_bounds(b, sd, 0.2);
    const DriftBounds half = drift_bounds(b, sd, 0.1);
    CHECK(full.primal == doctest::Approx(2.0 * half.primal).epsilon(1e-14));
    CHECK(full.dual == doctest::Approx(2.0 * half.dual).epsilon(1e-14));
    CHECK_THROWS_AS(drift_bounds(b, sd, 0.0), InvalidArgument);
}

TEST_CASE("delta examples")
{
    const Deltas d = deltas(make_bounds(1.0, 1.25), SpectralData{2.0, 1.0});
    CHECK(std::abs(d.d1 - 6.0) <= 1e-12);
    CHECK(std::abs(d.d2 - 2.5) <= 1e-12);
    CHECK(d.d3 == 0.0);
    CHECK(d.d4 == 0.0);
    CHECK(delta3_tilde(d.d3, 0.0, 0.3) == 0.0);

    const Deltas c3 = deltas(make_bounds(1.0, 1.25, 0, 0, 0, 0.4), SpectralData{2.0, 1.0});
    CHECK(std::abs(c3.d3 - 0.2) <= 1e-12);
    CHECK(std::abs(delta3_tilde(c3.d3, 0.4, 0.1) - 0.2 * 1.1) <= 1e-12);

    const Deltas all = deltas(make_bounds(1.0, 1.0, 2.0, 3.0, 5.0, 7.0), SpectralData{1.0, 1.0});
    // d1 = 2: d3 = 3*4*4/2 + 2*5*2 + 3.5, d4 = 2*3*2 + 5
    CHECK(std::abs(all.d3 - (24.0 + 20.0 + 3.5)) <= 1e-12);
    CHECK(std::abs(all.d4 - 17.0) <= 1e-12);
}

TEST_CASE("convergence condition examples")
{
    const SmoothnessBounds b = make_bounds(1.0, 1.25, 1.0, 0.1, 0.0, 0.0);
    const SpectralData sd{2.0, 1.0};
    const ConvergenceConditions cc = convergence_conditions(0.8, 0.8, 1, 5, b, sd);
    CHECK(std::abs(cc.gamma1 - 0.851968) <= 1e-12);
    CHECK(cc.contractive);

    const ConvergenceConditions limit = convergence_conditions(0.8, 0.8, 5000, 3, b, sd);
    CHECK(std::abs(limit.gamma1 - 0.512) <= 1e-12);

    const ConvergenceConditions p5c2 = convergence_conditions(0.8, 0.8, 5, 2, b, sd);
    CHECK(std::abs(p5c2.gamma1 - 0.64 * 1.65536) <= 1e-12);
    CHECK_FALSE(p5c2.contractive);
    CHECK(p5c2.h_max == 0.0);
    CHECK(convergence_conditions(0.8, 0.8, 5, 3, b, sd).gamma1 < 1.0);

    // gamma2 = (kf kA^2 / m)(d1 C1 C0 + C2) rho_C^(C-1)(rho_P^P + 1), with d1 = 6
    CHECK(std::abs(cc.gamma2 - 1.25 * 4.0 * 0.6 * 0.4096 * 1.8) <= 1e-12);
    CHECK(std::abs(cc.h_max - (1.0 - cc.gamma1) / cc.gamma2) <= 1e-12);

    const auto no_c0 = convergence_conditions(0.8, 0.8, 1, 5, make_bounds(1, 1.25, 0, 1, 0, 1), sd);
    CHECK(no_c0.gamma2 == 0.0);
    CHECK(std::isinf(no_c0.h_max));
    const auto no_c1 = convergence_conditions(0.8, 0.8, 1, 5, make_bounds(1, 1.25, 1, 0, 0, 1), sd);
    CHECK(no_c1.gamma2 == 0.0);
    CHECK(std::isinf(no_c1.h_max));
}

TEST_CASE("tau examples")
{
    CHECK(tau(0.7, 3.0, 0.0) == 0.7);
    CHECK(std::abs(tau(0.85, 1.0, 0.05) - 0.9) <= 1e-12);
    const ConvergenceConditions cc =
        convergence_conditions(0.8, 0.8, 1, 5, make_bounds(1.0, 1.25, 1.0, 0.1), SpectralData{2.0, 1.0});
    CHECK(std::abs(tau(cc.gamma1, cc.gamma2, cc.h_max) - 1.0) <= 1e-12);
}

TEST_CASE("asymptotic error examples")
{
    BoundInputs in;
    in.bounds = make_bounds(1.0, 1.0, 1.0, 0.0, 0.0, 2.0);
    in.spectral = {1.0, 1.0};
    in.rho_P = 0.5;
    in.rho_C = 0.5;
    in.P = 1;
    in.C = 2;
    in.h = 0.1;
    // d2 = 1, d3 = 1, gamma1 = 0.5, gamma2 = 0; bracket = 0.5 (0.1 + 1) + 0.1
    const AsymptoticErrors e = asymptotic_errors(BoundMode::exact_derivative, in);
    CHECK(std::abs(e.tau - 0.5) <= 1e-12);
    CHECK(std::abs(e.dual - 0.0325) <= 1e-12);
    CHECK(std::abs(e.primal - 0.065) <= 1e-12);

    // d3~ = 1.1, bracket = 0.665, C3 h^2 / 2 = 0.01
    const AsymptoticErrors bd = asymptotic_errors(BoundMode::backward_difference, in);
    CHECK(std::abs(bd.dual - 0.05325) <= 1e-12);
    CHECK(std::abs(bd.primal - 0.0865) <= 1e-12);

    BoundInputs still = in;
    still.bounds = make_bounds(1.0, 1.0);
    CHECK(asymptotic_errors(BoundMode::exact_derivative, still).dual == 0.0);
    CHECK(asymptotic_errors(BoundMode::exact_derivative, still).primal == 0.0);
    CHECK(asymptotic_errors(BoundMode::backward_difference, still).primal == 0.0);

    BoundInputs exact = in;
    exact.P = 5000;
    const double coarse = asymptotic_errors(BoundMode::exact_derivative, exact).primal;
    exact.h = 0.05;
    const double fine = asymptotic_errors(BoundMode::exact_derivative, exact).primal;
    CHECK(std::abs(coarse / fine - 4.0) <= 1e-9);

    BoundInputs bad = in;
    bad.rho_C = 0.95;
    bad.C = 1;
    CHECK_THROWS_AS(asymptotic_errors(BoundMode::exact_derivative, bad), NotContractive);
}

TEST_CASE("asymptotic bounds are monotone")
{
    BoundInputs in;
    in.bounds = make_bounds(1.0, 1.25, 0.5, 0.1, 0.05, 0.3);
    in.spectral = {1.5, 0.8};
    in.rho_P = 0.6;
    in.rho_C = 0.6;
    in.P = 4;
    in.C = 3;
    in.h = 0.01;
    double last = 0.0;
    for (double h : {0.005, 0.01, 0.02, 0.04})
    {
        in.h = h;
        const double e = asymptotic_errors(BoundMode::exact_derivative, in).primal;
        CHECK(e > last);
        last = e;
    }
    in.h = 0.02;
    last = std::numeric_limits<double>::infinity();
    for (int P : {1, 2, 4, 8, 16})
    {
        in.P = P;
        const double e = asymptotic_errors(BoundMode::exact_derivative, in).primal;
        CHECK(e < last);
        last = e;
    }
    CHECK(asymptotic_errors(BoundMode::backward_difference, in).primal >
          asymptotic_errors(BoundMode::exact_derivative, in).primal);
}

TEST_CASE("baseline bound examples")
{
    const BaselineBounds zero = baseline_error_bounds(0.8, 3, 2, 6, 0.0, 1.0, 1.0);
    CHECK(zero.err_cec == 0.0);
    CHECK(zero.err_tc == 0.0);

    const BaselineBounds b = baseline_error_bounds(0.8, 3, 0, 6, 1.0, 1.0, 1.0);
    const double cec = 0.64 * (0.512 / 0.488 + 1.0);
    const double tc = std::pow(0.8, 5) * (std::pow(0.8, 6) / (1.0 - std::pow(0.8, 6)) + 1.0);
    CHECK(std::abs(b.err_cec - cec) <= 1e-12);
    CHECK(std::abs(b.err_tc - tc) <= 1e-12);
    CHECK(b.err_tc < b.err_cec);

    double last = b.err_cec;
    double last_step = std::numeric_limits<double>::infinity();
    for (int extra = 1; extra <= 60; ++extra)
    {
        const double e = baseline_error_bounds(0.8, 3, extra, 6, 1.0, 1.0, 1.0).err_cec;
        CHECK(e <= last);
        CHECK(last - e <= last_step);
        last_step = last - e;
        last = e;
    }
    CHECK(last_step < 1e-6);
    CHECK(std::abs(last - 0.64) < 1e-5);
}

TEST_CASE("perturbation bound examples")
{
    const PerturbationBounds z = qp_perturbation_bounds(1.0, 1.0, SpectralData{1.0, 1.0}, 0.0);
    CHECK(z.x_bound == 0.0);
    CHECK(z.lambda_bound == 0.0);
    const PerturbationBounds u = qp_perturbation_bounds(1.0, 1.0, SpectralData{1.0, 1.0}, 1.0);
    CHECK(std::abs(u.x_bound - 2.0) <= 1e-12);
    CHECK(std::abs(u.lambda_bound - 1.0) <= 1e-12);
    CHECK_THROWS_AS(qp_perturbation_bounds(1.0, 1.0, SpectralData{1.0, 1.0}, -1.0), InvalidArgument);
}

TEST_CASE("perturbation bounds dominate random QPs")
{
    Rng rng(77);
    for (int i = 0; i < 100; ++i)
    {
        const auto qp = testing::random_qp(rng, i);
        const ConstraintSet cs = analyze_constraints(qp.A, Vector::Zero(qp.A.rows()));
        Eigen::SelfAdjointEigenSolver<Matrix> es(qp.Q);
        const double m = es.eigenvalues().minCoeff();
        const double L = es.eigenvalues().maxCoeff();
        const KKTSolution s = brute_force_kkt(qp.Q, qp.c, qp.A);
        REQUIRE((qp.Q * s.x + qp.c + qp.A.transpose() * s.lambda).norm() < 1e-9);
        const PerturbationBounds pb = qp_perturbation_bounds(m, L, spectral(cs), qp.c.norm());
        CHECK(s.x.norm() <= pb.x_bound * (1.0 + 1e-9));
        CHECK(s.lambda.norm() <= pb.lambda_bound * (1.0 + 1e-9));
    }
}

TEST_CASE("drift bounds dominate the optimizer motion")
{
    Rng rng(21);
    for (int i = 0; i < 20; ++i)
    {
        const auto qp = testing::random_qp(rng, i);
        const Vector v = testing::gaussian(rng, static_cast<int>(qp.Q.rows()), 1);
        const Vector c0 = qp.c;
        const auto p = testing::quadratic(
            qp.Q, [c0, v](double t) { return Vector(c0 + t * v); }, qp.A, qp.b);
        SmoothnessBounds b = p.bounds;
        b.C0 = v.norm();
        for (double h : {0.5, 0.05})
        {
            const OracleSolution a = solve_oracle(p, 1.0, 1e-12);
            const OracleSolution z = solve_oracle(p, 1.0 + h, 1e-12);
            const DriftBounds db = drift_bounds(b, spectral(p.constraints), h);
            CHECK((z.x_star - a.x_star).norm() <= db.primal * (1.0 + 1e-9) + 1e-12);
            CHECK((z.lambda_star - a.lambda_star).norm() <= db.dual * (1.0 + 1e-9) + 1e-12);
        }
    }

    Scenario sc;
    sc.kind = ScenarioKind::synthetic_quadratic;
    sc.omega = 1.0;
    const GeneratedScenario gen = generate_scenario(sc);
    const SpectralData sd = spectral(gen.problem.constraints);
    for (double t : {0.0, 0.7, 2.1, 5.3})
    {
        const double h = 1e-3;
        const OracleSolution a = solve_oracle(gen.problem, t, 1e-13);
        const OracleSolution z = solve_oracle(gen.problem, t + h, 1e-13);
        const DriftBounds db = drift_bounds(gen.problem.bounds, sd, h);
        CHECK((z.x_star - a.x_star).norm() <= db.primal);
        CHECK((z.lambda_star - a.lambda_star).norm() <= db.dual);
    }
}

TEST_CASE("bound report")
{
    AnalysisInputs in;
    in.bounds = make_bounds(1.0, 1.25, 0.1, 0.0, 0.0, 0.01);
    in.spectral = {2.0, 1.0};
    in.alpha = 0.2;
    in.beta = 0.2;
    in.P = 10;
    in.C = 3;
    in.C_extra = 3;
    in.C_total = 6;
    in.h = 0.1;
    const BoundReport r = compute_bound_report(in);
    CHECK(std::abs(r.rho_C - 0.84) <= 1e-12);
    CHECK(r.delta1 == doctest::Approx(6.0));
    CHECK(r.contractive);
    CHECK(r.err_pc == r.asym_primal);
    CHECK(std::isfinite(r.asym_primal));

    const auto j = nlohmann::json::parse(report_to_json(r));
    CHECK(j.at("gamma1").get<double>() == r.gamma1);
    CHECK(j.at("h_max").is_null());
    CHECK(j.at("contractive").get<bool>());

    in.C = 1;
    in.P = 0;
    in.alpha = 0.24;
    const BoundReport nc = compute_bound_report(in);
    CHECK_FALSE(nc.contractive);
    CHECK(std::isinf(nc.asym_primal));
    const auto jn = nlohmann::json::parse(report_to_json(nc));
    CHECK(jn.at("asym_primal").is_null());
    CHECK(jn.at("asym_dual").is_null());

    std::ostringstream os;
    write_report_text(os, nc);
    CHECK(os.str().find("contractive   no") != std::string::npos);
    CHECK(os.str().find("gamma1") != std::string::npos);
}
