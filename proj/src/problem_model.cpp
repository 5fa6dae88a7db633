#include "dupc/problem_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dupc
{

void SmoothnessBounds::validate() const
{
    if (!(m > 0.0)) throw InvalidArgument("strong convexity constant m must be positive");
    if (!(L >= m)) throw InvalidArgument("smoothness constant L must satisfy L >= m");
    if (C0 < 0.0 || C1 < 0.0 || C2 < 0.0 || C3 < 0.0)
        throw InvalidArgument("derivative bounds C0..C3 must be nonnegative");
}

Vector ConstraintSet::dual_from_gradient(const Vector& g) const
{
    // A^T lambda = -g in the least-squares sense; with A = U S V^T restricted
    // to the retained triplets, lambda = -U S^{-1} V^T g lies in im(A).
    const Vector coeffs = (row_basis_.transpose() * g).cwiseQuotient(retained_);
    return -(image_basis_ * coeffs);
}

ConstraintSet analyze_constraints(const Matrix& A, const Vector& b, double tol)
{
    if (!(tol > 0.0)) throw InvalidArgument("rank tolerance must be positive");
    if (A.rows() == 0 || A.cols() == 0) throw InvalidArgument("constraint matrix is empty");
    if (b.size() != A.rows()) throw InvalidArgument("rhs size does not match constraint rows");
    if (A.cwiseAbs().maxCoeff() == 0.0) throw ZeroMatrix("constraint matrix is identically zero");

    Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();

    ConstraintSet cs;
    cs.A_ = A;
    cs.b_ = b;
    cs.singular_values_ = sv;
    cs.sigma_max_ = sv(0);

    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) >= tol * cs.sigma_max_) ++rank;
    cs.rank_ = rank;
    cs.sigma_min_pos_ = sv(rank - 1);
    cs.retained_ = sv.head(rank);
    cs.image_basis_ = svd.matrixU().leftCols(rank);
    cs.row_basis_ = svd.matrixV().leftCols(rank);
    cs.null_basis_ = svd.matrixV().rightCols(A.cols() - rank);

    const Vector coeffs = (cs.image_basis_.transpose() * b).cwiseQuotient(cs.retained_);
    cs.particular_ = cs.row_basis_ * coeffs;

    const double residual = (cs.image_basis_ * (cs.image_basis_.transpose() * b) - b).norm();
    if (residual > 1e-10 * std::max(1.0, b.norm()))
    {
        std::ostringstream os;
        os << "rhs b is not in im(A): least-squares residual " << residual;
        throw InfeasibleRHS(os.str(), residual);
    }
    return cs;
}

Vector project_onto_image(const Vector& v, const ConstraintSet& cs)
{
    const Matrix& U = cs.image_basis();
    return U * (U.transpose() * v);
}

double image_deviation(const Vector& v, const ConstraintSet& cs)
{
    return (v - project_onto_image(v, cs)).norm() / std::max(1.0, v.norm());
}

void TimeVaryingProblem::validate() const
{
    if (!grad || !hessian) throw InvalidArgument("problem needs gradient and Hessian oracles");
    if (dimension <= 0) throw InvalidArgument("problem dimension must be positive");
    if (constraints.cols() != dimension)
        throw InvalidArgument("constraint matrix column count does not match dimension");
    bounds.validate();
}

PrimalDualState zero_state(const TimeVaryingProblem& problem, double t)
{
    PrimalDualState s;
    s.x = Vector::Zero(problem.dimension);
    s.lambda = Vector::Zero(problem.constraints.rows());
    s.t = t;
    return s;
}

}  // namespace dupc
