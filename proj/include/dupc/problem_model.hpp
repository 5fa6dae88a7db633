#pragma once

#include <Eigen/Dense>

#include <functional>

#include "dupc/errors.hpp"

namespace dupc
{

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Uniform constants of the objective: strong convexity m, smoothness L and
/// the norm bounds on the time derivatives of the gradient
///   C0 >= |d/dt grad f|, C1 >= |d3f/dx3|, C2 >= |d/dt hess f|, C3 >= |d2/dt2 grad f|.
struct SmoothnessBounds
{
    double m = 1.0;
    double L = 1.0;
    double C0 = 0.0;
    double C1 = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;

    [[nodiscard]] double kappa_f() const { return L / m; }

    /// Throws InvalidArgument unless L >= m > 0 and every C_i >= 0.
    void validate() const;
};

/// Constraint matrix A, right-hand side b, and the spectral data derived from
/// a full SVD of A. A may be rank deficient; b must lie in im(A).
class ConstraintSet
{
public:
    [[nodiscard]] const Matrix& A() const { return A_; }
    [[nodiscard]] const Vector& b() const { return b_; }
    [[nodiscard]] Eigen::Index rows() const { return A_.rows(); }
    [[nodiscard]] Eigen::Index cols() const { return A_.cols(); }

    [[nodiscard]] double sigma_max() const { return sigma_max_; }
    /// Smallest singular value kept above the rank tolerance.
    [[nodiscard]] double sigma_min_pos() const { return sigma_min_pos_; }
    [[nodiscard]] double kappa_A() const { return sigma_max_ / sigma_min_pos_; }
    [[nodiscard]] int rank() const { return rank_; }
    /// All singular values, descending.
    [[nodiscard]] const Vector& singular_values() const { return singular_values_; }

    /// Orthonormal basis of im(A) (p x rank).
    [[nodiscard]] const Matrix& image_basis() const { return image_basis_; }
    /// Orthonormal basis of null(A) (n x (n - rank)).
    [[nodiscard]] const Matrix& null_basis() const { return null_basis_; }
    /// Minimum-norm solution A^+ b.
    [[nodiscard]] const Vector& particular_solution() const { return particular_; }

    /// The unique lambda in im(A) minimising |g + A^T lambda|, i.e. -(A^T)^+ g.
    [[nodiscard]] Vector dual_from_gradient(const Vector& g) const;

private:
    friend ConstraintSet analyze_constraints(const Matrix& A, const Vector& b, double tol);

    Matrix A_;
    Vector b_;
    Vector singular_values_;
    double sigma_max_ = 0.0;
    double sigma_min_pos_ = 0.0;
    int rank_ = 0;
    Matrix image_basis_;
    Matrix row_basis_;  // right singular vectors of the retained values (n x rank)
    Vector retained_;   // retained singular values
    Matrix null_basis_;
    Vector particular_;
};

/// Singular values below tol * sigma_max count as zero. Throws ZeroMatrix when
/// A is identically zero and InfeasibleRHS when |A A^+ b - b| > 1e-10 max(1, |b|).
ConstraintSet analyze_constraints(const Matrix& A, const Vector& b, double tol = 1e-10);

/// Orthogonal projection onto im(A).
Vector project_onto_image(const Vector& v, const ConstraintSet& cs);

/// |v - proj(v)| / max(1, |v|); the quantity bounded by the im(A) invariant.
double image_deviation(const Vector& v, const ConstraintSet& cs);

/// A time-varying objective sampled through oracles, together with its
/// constants and the time-invariant equality constraints A x = b.
struct TimeVaryingProblem
{
    using GradientOracle = std::function<Vector(const Vector& x, double t)>;
    using HessianOracle = std::function<Matrix(const Vector& x, double t)>;

    GradientOracle grad;
    HessianOracle hessian;
    /// d/dt grad f; may be empty, in which case only backward differences work.
    GradientOracle mixed_grad;
    SmoothnessBounds bounds;
    ConstraintSet constraints;
    int dimension = 0;

    [[nodiscard]] bool has_mixed_grad() const { return static_cast<bool>(mixed_grad); }
    void validate() const;
};

/// Primal-dual iterate at time index k.
struct PrimalDualState
{
    Vector x;
    Vector lambda;
    int k = 0;
    double t = 0.0;
};

/// Zero primal and dual vectors sized for the problem, at time t.
PrimalDualState zero_state(const TimeVaryingProblem& problem, double t = 0.0);

}  // namespace dupc
