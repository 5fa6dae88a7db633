#pragma once

#include <cmath>
#include <functional>

#include "dupc/dual_solvers.hpp"
#include "dupc/rng.hpp"

namespace testing
{

using dupc::Matrix;
using dupc::Vector;

/// f = 0.5 x^T Q x - c(t)^T x under A x = b.
inline dupc::TimeVaryingProblem quadratic(const Matrix& Q, std::function<Vector(double)> c, const Matrix& A,
                                          const Vector& b, std::function<Vector(double)> c_rate = {})
{
    dupc::TimeVaryingProblem p;
    p.dimension = static_cast<int>(Q.rows());
    p.grad = [Q, c](const Vector& x, double t) { return Vector(Q * x - c(t)); };
    p.hessian = [Q](const Vector&, double) { return Q; };
    if (c_rate) p.mixed_grad = [c_rate](const Vector&, double t) { return Vector(-c_rate(t)); };
    Eigen::SelfAdjointEigenSolver<Matrix> es(Q);
    p.bounds.m = es.eigenvalues().minCoeff();
    p.bounds.L = es.eigenvalues().maxCoeff();
    p.constraints = dupc::analyze_constraints(A, b);
    return p;
}

inline dupc::TimeVaryingProblem static_quadratic(const Matrix& Q, const Vector& c, const Matrix& A, const Vector& b)
{
    return quadratic(
        Q, [c](double) { return c; }, A, b, [c](double) { return Vector(Vector::Zero(c.size())); });
}

inline Matrix gaussian(dupc::Rng& rng, int r, int c)
{
    Matrix M(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) M(i, j) = rng.normal();
    return M;
}

/// SPD matrix with eigenvalues in [lo, hi], both endpoints attained.
inline Matrix spd(dupc::Rng& rng, int n, double lo, double hi)
{
    Eigen::HouseholderQR<Matrix> qr(gaussian(rng, n, n));
    const Matrix U = qr.householderQ();
    Vector e(n);
    for (int i = 0; i < n; ++i) e(i) = n == 1 ? lo : (i == 0 ? lo : i == n - 1 ? hi : rng.uniform(lo, hi));
    Matrix Q = U * e.asDiagonal() * U.transpose();
    return 0.5 * (Q + Q.transpose());
}

/// p x n matrix of the given rank.
inline Matrix ranked(dupc::Rng& rng, int p, int n, int rank)
{
    return gaussian(rng, p, rank) * gaussian(rng, rank, n);
}

/// p x n matrix of the given rank with nonzero singular values in [lo, hi].
inline Matrix conditioned(dupc::Rng& rng, int p, int n, int rank, double lo, double hi)
{
    const Matrix U = Eigen::HouseholderQR<Matrix>(gaussian(rng, p, p)).householderQ();
    const Matrix V = Eigen::HouseholderQR<Matrix>(gaussian(rng, n, n)).householderQ();
    Matrix S = Matrix::Zero(p, n);
    for (int i = 0; i < rank; ++i) S(i, i) = rank == 1 ? hi : lo + (hi - lo) * i / (rank - 1);
    return U * S * V.transpose();
}

/// Random small instance: n <= 8, p <= 5, every third rank deficient.
struct RandomQP
{
    Matrix Q;
    Vector c;
    Matrix A;
    Vector b;
};

inline RandomQP random_qp(dupc::Rng& rng, int index, int max_n = 8, int max_p = 5)
{
    RandomQP q;
    const int n = 2 + static_cast<int>(rng.below(max_n - 1));
    const int p = 1 + static_cast<int>(rng.below(std::min(max_p, n)));
    int rank = p;
    if (index % 3 == 0 && p > 1) rank = 1 + static_cast<int>(rng.below(p - 1));
    q.Q = spd(rng, n, rng.uniform(0.5, 1.5), rng.uniform(1.6, 4.0));
    q.c = gaussian(rng, n, 1);
    q.A = ranked(rng, p, n, rank);
    q.b = q.A * gaussian(rng, n, 1);
    return q;
}

}  // namespace testing
