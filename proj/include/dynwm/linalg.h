#pragma once

#include <Eigen/Dense>

namespace dynwm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tolerance on max|M - M^T| (scaled by max(1, max|M|)) accepted as symmetric.
inline constexpr double kSymmetryTolerance = 1e-10;
/// Spectral radius must stay below 1 - kSchurMargin to count as Schur stable.
inline constexpr double kSchurMargin = 1e-9;

/// Throws kNonFinite if any entry of M is NaN or infinite.
void require_finite(const Eigen::Ref<const Matrix>& M, const char* name);
/// Throws kNonSquare unless M is square.
void require_square(const Eigen::Ref<const Matrix>& M, const char* name);

/// Largest singular value. Zero for empty or zero matrices.
double spectral_norm(const Eigen::Ref<const Matrix>& M);

/// Largest eigenvalue of a symmetric matrix. The input is symmetrized as
/// (M + M^T)/2 before decomposition.
double max_eigenvalue_symmetric(const Eigen::Ref<const Matrix>& M);
double min_eigenvalue_symmetric(const Eigen::Ref<const Matrix>& M);

/// Max |eigenvalue| including complex pairs.
double spectral_radius(const Eigen::Ref<const Matrix>& M);

bool is_schur_stable(const Eigen::Ref<const Matrix>& M);

/// Solves A P A^T - P = -Q for symmetric P via the vectorized linear system
/// (A kron A - I) vec(P) = -vec(Q).
Matrix solve_discrete_lyapunov(const Eigen::Ref<const Matrix>& A,
                               const Eigen::Ref<const Matrix>& Q);

/// M^k by repeated squaring; M^0 is the identity.
Matrix matrix_power(const Eigen::Ref<const Matrix>& M, int k);

/// [[0, B], [B^T, 0]]. Its largest eigenvalue equals the spectral norm of B.
Matrix symmetric_dilation(const Eigen::Ref<const Matrix>& B);

/// Diagonal covariance of a vector of independent uniforms on [-s_i, s_i].
Matrix uniform_covariance(const Eigen::Ref<const Vector>& support);

}  // namespace dynwm
