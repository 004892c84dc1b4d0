#include "dynwm/linalg.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "dynwm/error.h"

namespace dynwm {

void require_finite(const Eigen::Ref<const Matrix>& M, const char* name) {
  if (!M.allFinite()) {
    throw Error(ErrorCode::kNonFinite,
                std::string(name) + " contains NaN or Inf entries");
  }
}

void require_square(const Eigen::Ref<const Matrix>& M, const char* name) {
  if (M.rows() != M.cols()) {
    throw Error(ErrorCode::kNonSquare,
                std::string(name) + " is " + std::to_string(M.rows()) + "x" +
                    std::to_string(M.cols()));
  }
}

double spectral_norm(const Eigen::Ref<const Matrix>& M) {
  if (M.size() == 0) return 0.0;
  require_finite(M, "spectral_norm");
  if (M.rows() == 1 || M.cols() == 1) return M.norm();
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

namespace {

Matrix symmetrized(const Eigen::Ref<const Matrix>& M) {
  require_square(M, "matrix");
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  const double asym = (M - M.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance * scale) {
    throw Error(ErrorCode::kAsymmetryExceedsTolerance,
                "max|M - M^T| = " + std::to_string(asym));
  }
  return 0.5 * (M + M.transpose());
}

}  // namespace

double max_eigenvalue_symmetric(const Eigen::Ref<const Matrix>& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(M),
                                            Eigen::EigenvaluesOnly);
  return eig.eigenvalues().maxCoeff();
}

double min_eigenvalue_symmetric(const Eigen::Ref<const Matrix>& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrized(M),
                                            Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

double spectral_radius(const Eigen::Ref<const Matrix>& M) {
  require_square(M, "matrix");
  if (M.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(M, false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

bool is_schur_stable(const Eigen::Ref<const Matrix>& M) {
  return spectral_radius(M) < 1.0 - kSchurMargin;
}

Matrix solve_discrete_lyapunov(const Eigen::Ref<const Matrix>& A,
                               const Eigen::Ref<const Matrix>& Q) {
  require_square(A, "A");
  require_square(Q, "Q");
  if (A.rows() != Q.rows()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "Lyapunov: A is " + std::to_string(A.rows()) + "x" +
                    std::to_string(A.rows()) + " but Q is " +
                    std::to_string(Q.rows()) + "x" + std::to_string(Q.rows()));
  }
  if (!is_schur_stable(A)) {
    throw Error(ErrorCode::kNotSchurStable, "Lyapunov: A is not Schur stable");
  }
  const Eigen::Index n = A.rows();
  const Eigen::Index nn = n * n;

  // Column-major vec: vec(A P A^T) = (A kron A) vec(P).
  Matrix system(nn, nn);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      system.block(i * n, j * n, n, n) = A(i, j) * A;
    }
  }
  system -= Matrix::Identity(nn, nn);

  const Matrix q_dense = Q;
  const Vector rhs = -Eigen::Map<const Vector>(q_dense.data(), nn);
  Eigen::PartialPivLU<Matrix> lu(system);
  Vector vecP = lu.solve(rhs);
  // One round of iterative refinement keeps the residual near roundoff for
  // poles close to the unit circle.
  vecP += lu.solve(rhs - system * vecP);

  Matrix P = Eigen::Map<Matrix>(vecP.data(), n, n);
  return 0.5 * (P + P.transpose());
}

Matrix matrix_power(const Eigen::Ref<const Matrix>& M, int k) {
  require_square(M, "matrix");
  if (k < 0) {
    throw Error(ErrorCode::kInvalidConfig, "matrix_power: negative exponent");
  }
  Matrix result = Matrix::Identity(M.rows(), M.cols());
  Matrix base = M;
  while (k > 0) {
    if (k & 1) result = result * base;
    k >>= 1;
    if (k > 0) base = base * base;
  }
  return result;
}

Matrix symmetric_dilation(const Eigen::Ref<const Matrix>& B) {
  const Eigen::Index r = B.rows();
  const Eigen::Index c = B.cols();
  Matrix D = Matrix::Zero(r + c, r + c);
  D.topRightCorner(r, c) = B;
  D.bottomLeftCorner(c, r) = B.transpose();
  return D;
}

Matrix uniform_covariance(const Eigen::Ref<const Vector>& support) {
  return (support.array().square() / 3.0).matrix().asDiagonal();
}

}  // namespace dynwm
