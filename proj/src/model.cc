#include "dynwm/model.h"

#include <string>

#include "dynwm/error.h"

namespace dynwm {

namespace {

void require_rows_cols(const Matrix& M, Eigen::Index rows, Eigen::Index cols,
                       const char* name) {
  if (M.rows() != rows || M.cols() != cols) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(name) + " is " + std::to_string(M.rows()) + "x" +
                    std::to_string(M.cols()) + ", expected " +
                    std::to_string(rows) + "x" + std::to_string(cols));
  }
}

void require_support(const Vector& s, Eigen::Index size, const char* name) {
  if (s.size() != size) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(name) + " has " + std::to_string(s.size()) +
                    " entries, expected " + std::to_string(size));
  }
  require_finite(s, name);
  if ((s.array() < 0.0).any()) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string(name) + " must be nonnegative");
  }
}

}  // namespace

void PlantModel::validate() const {
  require_square(A, "A");
  const Eigen::Index p = A.rows();
  if (p == 0) throw Error(ErrorCode::kDimensionMismatch, "empty state");
  require_rows_cols(B, p, B.cols(), "B");
  const Eigen::Index m = C1.rows();
  require_rows_cols(C1, m, p, "C1");
  require_rows_cols(C2, m, p, "C2");
  require_finite(A, "A");
  require_finite(B, "B");
  require_finite(C1, "C1");
  require_finite(C2, "C2");
  require_support(w_support, p, "w_support");
  require_support(zeta_support, m, "zeta_support");
  require_support(eta_support, m, "eta_support");
  // Both covariances are diagonal, so the PSD order is coordinate-wise.
  if ((zeta_support.array().abs() > eta_support.array().abs()).any()) {
    throw Error(ErrorCode::kInvalidConfig,
                "Sigma_zeta must be dominated by Sigma_eta");
  }
}

}  // namespace dynwm
