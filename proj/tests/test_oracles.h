#pragma once

// Reference computations for the tests. Everything here is written the slow,
// obvious way and shares no code with the library beyond the Matrix typedefs.

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dynwm/model.h"

namespace dynwm {
namespace test {

// Hand-rolled generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(eng_);
  }
  int integer(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(eng_);
  }
  bool coin(double p = 0.5) { return uniform(0.0, 1.0) < p; }

  Matrix matrix(int rows, int cols, double scale = 1.0) {
    Matrix M(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) M(i, j) = uniform(-scale, scale);
    return M;
  }
  Vector vector(int n, double scale = 1.0) { return matrix(n, 1, scale); }
  Vector positive(int n, double lo, double hi) {
    Vector v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(lo, hi);
    return v;
  }

  // Random matrix rescaled to the given spectral radius.
  Matrix stable(int n, double radius) {
    Matrix M = matrix(n, n);
    const double r = M.eigenvalues().cwiseAbs().maxCoeff();
    return r > 0 ? Matrix(M * (radius / r)) : M;
  }

  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

inline Matrix naive_power(const Matrix& M, int k) {
  Matrix P = Matrix::Identity(M.rows(), M.cols());
  for (int i = 0; i < k; ++i) P = P * M;
  return P;
}

inline double largest_singular_value(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  return Eigen::BDCSVD<Matrix>(M).singularValues()(0);
}

// (A kron A - I) vec(P) = -vec(Q), assembled entry by entry, full-pivot LU.
inline Matrix lyapunov_kronecker(const Matrix& A, const Matrix& Q) {
  const int n = static_cast<int>(A.rows());
  Matrix K = Matrix::Zero(n * n, n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          K(i * n + k, j * n + l) = A(i, j) * A(k, l);
  K -= Matrix::Identity(n * n, n * n);
  Vector q(n * n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) q(i * n + k) = -Q(i, k);
  const Vector p = Eigen::FullPivLU<Matrix>(K).solve(q);
  Matrix P(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) P(i, k) = p(i * n + k);
  return P;
}

inline Matrix lyapunov_series(const Matrix& A, const Matrix& Q, int terms) {
  Matrix P = Matrix::Zero(A.rows(), A.cols());
  Matrix Ak = Matrix::Identity(A.rows(), A.cols());
  for (int k = 0; k < terms; ++k) {
    P += Ak * Q * Ak.transpose();
    Ak = A * Ak;
  }
  return P;
}

inline Matrix uniform_cov(const Vector& s) {
  Matrix S = Matrix::Zero(s.size(), s.size());
  for (int i = 0; i < s.size(); ++i) S(i, i) = s(i) * s(i) / 3.0;
  return S;
}

// Batch test matrices from a logged run. lagged[n] is empty while undefined.
struct BatchPhi {
  Matrix phi1, phi2, phi3;
};

inline BatchPhi batch_phi(const std::vector<Vector>& r,
                          const std::vector<std::optional<Vector>>& lagged,
                          const std::vector<Matrix>& expected,
                          const Matrix& sigma_e) {
  const int m = static_cast<int>(r[0].size());
  const int q = static_cast<int>(sigma_e.rows());
  const double N = static_cast<double>(r.size());
  BatchPhi out{Matrix::Zero(m, m), Matrix::Zero(m, q), Matrix::Zero(q, q)};
  for (std::size_t n = 0; n < r.size(); ++n) {
    out.phi1 += r[n] * r[n].transpose() - expected[n];
    if (lagged[n]) {
      out.phi2 += r[n] * lagged[n]->transpose();
      out.phi3 += *lagged[n] * lagged[n]->transpose() - sigma_e;
    }
  }
  out.phi1 /= N;
  out.phi2 /= N;
  out.phi3 /= N;
  return out;
}

// sum_{k<n} Dbar_k Sigma_W Dbar_k^T + Lbar_k Sigma_zeta Lbar_k^T with
// Dbar_k = -(A + LC)^{n-1-k} and Lbar_k = -(A + LC)^{n-1-k} L.
inline Matrix expectation_sum(const Matrix& F, const Matrix& L,
                              const Matrix& sigma_w, const Matrix& sigma_z,
                              int n) {
  Matrix M = Matrix::Zero(F.rows(), F.cols());
  for (int k = 0; k < n; ++k) {
    const Matrix D = -naive_power(F, n - 1 - k);
    const Matrix Lb = D * L;
    M += D * sigma_w * D.transpose() + Lb * sigma_z * Lb.transpose();
  }
  return M;
}

// K_z + sum_{k<n} ||C Dbar_k|| K_w + ||C Lbar_k|| K_z.
inline double kbar_sum(const Matrix& F, const Matrix& C, const Matrix& L,
                       double kw, double kz, int n) {
  double total = kz;
  for (int k = 0; k < n; ++k) {
    const Matrix D = naive_power(F, n - 1 - k);
    total += largest_singular_value(C * D) * kw +
             largest_singular_value(C * D * L) * kz;
  }
  return total;
}

// C sum_{k<n} Lbar_k v_k - v_n.
inline Vector attack_effect(const Matrix& F, const Matrix& C, const Matrix& L,
                            const std::vector<Vector>& v, int n) {
  Vector acc = Vector::Zero(F.rows());
  for (int k = 0; k < n; ++k) acc -= naive_power(F, n - 1 - k) * L * v[k];
  return C * acc - v[n];
}

// Scalar discrete Riccati with unit weights: p = a^2 p - a^2 b^2 p^2/(1 + b^2 p) + 1.
inline double scalar_riccati(double a, double b) {
  // b^2 p^2 + (1 - a^2 - b^2) p - 1 = 0, positive root.
  const double B = 1.0 - a * a - b * b;
  return (-B + std::sqrt(B * B + 4.0 * b * b)) / (2.0 * b * b);
}

// Fourth-moment excess of a uniform box watermark, summed over the cube of
// coordinates one at a time.
inline Matrix watermark_excess(const Vector& s) {
  const int q = static_cast<int>(s.size());
  Matrix V = Matrix::Zero(q, q);
  for (int i = 0; i < q; ++i) {
    double e4 = 0.0;
    for (int j = 0; j < q; ++j) {
      e4 += (i == j) ? std::pow(s(i), 4) / 5.0
                     : s(i) * s(i) * s(j) * s(j) / 9.0;
    }
    V(i, i) = e4 - std::pow(s(i) * s(i) / 3.0, 2);
  }
  return V;
}

}  // namespace test
}  // namespace dynwm
