#include "dynwm/json_io.h"

#include "dynwm/error.h"

namespace dynwm {

Matrix matrix_from_json(const nlohmann::json& j, const std::string& name) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    throw Error(ErrorCode::kInvalidConfig,
                name + " must be a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  Matrix M(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw Error(ErrorCode::kInvalidConfig, name + " has ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        throw Error(ErrorCode::kInvalidConfig,
                    name + " has a non-numeric entry");
      }
      M(r, c) = j[r][c].get<double>();
    }
  }
  require_finite(M, name.c_str());
  return M;
}

nlohmann::json matrix_to_json(const Matrix& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < M.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const nlohmann::json& j, const std::string& name,
                        Eigen::Index size) {
  if (j.is_number()) {
    if (size < 0) {
      throw Error(ErrorCode::kInvalidConfig,
                  name + " must be an array (size unknown for broadcast)");
    }
    return Vector::Constant(size, j.get<double>());
  }
  if (!j.is_array()) {
    throw Error(ErrorCode::kInvalidConfig,
                name + " must be a number or an array of numbers");
  }
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) {
      throw Error(ErrorCode::kInvalidConfig, name + " has a non-numeric entry");
    }
    v(i) = j[i].get<double>();
  }
  if (size >= 0 && v.size() != size) {
    throw Error(ErrorCode::kDimensionMismatch,
                name + " has " + std::to_string(v.size()) +
                    " entries, expected " + std::to_string(size));
  }
  require_finite(v, name.c_str());
  return v;
}

nlohmann::json vector_to_json(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace dynwm
