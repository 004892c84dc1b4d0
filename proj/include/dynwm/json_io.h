#pragma once

#include <string>

#include "json.hpp"

#include "dynwm/model.h"

namespace dynwm {

/// Rows-of-numbers array to Matrix. Throws kInvalidConfig on ragged or
/// non-numeric input.
Matrix matrix_from_json(const nlohmann::json& j, const std::string& name);
nlohmann::json matrix_to_json(const Matrix& M);

/// Accepts an array, or a single number broadcast to `size` entries when
/// `size` >= 0.
Vector vector_from_json(const nlohmann::json& j, const std::string& name,
                        Eigen::Index size = -1);
nlohmann::json vector_to_json(const Vector& v);

}  // namespace dynwm
