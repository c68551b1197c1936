#pragma once

// Matrix JSON interchange:
//   {"dims": [2, 2, 2], "matrix": [[[re, im], ...], ...]}
// Rows are listed in order; every entry is a two-element [re, im] array.

#include <json.hpp>

#include <vector>

#include "gmecert/linalg.hpp"

namespace gmecert {

struct DimensionedMatrix {
  std::vector<int> dims;
  ComplexMatrix matrix;
};

nlohmann::json matrix_to_json(const ComplexMatrix& m, const std::vector<int>& dims);

/// Uses dims [2, ..., 2] inferred from the row count.
nlohmann::json matrix_to_json(const ComplexMatrix& m);

/// Throws ArgumentError on malformed input or when prod(dims) != rows.
DimensionedMatrix matrix_from_json(const nlohmann::json& j);

}  // namespace gmecert
