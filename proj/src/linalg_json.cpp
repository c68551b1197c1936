#include "gmecert/matrix_json.hpp"

#include <functional>
#include <numeric>

namespace gmecert {

using nlohmann::json;

json matrix_to_json(const ComplexMatrix& m, const std::vector<int>& dims) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return json{{"dims", dims}, {"matrix", std::move(rows)}};
}

json matrix_to_json(const ComplexMatrix& m) {
  const int n = qubit_count(m.rows());
  return matrix_to_json(m, std::vector<int>(static_cast<std::size_t>(n), 2));
}

DimensionedMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("matrix")) throw ArgumentError("matrix JSON: missing \"matrix\" field");
  const json& rows = j.at("matrix");
  if (!rows.is_array() || rows.empty()) throw ArgumentError("matrix JSON: \"matrix\" must be a non-empty array");

  const auto n_rows = static_cast<Index>(rows.size());
  const auto n_cols = static_cast<Index>(rows.front().size());
  DimensionedMatrix out;
  out.matrix.resize(n_rows, n_cols);
  for (Index i = 0; i < n_rows; ++i) {
    const json& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != n_cols)
      throw ArgumentError("matrix JSON: ragged rows");
    for (Index k = 0; k < n_cols; ++k) {
      const json& e = row[static_cast<std::size_t>(k)];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ArgumentError("matrix JSON: entries must be [re, im] pairs");
      out.matrix(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }

  if (j.contains("dims")) {
    out.dims = j.at("dims").get<std::vector<int>>();
    const long prod = std::accumulate(out.dims.begin(), out.dims.end(), 1L, std::multiplies<>());
    if (prod != n_rows) throw ArgumentError("matrix JSON: dims do not match the matrix size");
  } else {
    out.dims.assign(static_cast<std::size_t>(qubit_count(n_rows)), 2);
  }
  return out;
}

}  // namespace gmecert
