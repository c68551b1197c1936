#pragma once

#include <Eigen/Eigenvalues>

#include <random>

#include "gmecert/linalg.hpp"

namespace testing {

using gmecert::ComplexMatrix;
using gmecert::Index;

inline ComplexMatrix random_complex(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = {g(rng), g(rng)};
  return m;
}

inline gmecert::Hermitian random_hermitian(Index n, std::mt19937_64& rng) {
  const ComplexMatrix a = random_complex(n, n, rng);
  return gmecert::Hermitian(ComplexMatrix(0.5 * (a + a.adjoint())));
}

/// Spectrum from Eigen's solver, independent of the Jacobi code under test.
inline Eigen::VectorXd reference_spectrum(const ComplexMatrix& m) {
  return Eigen::SelfAdjointEigenSolver<ComplexMatrix>(m, Eigen::EigenvaluesOnly).eigenvalues();
}

inline double reference_min_eig(const ComplexMatrix& m) { return reference_spectrum(m)(0); }

}  // namespace testing
