#pragma once

// Dense complex linear algebra for few-qubit operators.
//
// Qubit 0 (A) is the most significant bit of a computational-basis index,
// so |abc> has index 4a + 2b + c. Every partial operation below derives its
// index arithmetic from that convention.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "gmecert/errors.hpp"

namespace gmecert {

template <typename Real>
using CMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using CVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using ComplexMatrix = CMatrix<double>;
using ComplexVector = CVector<double>;
using Index = Eigen::Index;

// ---------------------------------------------------------------------------
// Qubit labels

enum class Qubit : int { A = 0, B = 1, C = 2 };

inline char qubit_name(Qubit q) { return static_cast<char>('A' + static_cast<int>(q)); }

inline Qubit qubit_from_name(char c) {
  if (c < 'A' || c > 'C') throw ArgumentError(std::string("unknown qubit label '") + c + "'");
  return static_cast<Qubit>(c - 'A');
}

/// Subset of qubit positions, stored as a bitmask over positions 0..5.
class QubitSet {
 public:
  constexpr QubitSet() = default;
  QubitSet(std::initializer_list<Qubit> qubits) {
    for (Qubit q : qubits) insert(static_cast<int>(q));
  }
  static constexpr QubitSet from_mask(unsigned mask) {
    QubitSet s;
    s.mask_ = mask;
    return s;
  }

  constexpr void insert(int position) { mask_ |= 1u << position; }
  constexpr bool contains(int position) const { return (mask_ >> position) & 1u; }
  constexpr unsigned mask() const { return mask_; }
  constexpr int size() const { return std::popcount(mask_); }
  constexpr bool empty() const { return mask_ == 0; }

  /// Complement within `n_qubits` positions.
  constexpr QubitSet complement(int n_qubits) const {
    return from_mask(~mask_ & ((1u << n_qubits) - 1u));
  }

  friend constexpr bool operator==(QubitSet, QubitSet) = default;

 private:
  unsigned mask_ = 0;
};

// ---------------------------------------------------------------------------
// Basic helpers

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) {
      const auto v = m(i, j);
      if (!std::isfinite(std::real(v)) || !std::isfinite(std::imag(v))) return false;
    }
  return true;
}

/// Number of qubits for a 2^n dimensional space; throws if dim is not a power of two.
inline int qubit_count(Index dim) {
  if (dim < 1 || !std::has_single_bit(static_cast<unsigned long long>(dim)))
    throw ArgumentError("dimension " + std::to_string(dim) + " is not a power of two");
  return std::countr_zero(static_cast<unsigned long long>(dim));
}

/// Kronecker product; dimensions multiply.
template <typename DA, typename DB>
Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic> kron(
    const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using Result = Eigen::Matrix<typename DA::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Result out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

template <typename DA, typename DB, typename... Rest>
auto kron(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b, const Rest&... rest) {
  return kron(kron(a, b), rest...);
}

template <typename Derived>
typename Eigen::NumTraits<typename Derived::Scalar>::Real max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.size() == 0 ? 0 : m.cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------
// Hermitian matrices

/// Hermitian matrix. Construction checks ||M - M^H||_max <= tol and stores
/// the exact symmetrization (M + M^H) / 2.
template <typename Real>
class BasicHermitian {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = CMatrix<Real>;

  BasicHermitian() = default;

  template <typename Derived>
  explicit BasicHermitian(const Eigen::MatrixBase<Derived>& m, Real tol = Real(1e-12)) {
    if (m.rows() != m.cols() || m.rows() == 0)
      throw ArgumentError("Hermitian matrix must be square and non-empty");
    Matrix mm = m.template cast<Scalar>();
    if (!all_finite(mm)) throw ArgumentError("matrix has non-finite entries");
    const Real skew = max_abs(Matrix(mm - mm.adjoint()));
    if (skew > tol) {
      std::ostringstream os;
      os << "matrix is not Hermitian: max |M - M^H| = " << skew;
      throw ArgumentError(os.str());
    }
    m_ = (mm + mm.adjoint()) / Real(2);
    for (Index i = 0; i < m_.rows(); ++i) m_(i, i) = Scalar(m_(i, i).real(), 0);
  }

  static BasicHermitian identity(Index dim) { return BasicHermitian(Matrix::Identity(dim, dim)); }
  static BasicHermitian zero(Index dim) { return BasicHermitian(Matrix::Zero(dim, dim)); }

  Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Scalar operator()(Index i, Index j) const { return m_(i, j); }
  Real trace() const { return m_.trace().real(); }

  /// Re Tr(this * other), exact for Hermitian operands.
  Real trace_product(const BasicHermitian& other) const {
    return (m_.array() * other.m_.transpose().array()).sum().real();
  }

  Real frobenius_norm() const { return m_.norm(); }

  friend BasicHermitian operator+(const BasicHermitian& a, const BasicHermitian& b) {
    return BasicHermitian(Matrix(a.m_ + b.m_));
  }
  friend BasicHermitian operator-(const BasicHermitian& a, const BasicHermitian& b) {
    return BasicHermitian(Matrix(a.m_ - b.m_));
  }
  friend BasicHermitian operator*(Real s, const BasicHermitian& a) { return BasicHermitian(Matrix(s * a.m_)); }

 private:
  Matrix m_;
};

using Hermitian = BasicHermitian<double>;

// ---------------------------------------------------------------------------
// Partial operations

namespace detail {

// Scatter the low bits of `packed` into the positions of `mask` (bit order
// preserved); pdep without BMI2.
inline unsigned deposit_bits(unsigned packed, unsigned mask) {
  unsigned out = 0;
  for (unsigned bit = 1; mask != 0; bit <<= 1) {
    const unsigned lowest = mask & (~mask + 1u);
    if (packed & bit) out |= lowest;
    mask &= mask - 1u;
  }
  return out;
}

// Qubit positions -> index bitmask (position 0 is the most significant bit).
inline unsigned index_mask(QubitSet positions, int n_qubits) {
  unsigned mask = 0;
  for (int q = 0; q < n_qubits; ++q)
    if (positions.contains(q)) mask |= 1u << (n_qubits - 1 - q);
  return mask;
}

}  // namespace detail

/// Reduced operator on the qubit positions in `keep`; traces out the rest.
template <typename Real>
BasicHermitian<Real> partial_trace(const BasicHermitian<Real>& m, QubitSet keep) {
  const int n = qubit_count(m.dim());
  if (keep.mask() >> n) throw ArgumentError("partial_trace: keep set references a qubit outside the operator");
  if (keep.empty() || keep.size() == n)
    throw ArgumentError("partial_trace: keep set must be a non-empty proper subset");

  const unsigned keep_mask = detail::index_mask(keep, n);
  const unsigned trace_mask = ((1u << n) - 1u) & ~keep_mask;
  const unsigned kept_dim = 1u << keep.size();
  const unsigned traced_dim = 1u << (n - keep.size());

  CMatrix<Real> out = CMatrix<Real>::Zero(kept_dim, kept_dim);
  const auto& mat = m.matrix();
  for (unsigned i = 0; i < kept_dim; ++i) {
    const unsigned bi = detail::deposit_bits(i, keep_mask);
    for (unsigned j = 0; j < kept_dim; ++j) {
      const unsigned bj = detail::deposit_bits(j, keep_mask);
      std::complex<Real> acc = 0;
      for (unsigned t = 0; t < traced_dim; ++t) {
        const unsigned bt = detail::deposit_bits(t, trace_mask);
        acc += mat(bi | bt, bj | bt);
      }
      out(i, j) = acc;
    }
  }
  return BasicHermitian<Real>(out);
}

/// Transpose restricted to the qubit positions in `subsystem`.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> partial_transpose(
    const Eigen::MatrixBase<Derived>& m, QubitSet subsystem) {
  if (m.rows() != m.cols()) throw ArgumentError("partial_transpose: matrix must be square");
  const int n = qubit_count(m.rows());
  if (subsystem.empty()) throw ArgumentError("partial_transpose: subsystem must be non-empty");
  if (subsystem.mask() >> n)
    throw ArgumentError("partial_transpose: subsystem references a qubit outside the matrix");

  const unsigned mask = detail::index_mask(subsystem, n);
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) {
      const unsigned ui = static_cast<unsigned>(i), uj = static_cast<unsigned>(j);
      const unsigned ti = (ui & ~mask) | (uj & mask);
      const unsigned tj = (uj & ~mask) | (ui & mask);
      out(ti, tj) = m(i, j);
    }
  return out;
}

template <typename Real>
BasicHermitian<Real> partial_transpose(const BasicHermitian<Real>& m, QubitSet subsystem) {
  return BasicHermitian<Real>(partial_transpose(m.matrix(), subsystem));
}

// ---------------------------------------------------------------------------
// Eigendecomposition (cyclic complex Jacobi)

struct JacobiOptions {
  int max_sweeps = 100;
  double off_diagonal_tolerance = 1e-13;  // relative to ||M||_F
  double residual_tolerance = 1e-10;      // per pair, relative to ||M||_F
};

template <typename Real>
struct EigenDecomposition {
  RVector<Real> values;   // ascending
  CMatrix<Real> vectors;  // columns, orthonormal
  int sweeps = 0;
};

template <typename Real>
EigenDecomposition<Real> eig_hermitian(const BasicHermitian<Real>& m, const JacobiOptions& opts = {}) {
  using C = std::complex<Real>;
  const Index n = m.dim();
  if (n > 64) throw ArgumentError("eig_hermitian: dimension above 64 is not supported");

  CMatrix<Real> a = m.matrix();
  CMatrix<Real> v = CMatrix<Real>::Identity(n, n);
  const Real norm = a.norm();
  const Real target = Real(opts.off_diagonal_tolerance) * norm;

  auto off_norm = [&] {
    Real s = 0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) s += std::norm(a(i, j));
    return std::sqrt(s);
  };

  int sweep = 0;
  Real off = off_norm();
  while (off > target) {
    if (sweep == opts.max_sweeps) {
      std::ostringstream os;
      os << "eig_hermitian: no convergence after " << sweep << " sweeps, off-diagonal norm " << off;
      throw NumericalError(os.str());
    }
    ++sweep;
    for (Index p = 0; p < n - 1; ++p)
      for (Index q = p + 1; q < n; ++q) {
        const C apq = a(p, q);
        const Real r = std::abs(apq);
        if (r == Real(0)) continue;
        // Rotate in the (p, q) plane: V = D R D^H with D = diag(1, e^{-i phi})
        // and R the real Jacobi rotation that annihilates |a_pq|.
        const C phase = apq / r;
        const Real theta = (a(q, q).real() - a(p, p).real()) / (2 * r);
        const Real t = (theta >= 0 ? Real(1) : Real(-1)) / (std::abs(theta) + std::hypot(theta, Real(1)));
        const Real c = 1 / std::sqrt(t * t + 1);
        const Real s = t * c;
        const C s_up = s * phase;             // V(p, q)
        const C s_down = -s * std::conj(phase);  // V(q, p)

        for (Index k = 0; k < n; ++k) {
          const C akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp + s_down * akq;
          a(k, q) = s_up * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const C apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk + std::conj(s_down) * aqk;
          a(q, k) = std::conj(s_up) * apk + c * aqk;
        }
        a(p, q) = a(q, p) = C(0);
        a(p, p) = C(a(p, p).real(), 0);
        a(q, q) = C(a(q, q).real(), 0);
        for (Index k = 0; k < n; ++k) {
          const C vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp + s_down * vkq;
          v(k, q) = s_up * vkp + c * vkq;
        }
      }
    off = off_norm();
  }

  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i).real() < a(j, j).real(); });

  EigenDecomposition<Real> out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  out.sweeps = sweep;
  for (Index k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]).real();
    out.vectors.col(k) = v.col(order[k]);
  }

  const Real allowed = Real(opts.residual_tolerance) * std::max(norm, std::numeric_limits<Real>::min());
  for (Index k = 0; k < n; ++k) {
    const Real res = (m.matrix() * out.vectors.col(k) - out.values(k) * out.vectors.col(k)).norm();
    if (res > allowed) {
      std::ostringstream os;
      os << "eig_hermitian: eigenpair " << k << " residual " << res << " exceeds " << allowed;
      throw NumericalError(os.str());
    }
  }
  return out;
}

template <typename Real>
Real min_eigenvalue(const BasicHermitian<Real>& m) {
  return eig_hermitian(m).values(0);
}

/// Principal square root of a PSD matrix. Eigenvalues in [-clamp, 0) are
/// treated as zero; anything more negative is a domain error.
template <typename Real>
BasicHermitian<Real> sqrtm_psd(const BasicHermitian<Real>& m, Real clamp = Real(1e-10)) {
  const auto e = eig_hermitian(m);
  if (e.values(0) < -clamp) {
    std::ostringstream os;
    os << "sqrtm_psd: matrix has eigenvalue " << e.values(0) << " below -" << clamp;
    throw DomainError(os.str());
  }
  // Eigenvalues at roundoff level are zero; their square roots would not be.
  const Real floor = Real(64) * std::numeric_limits<Real>::epsilon() * e.values.cwiseAbs().maxCoeff();
  const RVector<Real> roots = e.values.unaryExpr([&](Real v) { return v > floor ? std::sqrt(v) : Real(0); });
  CMatrix<Real> out = e.vectors * roots.asDiagonal() * e.vectors.adjoint();
  return BasicHermitian<Real>(out, Real(1e-9));
}

// ---------------------------------------------------------------------------
// Pauli matrices

inline const std::array<ComplexMatrix, 4>& pauli_matrices() {
  static const std::array<ComplexMatrix, 4> table = [] {
    std::array<ComplexMatrix, 4> t;
    const Complex i(0, 1);
    t[0] = ComplexMatrix::Identity(2, 2);
    t[1] = ComplexMatrix(2, 2);
    t[1] << 0, 1, 1, 0;
    t[2] = ComplexMatrix(2, 2);
    t[2] << 0, -i, i, 0;
    t[3] = ComplexMatrix(2, 2);
    t[3] << 1, 0, 0, -1;
    return t;
  }();
  return table;
}

}  // namespace gmecert
