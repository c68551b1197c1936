#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "gmecert/linalg.hpp"

namespace gmecert {

/// Unit-norm amplitude vector over an n-qubit computational basis.
class StateVector {
 public:
  /// Throws ArgumentError unless the length is 2^n and the norm is 1 within `tol`.
  explicit StateVector(ComplexVector amplitudes, double tol = 1e-12);

  /// Rescales to unit norm; throws on a zero vector.
  static StateVector normalized(const ComplexVector& amplitudes);

  int n_qubits() const { return n_qubits_; }
  const ComplexVector& amplitudes() const { return amps_; }
  Complex operator[](Index i) const { return amps_(i); }

  ComplexMatrix projector() const { return amps_ * amps_.adjoint(); }

 private:
  int n_qubits_ = 0;
  ComplexVector amps_;
};

/// Hermitian, trace-one, positive-semidefinite operator.
class DensityMatrix {
 public:
  /// Checks |Tr - 1| <= 1e-10 and min eigenvalue >= -1e-9.
  explicit DensityMatrix(Hermitian rho);
  explicit DensityMatrix(const ComplexMatrix& rho) : DensityMatrix(Hermitian(rho)) {}
  explicit DensityMatrix(const StateVector& psi);

  int n_qubits() const { return n_qubits_; }
  Index dim() const { return rho_.dim(); }
  const Hermitian& hermitian() const { return rho_; }
  const ComplexMatrix& matrix() const { return rho_.matrix(); }

  /// Convex combination sum_i w_i rho_i; weights must be non-negative and sum to one.
  static DensityMatrix mixture(const std::vector<std::pair<double, DensityMatrix>>& parts);

 private:
  int n_qubits_ = 0;
  Hermitian rho_;
};

/// White-noise mixing parameter p in [0, 1].
class MixingParameter {
 public:
  explicit MixingParameter(double p);
  double value() const { return p_; }

 private:
  double p_;
};

StateVector basis_state(unsigned index, int n_qubits);

/// e^{i pi/3}|001> + e^{-i pi/3}|010> - |100>, normalized.
StateVector w_radioactive();
/// (1/sqrt 3)|W_rad> + sqrt(2/3)|111>.
StateVector xi_state();
/// (|011> + |101> + |110>)/sqrt 3.
StateVector w_bar_state();
StateVector ghz_state();

/// (2/3)|xi><xi| + (1/3)|W_bar><W_bar|.
DensityMatrix rho_target();
/// p * rho_target + (1 - p) * 1/8.
DensityMatrix rho_noisy(MixingParameter p);
/// (|000><000| + |111><111|)/2, the separable state sharing GHZ's marginals.
DensityMatrix fully_separable_twin();
DensityMatrix maximally_mixed(int n_qubits);

/// p * rho + (1 - p) * 1/dim for an arbitrary state.
DensityMatrix white_noise_mixture(const DensityMatrix& rho, MixingParameter p);

/// Inputs of the photonic preparation stage. The xi input as printed has
/// squared norm (74 + 8 sqrt 6)/18; it is returned normalized and the raw
/// value is kept alongside.
struct PreparationInputs {
  StateVector xi_input;
  double xi_input_raw_norm_squared;
  StateVector wbar_input;
  double wbar_input_raw_norm_squared;
  ComplexMatrix u_c;
  double u_c_unitarity_residual;  // max |U U^H - 1|
};

PreparationInputs preparation_inputs();

/// Haar-random pure state: normalized vector of i.i.d. standard complex Gaussians.
StateVector haar_random_state(int n_qubits, std::mt19937_64& rng);

/// Random full-rank state G G^H / Tr(G G^H) with G a complex Gaussian matrix.
DensityMatrix random_density_matrix(int n_qubits, std::mt19937_64& rng);

/// Mixture of `n_terms` product states, each across a uniformly chosen
/// bipartition X|YZ with Haar-random pure factors, under Dirichlet(1,...,1)
/// weights.
DensityMatrix random_biseparable(std::uint64_t seed, int n_terms);

/// Single product term across `single | rest`; exposed for tests.
StateVector product_across(Qubit single, const ComplexVector& one_qubit, const ComplexVector& two_qubit);

/// Named states: "rho", "rho_p:<p>", "ghz", "ghz_twin", "xi", "wbar",
/// "w_rad", "identity8". Throws ArgumentError for unknown keys.
DensityMatrix resolve_named_state(std::string_view key);
std::vector<std::string> named_state_keys();

}  // namespace gmecert
