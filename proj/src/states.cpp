#include "gmecert/states.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <sstream>

namespace gmecert {

namespace {

constexpr double kPi = std::numbers::pi;

ComplexVector zeros(int n_qubits) { return ComplexVector::Zero(Index(1) << n_qubits); }

}  // namespace

// ---------------------------------------------------------------------------

StateVector::StateVector(ComplexVector amplitudes, double tol) : amps_(std::move(amplitudes)) {
  n_qubits_ = qubit_count(amps_.size());
  if (!all_finite(amps_)) throw ArgumentError("state vector has non-finite amplitudes");
  const double norm = amps_.norm();
  if (std::abs(norm - 1.0) > tol) {
    std::ostringstream os;
    os << "state vector norm " << norm << " differs from 1";
    throw ArgumentError(os.str());
  }
}

StateVector StateVector::normalized(const ComplexVector& amplitudes) {
  const double norm = amplitudes.norm();
  if (!(norm > 0)) throw ArgumentError("cannot normalize a zero vector");
  return StateVector(amplitudes / norm);
}

DensityMatrix::DensityMatrix(Hermitian rho) : rho_(std::move(rho)) {
  n_qubits_ = qubit_count(rho_.dim());
  const double tr = rho_.trace();
  if (std::abs(tr - 1.0) > 1e-10) {
    std::ostringstream os;
    os << "density matrix trace " << tr << " differs from 1";
    throw ArgumentError(os.str());
  }
  const double lowest = min_eigenvalue(rho_);
  if (lowest < -1e-9) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << lowest;
    throw ArgumentError(os.str());
  }
}

DensityMatrix::DensityMatrix(const StateVector& psi) : DensityMatrix(Hermitian(psi.projector())) {}

DensityMatrix DensityMatrix::mixture(const std::vector<std::pair<double, DensityMatrix>>& parts) {
  if (parts.empty()) throw ArgumentError("mixture of zero states");
  const Index dim = parts.front().second.dim();
  ComplexMatrix acc = ComplexMatrix::Zero(dim, dim);
  double total = 0;
  for (const auto& [w, rho] : parts) {
    if (w < 0) throw ArgumentError("mixture weights must be non-negative");
    if (rho.dim() != dim) throw ArgumentError("mixture of states with different dimensions");
    acc += w * rho.matrix();
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ArgumentError("mixture weights must sum to one");
  return DensityMatrix(acc);
}

MixingParameter::MixingParameter(double p) : p_(p) {
  if (!(p >= 0.0 && p <= 1.0)) throw ArgumentError("mixing parameter must lie in [0, 1]");
}

// ---------------------------------------------------------------------------

StateVector basis_state(unsigned index, int n_qubits) {
  ComplexVector v = zeros(n_qubits);
  if (index >= static_cast<unsigned>(v.size())) throw ArgumentError("basis index out of range");
  v(index) = 1.0;
  return StateVector(v);
}

StateVector w_radioactive() {
  ComplexVector v = zeros(3);
  const double s = 1.0 / std::sqrt(3.0);
  v(0b001) = s * std::polar(1.0, kPi / 3);
  v(0b010) = s * std::polar(1.0, -kPi / 3);
  v(0b100) = -s;
  return StateVector(v);
}

StateVector xi_state() {
  ComplexVector v = w_radioactive().amplitudes() / std::sqrt(3.0);
  v(0b111) += std::sqrt(2.0 / 3.0);
  return StateVector(v);
}

StateVector w_bar_state() {
  ComplexVector v = zeros(3);
  const double s = 1.0 / std::sqrt(3.0);
  v(0b011) = s;
  v(0b101) = s;
  v(0b110) = s;
  return StateVector(v);
}

StateVector ghz_state() {
  ComplexVector v = zeros(3);
  v(0b000) = v(0b111) = 1.0 / std::sqrt(2.0);
  return StateVector(v);
}

DensityMatrix rho_target() {
  return DensityMatrix(ComplexMatrix(2.0 / 3.0 * xi_state().projector() + 1.0 / 3.0 * w_bar_state().projector()));
}

DensityMatrix maximally_mixed(int n_qubits) {
  const Index dim = Index(1) << n_qubits;
  return DensityMatrix(ComplexMatrix(ComplexMatrix::Identity(dim, dim) / static_cast<double>(dim)));
}

DensityMatrix white_noise_mixture(const DensityMatrix& rho, MixingParameter p) {
  const Index dim = rho.dim();
  const double q = p.value();
  return DensityMatrix(
      ComplexMatrix(q * rho.matrix() + (1.0 - q) / static_cast<double>(dim) * ComplexMatrix::Identity(dim, dim)));
}

DensityMatrix rho_noisy(MixingParameter p) { return white_noise_mixture(rho_target(), p); }

DensityMatrix fully_separable_twin() {
  return DensityMatrix(ComplexMatrix(0.5 * basis_state(0b000, 3).projector() + 0.5 * basis_state(0b111, 3).projector()));
}

PreparationInputs preparation_inputs() {
  const Complex i(0, 1);
  const double r6 = std::sqrt(6.0);

  // Amplitudes on qubits (A, C); qubit B is |0>.
  auto embed_ac = [](Complex a00, Complex a01, Complex a10, Complex a11) {
    ComplexVector v = ComplexVector::Zero(8);
    v(0b000) = a00;
    v(0b001) = a01;
    v(0b100) = a10;
    v(0b101) = a11;
    return v;
  };

  const ComplexVector xi_raw =
      embed_ac((std::exp(-i * kPi / 3.0) + r6 * std::exp(i * kPi / 3.0)) / (3.0 * std::sqrt(2.0)),
               (std::exp(-i * 2.0 * kPi / 3.0) - r6) / std::sqrt(2.0), 0.0, std::sqrt(2.0) / 3.0);

  // |01>_AC + sqrt2 |1>_A |+>_C = |01> + |10> + |11>
  const double s3 = 1.0 / std::sqrt(3.0);
  const ComplexVector wbar_raw = embed_ac(0.0, s3, s3, s3);

  ComplexMatrix u(2, 2);
  u << -1.0, std::exp(-i * kPi / 3.0), std::exp(i * kPi / 3.0), 1.0;
  u /= std::sqrt(2.0);
  const double unitarity = max_abs(ComplexMatrix(u * u.adjoint() - ComplexMatrix::Identity(2, 2)));
  if (unitarity > 1e-12) throw NumericalError("U_C failed its unitarity check");

  return PreparationInputs{StateVector::normalized(xi_raw), xi_raw.squaredNorm(), StateVector(wbar_raw),
                           wbar_raw.squaredNorm(), u, unitarity};
}

// ---------------------------------------------------------------------------

StateVector haar_random_state(int n_qubits, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  ComplexVector v(Index(1) << n_qubits);
  for (Index k = 0; k < v.size(); ++k) {
    const double re = gauss(rng);
    const double im = gauss(rng);
    v(k) = Complex(re, im);
  }
  return StateVector::normalized(v);
}

DensityMatrix random_density_matrix(int n_qubits, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Index dim = Index(1) << n_qubits;
  ComplexMatrix g(dim, dim);
  for (Index c = 0; c < dim; ++c)
    for (Index r = 0; r < dim; ++r) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(r, c) = Complex(re, im);
    }
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return DensityMatrix(Hermitian(rho, 1e-10));
}

StateVector product_across(Qubit single, const ComplexVector& one_qubit, const ComplexVector& two_qubit) {
  if (one_qubit.size() != 2 || two_qubit.size() != 4) throw ArgumentError("product_across: wrong factor sizes");
  const int s = static_cast<int>(single);
  ComplexVector v(8);
  for (unsigned idx = 0; idx < 8; ++idx) {
    unsigned bits[3] = {(idx >> 2) & 1u, (idx >> 1) & 1u, idx & 1u};
    unsigned rest = 0;
    for (int q = 0; q < 3; ++q)
      if (q != s) rest = (rest << 1) | bits[q];
    v(idx) = one_qubit(bits[s]) * two_qubit(rest);
  }
  return StateVector(v, 1e-10);
}

DensityMatrix random_biseparable(std::uint64_t seed, int n_terms) {
  if (n_terms < 1) throw ArgumentError("random_biseparable: n_terms must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> which(0, 2);
  std::exponential_distribution<double> expo(1.0);

  std::vector<double> weights(static_cast<std::size_t>(n_terms));
  for (double& w : weights) w = expo(rng);
  double total = 0;
  for (double w : weights) total += w;

  ComplexMatrix acc = ComplexMatrix::Zero(8, 8);
  for (double w : weights) {
    const auto single = static_cast<Qubit>(which(rng));
    const StateVector one = haar_random_state(1, rng);
    const StateVector two = haar_random_state(2, rng);
    acc += (w / total) * product_across(single, one.amplitudes(), two.amplitudes()).projector();
  }
  return DensityMatrix(Hermitian(acc, 1e-10));
}

// ---------------------------------------------------------------------------

std::vector<std::string> named_state_keys() {
  return {"rho", "rho_p:<p>", "ghz", "ghz_twin", "xi", "wbar", "w_rad", "identity8"};
}

DensityMatrix resolve_named_state(std::string_view key) {
  if (key == "rho") return rho_target();
  if (key == "ghz") return DensityMatrix(ghz_state());
  if (key == "ghz_twin") return fully_separable_twin();
  if (key == "xi") return DensityMatrix(xi_state());
  if (key == "wbar") return DensityMatrix(w_bar_state());
  if (key == "w_rad") return DensityMatrix(w_radioactive());
  if (key == "identity8") return maximally_mixed(3);
  if (key.starts_with("rho_p:")) {
    const std::string_view number = key.substr(6);
    double p = 0;
    const auto [ptr, ec] = std::from_chars(number.data(), number.data() + number.size(), p);
    if (ec != std::errc() || ptr != number.data() + number.size())
      throw ArgumentError("malformed mixing parameter in '" + std::string(key) + "'");
    return rho_noisy(MixingParameter(p));
  }
  throw ArgumentError("unknown state '" + std::string(key) + "'");
}

}  // namespace gmecert
