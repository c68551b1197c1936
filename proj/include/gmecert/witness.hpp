#pragma once

// Fully decomposable witnesses W = P_M + Q_M^{T_M} (P_M, Q_M >= 0 for every
// bipartition M | rest) with optional restriction to two-body Pauli support,
// found by minimizing Tr(rho W) under Tr W = 1.

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "gmecert/sdp.hpp"
#include "gmecert/states.hpp"

namespace gmecert {

// ---------------------------------------------------------------------------
// Three-qubit Pauli basis

/// Coefficients c_ijk of sum c_ijk sigma_i (x) sigma_j (x) sigma_k, word index 16i + 4j + k.
class PauliCoefficients {
 public:
  static constexpr int kWords = 64;

  static constexpr int index(int i, int j, int k) { return 16 * i + 4 * j + k; }
  /// A word is two-body when at least one factor is the identity.
  static constexpr bool is_two_body(int word) { return word / 16 == 0 || (word / 4) % 4 == 0 || word % 4 == 0; }

  double& operator[](int word) { return c_[static_cast<std::size_t>(word)]; }
  double operator[](int word) const { return c_[static_cast<std::size_t>(word)]; }
  double operator()(int i, int j, int k) const { return (*this)[index(i, j, k)]; }

  /// max |c| over the 27 words acting on all three qubits.
  double three_body_weight() const;
  bool has_two_body_support(double tol = 0.0) const { return three_body_weight() <= tol; }

 private:
  std::array<double, kWords> c_{};
};

/// sigma_i (x) sigma_j (x) sigma_k for word 16i + 4j + k.
const ComplexMatrix& pauli_word(int word);

/// c_ijk = Tr(h sigma_ijk) / 8.
PauliCoefficients pauli_decompose(const Hermitian& h);
Hermitian pauli_compose(const PauliCoefficients& c);

// ---------------------------------------------------------------------------
// Problem and certificate

/// The witness SDP plus handles to its matrix expressions. Index k of the
/// arrays is bipartition {A, B, C}[k] | rest.
struct WitnessProblem {
  sdp::SdpProblem problem;
  sdp::AffineHermitian witness;
  std::array<sdp::AffineHermitian, 3> p;
  std::array<sdp::AffineHermitian, 3> q;
  std::vector<int> words;  // Pauli words spanning the witness
  bool two_body_only = true;
};

WitnessProblem build_witness_problem(const DensityMatrix& rho, bool two_body_only);

struct Decomposition {
  Hermitian p;
  Hermitian q;
};

struct CertificateResiduals {
  double trace = 0;     // |Tr W - 1|
  double two_body = 0;  // max three-body Pauli weight of W
  std::array<double, 3> reconstruction{};  // ||W - P_M - Q_M^{T_M}||_F
  std::array<double, 3> min_eig_p{};
  std::array<double, 3> min_eig_q{};
};

struct WitnessCertificate {
  Hermitian witness;
  std::array<Decomposition, 3> decompositions;
  double objective = 0;  // Tr(rho W)
  bool two_body_only = true;
  CertificateResiduals residuals;
  sdp::SdpStatus status = sdp::SdpStatus::optimal;
  sdp::KktResiduals kkt;
  double dual_bound = 0;
  int iterations = 0;
  bool valid = false;
};

/// Thresholds applied by validate_certificate.
struct CertificateTolerances {
  double trace = 1e-8;
  double two_body = 1e-8;
  double reconstruction = 1e-6;
  double min_eigenvalue = -1e-8;
};

struct CheckResult {
  std::string name;
  double value;
  double threshold;
  bool passed;
};

struct ValidationReport {
  CertificateResiduals residuals;
  std::vector<CheckResult> checks;
  bool passed() const;
};

/// Recomputes every residual from the certificate matrices alone.
ValidationReport validate_certificate(const WitnessCertificate& cert, const CertificateTolerances& tol = {});

/// W = 1/8, P_M = Q_M = 1/16: always feasible, objective 1/8.
WitnessCertificate identity_certificate();

/// Solves the witness SDP; `valid` is set when the solver reports optimal and
/// the independent validation passes.
WitnessCertificate find_witness(const DensityMatrix& rho, bool two_body_only = true,
                                const sdp::SdpOptions& options = {});

/// Re Tr(rho W); throws NumericalError if |Im Tr(rho W)| > 1e-10.
double witness_value(const Hermitian& witness, const DensityMatrix& rho);

struct NoiseToleranceOptions {
  double p_low = 0.7;
  double p_high = 1.0;
  double p_tolerance = 1e-3;
  int max_solves = 20;
  bool two_body_only = true;
  sdp::SdpOptions sdp;
};

struct NoiseTolerance {
  double tolerance = 0;           // 1 - p*
  double p_star = 0;              // bisection estimate of the detection threshold
  double closed_form = 0;         // 1 - 1/(1 - 8 Tr(rho W*))
  double objective_at_state = 0;  // optimum at p = 1
  int sdp_solves = 0;
};

/// White-noise admixture 1 - p* up to which the witness SDP still returns a
/// negative value for p rho + (1 - p)/8. Throws ArgumentError when no
/// negative value exists at p = 1.
NoiseTolerance noise_tolerance(const DensityMatrix& rho, const NoiseToleranceOptions& options = {});

nlohmann::json to_json(const WitnessCertificate& cert);
nlohmann::json to_json(const ValidationReport& report);

}  // namespace gmecert
