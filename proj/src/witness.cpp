#include "gmecert/witness.hpp"

#include <cmath>
#include <sstream>

#include "gmecert/matrix_json.hpp"

namespace gmecert {

namespace {

constexpr std::array<Qubit, 3> kBipartitions = {Qubit::A, Qubit::B, Qubit::C};

std::string suffix(std::size_t k) { return std::string(1, qubit_name(kBipartitions[k])); }

}  // namespace

// ---------------------------------------------------------------------------

double PauliCoefficients::three_body_weight() const {
  double worst = 0;
  for (int w = 0; w < kWords; ++w)
    if (!is_two_body(w)) worst = std::max(worst, std::abs(c_[static_cast<std::size_t>(w)]));
  return worst;
}

const ComplexMatrix& pauli_word(int word) {
  static const std::array<ComplexMatrix, PauliCoefficients::kWords> table = [] {
    std::array<ComplexMatrix, PauliCoefficients::kWords> t;
    const auto& s = pauli_matrices();
    for (int w = 0; w < PauliCoefficients::kWords; ++w)
      t[static_cast<std::size_t>(w)] = kron(s[static_cast<std::size_t>(w / 16)],
                                            s[static_cast<std::size_t>((w / 4) % 4)],
                                            s[static_cast<std::size_t>(w % 4)]);
    return t;
  }();
  if (word < 0 || word >= PauliCoefficients::kWords) throw ArgumentError("Pauli word index out of range");
  return table[static_cast<std::size_t>(word)];
}

PauliCoefficients pauli_decompose(const Hermitian& h) {
  if (h.dim() != 8) throw ArgumentError("pauli_decompose expects an 8x8 operator");
  PauliCoefficients c;
  for (int w = 0; w < PauliCoefficients::kWords; ++w)
    c[w] = (h.matrix().array() * pauli_word(w).transpose().array()).sum().real() / 8.0;
  return c;
}

Hermitian pauli_compose(const PauliCoefficients& c) {
  ComplexMatrix out = ComplexMatrix::Zero(8, 8);
  for (int w = 0; w < PauliCoefficients::kWords; ++w)
    if (c[w] != 0.0) out += c[w] * pauli_word(w);
  return Hermitian(out);
}

// ---------------------------------------------------------------------------

WitnessProblem build_witness_problem(const DensityMatrix& rho, bool two_body_only) {
  if (rho.n_qubits() != 3) throw ArgumentError("witness search needs a three-qubit state");

  WitnessProblem wp;
  wp.two_body_only = two_body_only;
  std::vector<ComplexMatrix> basis;
  for (int w = 0; w < PauliCoefficients::kWords; ++w)
    if (!two_body_only || PauliCoefficients::is_two_body(w)) {
      wp.words.push_back(w);
      basis.push_back(pauli_word(w));
    }

  auto& prob = wp.problem;
  wp.witness = prob.add_parametrized_block("W", basis);
  prob.add_equality(sdp::trace_inner(ComplexMatrix::Identity(8, 8), wp.witness), 1.0);

  for (std::size_t k = 0; k < kBipartitions.size(); ++k) {
    const QubitSet m{kBipartitions[k]};
    wp.p[k] = prob.add_hermitian_block("P_" + suffix(k), 8);
    wp.q[k] = prob.add_hermitian_block("Q_" + suffix(k), 8);
    const auto q_transposed = wp.q[k].mapped([&](const ComplexMatrix& a) { return partial_transpose(a, m); });
    prob.add_equality(wp.witness - wp.p[k] - q_transposed);
    prob.add_psd("P_" + suffix(k), wp.p[k]);
    prob.add_psd("Q_" + suffix(k), wp.q[k]);
  }
  prob.set_objective(sdp::trace_inner(rho.matrix(), wp.witness));
  return wp;
}

bool ValidationReport::passed() const {
  for (const auto& c : checks)
    if (!c.passed) return false;
  return true;
}

ValidationReport validate_certificate(const WitnessCertificate& cert, const CertificateTolerances& tol) {
  ValidationReport report;
  auto& r = report.residuals;
  auto check = [&](std::string name, double value, double threshold, bool ok) {
    report.checks.push_back(CheckResult{std::move(name), value, threshold, ok});
  };

  if (cert.witness.dim() != 8) throw ArgumentError("certificate witness must be 8x8");
  r.trace = std::abs(cert.witness.trace() - 1.0);
  check("trace", r.trace, tol.trace, r.trace <= tol.trace);

  r.two_body = pauli_decompose(cert.witness).three_body_weight();
  if (cert.two_body_only) check("two_body_support", r.two_body, tol.two_body, r.two_body <= tol.two_body);

  for (std::size_t k = 0; k < kBipartitions.size(); ++k) {
    const auto& d = cert.decompositions[k];
    const ComplexMatrix diff =
        cert.witness.matrix() - d.p.matrix() - partial_transpose(d.q.matrix(), QubitSet{kBipartitions[k]});
    r.reconstruction[k] = diff.norm();
    r.min_eig_p[k] = min_eigenvalue(d.p);
    r.min_eig_q[k] = min_eigenvalue(d.q);
    check("reconstruction_" + suffix(k), r.reconstruction[k], tol.reconstruction,
          r.reconstruction[k] <= tol.reconstruction);
    check("min_eig_P_" + suffix(k), r.min_eig_p[k], tol.min_eigenvalue, r.min_eig_p[k] >= tol.min_eigenvalue);
    check("min_eig_Q_" + suffix(k), r.min_eig_q[k], tol.min_eigenvalue, r.min_eig_q[k] >= tol.min_eigenvalue);
  }
  return report;
}

WitnessCertificate identity_certificate() {
  WitnessCertificate cert;
  cert.witness = Hermitian(ComplexMatrix(ComplexMatrix::Identity(8, 8) / 8.0));
  const Hermitian half(ComplexMatrix(ComplexMatrix::Identity(8, 8) / 16.0));
  for (auto& d : cert.decompositions) d = Decomposition{half, half};
  cert.objective = 1.0 / 8.0;
  cert.residuals = validate_certificate(cert).residuals;
  cert.valid = true;
  return cert;
}

WitnessCertificate find_witness(const DensityMatrix& rho, bool two_body_only, const sdp::SdpOptions& options) {
  const WitnessProblem wp = build_witness_problem(rho, two_body_only);
  const sdp::SdpSolution sol = sdp::solve(wp.problem, options);

  WitnessCertificate cert;
  cert.two_body_only = two_body_only;
  cert.witness = sol.block_values.at("W");
  for (std::size_t k = 0; k < kBipartitions.size(); ++k)
    cert.decompositions[k] = Decomposition{sol.block_values.at("P_" + suffix(k)), sol.block_values.at("Q_" + suffix(k))};
  cert.objective = witness_value(cert.witness, rho);
  cert.status = sol.status;
  cert.kkt = sol.residuals;
  cert.dual_bound = sol.dual_bound;
  cert.iterations = sol.iterations;

  const ValidationReport report = validate_certificate(cert);
  cert.residuals = report.residuals;
  cert.valid = sol.status == sdp::SdpStatus::optimal && report.passed();
  return cert;
}

double witness_value(const Hermitian& witness, const DensityMatrix& rho) {
  if (witness.dim() != rho.dim()) throw ArgumentError("witness_value: dimension mismatch");
  const Complex v = (rho.matrix().array() * witness.matrix().transpose().array()).sum();
  if (std::abs(v.imag()) > 1e-10) throw NumericalError("witness_value: Tr(rho W) has an imaginary part");
  return v.real();
}

NoiseTolerance noise_tolerance(const DensityMatrix& rho, const NoiseToleranceOptions& options) {
  if (!(0.0 <= options.p_low && options.p_low < options.p_high && options.p_high <= 1.0))
    throw ArgumentError("noise_tolerance: invalid bisection bracket");

  NoiseTolerance out;
  auto optimum_at = [&](double p) {
    ++out.sdp_solves;
    const auto cert = find_witness(white_noise_mixture(rho, MixingParameter(p)), options.two_body_only, options.sdp);
    if (cert.status != sdp::SdpStatus::optimal)
      throw NumericalError("noise_tolerance: witness SDP did not converge at p = " + std::to_string(p));
    return cert.objective;
  };

  out.objective_at_state = optimum_at(1.0);
  if (out.objective_at_state >= 0.0)
    throw ArgumentError("noise_tolerance: the state has no negative witness value; nothing to tolerate");
  out.closed_form = 1.0 - 1.0 / (1.0 - 8.0 * out.objective_at_state);

  double hi = options.p_high;
  if (hi < 1.0 && optimum_at(hi) >= 0.0)
    throw ArgumentError("noise_tolerance: state is not detected at the upper end of the bracket");
  // At p = 0 the state is maximally mixed and Tr(W/dim) = 1/dim > 0.
  double lo = options.p_low;
  if (lo > 0.0 && optimum_at(lo) < 0.0) lo = 0.0;

  while (hi - lo > options.p_tolerance && out.sdp_solves < options.max_solves) {
    const double mid = 0.5 * (lo + hi);
    (optimum_at(mid) >= 0.0 ? lo : hi) = mid;
  }
  out.p_star = 0.5 * (lo + hi);
  out.tolerance = 1.0 - out.p_star;
  return out;
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const WitnessCertificate& cert) {
  using nlohmann::json;
  json decomp;
  for (std::size_t k = 0; k < kBipartitions.size(); ++k)
    decomp[suffix(k)] = {{"P", matrix_to_json(cert.decompositions[k].p.matrix())},
                         {"Q", matrix_to_json(cert.decompositions[k].q.matrix())}};
  const auto& r = cert.residuals;
  return json{{"W", matrix_to_json(cert.witness.matrix())},
              {"decompositions", decomp},
              {"objective", cert.objective},
              {"two_body_only", cert.two_body_only},
              {"valid", cert.valid},
              {"status", sdp::to_string(cert.status)},
              {"iterations", cert.iterations},
              {"dual_bound", cert.dual_bound},
              {"kkt", {{"primal", cert.kkt.primal}, {"dual", cert.kkt.dual}, {"gap", cert.kkt.gap}}},
              {"residuals",
               {{"trace", r.trace},
                {"two_body", r.two_body},
                {"reconstruction", r.reconstruction},
                {"min_eig_P", r.min_eig_p},
                {"min_eig_Q", r.min_eig_q}}}};
}

nlohmann::json to_json(const ValidationReport& report) {
  nlohmann::json checks = nlohmann::json::array();
  for (const auto& c : report.checks)
    checks.push_back({{"name", c.name}, {"value", c.value}, {"threshold", c.threshold}, {"passed", c.passed}});
  return {{"passed", report.passed()}, {"checks", checks}};
}

}  // namespace gmecert
