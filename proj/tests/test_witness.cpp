#include <doctest.h>

#include <cmath>

#include "gmecert/errors.hpp"
#include "gmecert/separability.hpp"
#include "gmecert/witness.hpp"
#include "helpers.hpp"

using namespace gmecert;

namespace {

const WitnessCertificate& target_certificate() {
  static const WitnessCertificate cert = find_witness(rho_target(), true);
  return cert;
}

constexpr std::array<Qubit, 3> kCuts = {Qubit::A, Qubit::B, Qubit::C};

}  // namespace

TEST_CASE("Pauli decomposition") {
  const PauliCoefficients id = pauli_decompose(Hermitian::identity(8));
  CHECK(id[0] == doctest::Approx(1.0));
  for (int w = 1; w < 64; ++w) CHECK(id[w] == 0.0);

  const PauliCoefficients zzz = pauli_decompose(Hermitian(pauli_word(PauliCoefficients::index(3, 3, 3))));
  CHECK(zzz(3, 3, 3) == doctest::Approx(1.0));
  CHECK_FALSE(PauliCoefficients::is_two_body(PauliCoefficients::index(3, 3, 3)));
  CHECK_FALSE(zzz.has_two_body_support(1e-12));

  int permitted = 0;
  for (int w = 0; w < 64; ++w) permitted += PauliCoefficients::is_two_body(w);
  CHECK(permitted == 37);

  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 100; ++trial) {
    const Hermitian h = testing::random_hermitian(8, rng);
    const PauliCoefficients c = pauli_decompose(h);
    CHECK((pauli_compose(c).matrix() - h.matrix()).norm() < 1e-12);
    // Direct trace formula as oracle.
    const int w = trial % 64;
    CHECK(c[w] == doctest::Approx((h.matrix() * pauli_word(w)).trace().real() / 8).epsilon(1e-12));
  }
  CHECK_THROWS_AS(pauli_decompose(Hermitian::identity(4)), ArgumentError);
  CHECK_THROWS_AS(pauli_word(64), ArgumentError);
}

TEST_CASE("problem structure") {
  const WitnessProblem two = build_witness_problem(rho_target(), true);
  CHECK(two.words.size() == 37);
  CHECK(two.witness.terms().size() == 37);
  // 37 witness parameters, six 8x8 Hermitian blocks.
  CHECK(two.problem.num_variables() == 37 + 6 * 64);
  CHECK(two.problem.cones().size() == 6);
  const WitnessProblem full = build_witness_problem(rho_target(), false);
  CHECK(full.words.size() == 64);
  CHECK_THROWS_AS(build_witness_problem(maximally_mixed(2), true), ArgumentError);
}

TEST_CASE("identity certificate") {
  const WitnessCertificate cert = identity_certificate();
  const ValidationReport report = validate_certificate(cert);
  CHECK(report.passed());
  CHECK(report.residuals.trace <= 1e-12);
  CHECK(report.residuals.two_body <= 1e-12);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(report.residuals.reconstruction[k] <= 1e-12);
    CHECK(report.residuals.min_eig_p[k] >= 0);
  }
  CHECK(cert.objective == doctest::Approx(0.125));

  WitnessCertificate broken = cert;
  ComplexMatrix p = broken.decompositions[0].p.matrix();
  p(2, 2) -= 1e-3 + 1.0 / 16;
  broken.decompositions[0].p = Hermitian(p);
  const ValidationReport bad = validate_certificate(broken);
  CHECK_FALSE(bad.passed());
  bool min_eig_failed = false;
  for (const auto& c : bad.checks)
    if (c.name == "min_eig_P_A") min_eig_failed = !c.passed;
  CHECK(min_eig_failed);
}

TEST_CASE("target state witness") {
  const auto& cert = target_certificate();
  CHECK(cert.status == sdp::SdpStatus::optimal);
  CHECK(cert.valid);
  CHECK(cert.objective >= -2.05e-2);
  CHECK(cert.objective <= -1.90e-2);
  CHECK(std::abs(witness_value(cert.witness, rho_target()) - cert.objective) <= 1e-8);
  const auto report = validate_certificate(cert, CertificateTolerances{1e-6, 1e-6, 1e-6, -1e-6});
  CHECK(report.passed());
  CHECK(cert.residuals.two_body <= 1e-8);
  CHECK(std::abs(cert.witness.trace() - 1) <= 1e-8);
}

TEST_CASE("complementary cut gives the same constraint") {
  // W = P + Q^{T_M} = P + (Q^T)^{T_{complement}} with Q^T PSD iff Q PSD.
  const auto& cert = target_certificate();
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& d = cert.decompositions[k];
    const Hermitian qt(ComplexMatrix(d.q.matrix().transpose()));
    const QubitSet comp = QubitSet{kCuts[k]}.complement(3);
    CHECK((cert.witness.matrix() - d.p.matrix() - partial_transpose(qt.matrix(), comp)).norm() < 1e-6);
    CHECK(std::abs(min_eigenvalue(qt) - min_eigenvalue(d.q)) < 1e-12);
  }
}

TEST_CASE("no false positives") {
  const auto twin = find_witness(fully_separable_twin(), true);
  CHECK(twin.status == sdp::SdpStatus::optimal);
  CHECK(twin.objective >= -1e-7);
  const auto ghz = find_witness(DensityMatrix(ghz_state()), true);
  CHECK(ghz.status == sdp::SdpStatus::optimal);
  CHECK(ghz.objective >= -1e-7);

  const Hermitian& w = target_certificate().witness;
  double worst = 1;
  for (std::uint64_t seed = 0; seed < 1000; ++seed)
    worst = std::min(worst, witness_value(w, random_biseparable(seed, 1 + static_cast<int>(seed % 6))));
  CHECK(worst >= -1e-7);
}

TEST_CASE("marginal sufficiency") {
  const Hermitian& w = target_certificate().witness;
  CHECK(std::abs(witness_value(w, DensityMatrix(ghz_state())) - witness_value(w, fully_separable_twin())) < 1e-10);
  // Any state with the same marginals: GHZ with a relative phase.
  ComplexVector v = ComplexVector::Zero(8);
  v(0) = 1 / std::sqrt(2.0);
  v(7) = Complex(0, 1) / std::sqrt(2.0);
  CHECK(std::abs(witness_value(w, DensityMatrix(StateVector(v))) - witness_value(w, fully_separable_twin())) < 1e-10);
}

TEST_CASE("affine noise law") {
  const Hermitian& w = target_certificate().witness;
  const double at_one = witness_value(w, rho_target());
  CHECK(witness_value(w, rho_noisy(MixingParameter(0))) == doctest::Approx(0.125).epsilon(1e-12));
  for (double p : {0.1, 0.5, 0.868, 0.95})
    CHECK(std::abs(witness_value(w, rho_noisy(MixingParameter(p))) - (p * at_one + (1 - p) / 8)) < 1e-10);
}

TEST_CASE("dropping the two-body constraint can only lower the optimum") {
  const auto full = find_witness(rho_target(), false);
  CHECK(full.status == sdp::SdpStatus::optimal);
  CHECK(full.valid);
  CHECK(full.objective <= target_certificate().objective + 1e-7);
}

TEST_CASE("witness value") {
  CHECK(witness_value(Hermitian(ComplexMatrix(ComplexMatrix::Identity(8, 8) / 8.0)), maximally_mixed(3)) ==
        doctest::Approx(0.125));
  CHECK_THROWS_AS(witness_value(Hermitian::identity(4), maximally_mixed(3)), ArgumentError);
}

TEST_CASE("noise tolerance") {
  const NoiseTolerance nt = noise_tolerance(rho_target());
  CHECK(nt.tolerance >= 0.132);
  CHECK(nt.tolerance <= 0.142);
  CHECK(nt.sdp_solves <= 20);
  CHECK(std::abs(nt.tolerance - nt.closed_form) <= 2e-3);
  CHECK(nt.closed_form == doctest::Approx(1 - 1 / (1 + 8 * std::abs(nt.objective_at_state))).epsilon(1e-12));
  CHECK_THROWS_AS(noise_tolerance(maximally_mixed(3)), ArgumentError);
}

TEST_CASE("certificate JSON") {
  const auto j = to_json(target_certificate());
  for (const char* key : {"W", "decompositions", "objective", "residuals"}) CHECK(j.contains(key));
  for (const char* cut : {"A", "B", "C"}) {
    CHECK(j.at("decompositions").contains(cut));
    CHECK(j.at("decompositions").at(cut).contains("P"));
  }
  CHECK(to_json(validate_certificate(target_certificate())).at("passed") == true);
}
