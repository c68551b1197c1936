#include <doctest.h>

#include <cmath>

#include "gmecert/errors.hpp"
#include "gmecert/separability.hpp"
#include "helpers.hpp"

using namespace gmecert;

namespace {

const double kBetaExact = (5.0 - 2.0 * std::sqrt(6.0)) / 27.0;

// Marginal by explicit summation over the traced-out qubit.
ComplexMatrix marginal_oracle(const ComplexMatrix& rho, int traced) {
  ComplexMatrix out = ComplexMatrix::Zero(4, 4);
  auto insert = [&](Index two, Index bit) {
    const int shift = 2 - traced;
    const Index high = (two >> shift) << (shift + 1);
    const Index low = two & ((Index(1) << shift) - 1);
    return high | (bit << shift) | low;
  };
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 4; ++j)
      for (Index b = 0; b < 2; ++b) out(i, j) += rho(insert(i, b), insert(j, b));
  return out;
}

ComplexMatrix transpose_first(const ComplexMatrix& m) {
  ComplexMatrix out(4, 4);
  for (Index r = 0; r < 4; ++r)
    for (Index c = 0; c < 4; ++c) out((c & 2) | (r & 1), (r & 2) | (c & 1)) = m(r, c);
  return out;
}

}  // namespace

TEST_CASE("pair labels") {
  CHECK(pair_name(QubitPair::AB) == "AB");
  CHECK(pair_name(QubitPair::BC) == "BC");
  CHECK(pair_name(QubitPair::AC) == "AC");
  CHECK(pair_from_name("AC") == QubitPair::AC);
  CHECK_THROWS_AS(pair_from_name("CA"), ArgumentError);
  CHECK_THROWS_AS(pair_from_name("AD"), ArgumentError);
  CHECK(transposed_qubit(QubitPair::AB) == Qubit::A);
  CHECK(transposed_qubit(QubitPair::BC) == Qubit::B);
  CHECK(transposed_qubit(QubitPair::AC) == Qubit::A);
}

TEST_CASE("target state marginals") {
  const auto reports = analyze_marginals(rho_target());
  REQUIRE(reports.size() == 3);
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(reports[k].pair == kAllPairs[k]);
    CHECK(std::abs(reports[k].beta - kBetaExact) < 1e-12);
    CHECK(std::abs(reports[k].beta - 3.7415e-3) < 1e-7);
    CHECK(reports[k].separable);
  }
}

TEST_CASE("marginals match an explicit-summation oracle") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const DensityMatrix rho = random_density_matrix(3, rng);
    const ComplexMatrix& m = rho.matrix();
    CHECK((pair_marginal(rho, QubitPair::AB).matrix() - marginal_oracle(m, 2)).norm() < 1e-14);
    CHECK((pair_marginal(rho, QubitPair::BC).matrix() - marginal_oracle(m, 0)).norm() < 1e-14);
    CHECK((pair_marginal(rho, QubitPair::AC).matrix() - marginal_oracle(m, 1)).norm() < 1e-14);
    for (QubitPair pair : kAllPairs) {
      const int traced = pair == QubitPair::AB ? 2 : pair == QubitPair::BC ? 0 : 1;
      const double oracle = testing::reference_min_eig(transpose_first(marginal_oracle(m, traced)));
      CHECK(std::abs(beta_of_pair(rho, pair) - oracle) < 1e-12);
    }
  }
}

TEST_CASE("known values") {
  for (const auto& r : analyze_marginals(DensityMatrix(ghz_state()))) {
    CHECK(std::abs(r.beta) < 1e-15);
    CHECK(r.separable);
  }
  for (QubitPair pair : kAllPairs) CHECK(beta_of_pair(maximally_mixed(3), pair) == doctest::Approx(0.25).epsilon(1e-14));

  const double shifted = 0.868 * kBetaExact + 0.132 / 4;
  CHECK(shifted == doctest::Approx(3.625e-2).epsilon(1e-3));
  for (const auto& r : analyze_marginals(rho_noisy(MixingParameter(0.868)))) CHECK(std::abs(r.beta - shifted) < 1e-12);

  SUBCASE("Bell pair with a mixed third qubit") {
    ComplexVector bell = ComplexVector::Zero(4);
    bell(0) = bell(3) = 1 / std::sqrt(2.0);
    const ComplexMatrix half = ComplexMatrix::Identity(2, 2) / 2.0;
    const DensityMatrix ab(ComplexMatrix(kron(ComplexMatrix(bell * bell.adjoint()), half)));
    CHECK(beta_of_pair(ab, QubitPair::AB) == doctest::Approx(-0.5).epsilon(1e-12));
    const auto reports = analyze_marginals(ab);
    CHECK_FALSE(reports[0].separable);
    CHECK(reports[1].separable);
    CHECK(reports[2].separable);
    const DensityMatrix bc(ComplexMatrix(kron(half, ComplexMatrix(bell * bell.adjoint()))));
    CHECK(beta_of_pair(bc, QubitPair::BC) == doctest::Approx(-0.5).epsilon(1e-12));
  }
  SUBCASE("non three-qubit input") {
    CHECK_THROWS_AS(analyze_marginals(maximally_mixed(2)), ArgumentError);
  }
}

TEST_CASE("transpose-side independence and range") {
  std::mt19937_64 rng(22);
  for (int trial = 0; trial < 50; ++trial) {
    const DensityMatrix rho = random_density_matrix(3, rng);
    for (QubitPair pair : kAllPairs) {
      const Hermitian m = pair_marginal(rho, pair);
      const double first = min_eigenvalue(partial_transpose(m, QubitSet{Qubit::A}));
      const double second = min_eigenvalue(partial_transpose(m, QubitSet{Qubit::B}));
      CHECK(std::abs(first - second) < 1e-12);
      CHECK(first >= -0.5 - 1e-12);
      CHECK(first <= 0.5 + 1e-12);
    }
  }
}

TEST_CASE("beta is affine in the mixing parameter") {
  const double slope = kBetaExact - 0.25;
  CHECK(slope < 0);
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (QubitPair pair : kAllPairs)
      CHECK(std::abs(beta_of_pair(rho_noisy(MixingParameter(p)), pair) - (0.25 + slope * p)) < 1e-10);
}

TEST_CASE("report JSON") {
  const auto j = to_json(analyze_marginals(rho_target())[1]);
  CHECK(j.at("pair") == "BC");
  CHECK(j.at("separable") == true);
  CHECK(j.at("beta").get<double>() == doctest::Approx(kBetaExact));
}
