#include <doctest.h>

#include <cmath>

#include "gmecert/errors.hpp"
#include "gmecert/separability.hpp"
#include "gmecert/tomography.hpp"
#include "gmecert/witness.hpp"
#include "helpers.hpp"

using namespace gmecert;

namespace {

// Fidelity oracle: eigen-decomposition of sqrt(rho) sigma sqrt(rho).
double fidelity_oracle(const ComplexMatrix& rho, const ComplexMatrix& sigma) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(rho);
  const ComplexMatrix root =
      es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().adjoint();
  const ComplexMatrix inner = root * sigma * root;
  const Eigen::VectorXd ev = testing::reference_spectrum(0.5 * (inner + inner.adjoint()));
  const double tr = ev.cwiseMax(0.0).cwiseSqrt().sum();
  return tr * tr;
}

DensityMatrix rotate(const DensityMatrix& rho, const ComplexMatrix& u) {
  return DensityMatrix(Hermitian(ComplexMatrix(u * rho.matrix() * u.adjoint()), 1e-10));
}

}  // namespace

TEST_CASE("measurement settings") {
  const auto& settings = full_protocol();
  CHECK(settings.size() == 216);
  for (std::size_t k = 0; k < settings.size(); ++k) {
    CHECK(settings[k].index() == static_cast<int>(k));
    CHECK(MeasurementSetting::from_label(settings[k].label()).index() == static_cast<int>(k));
  }
  CHECK(settings.front().label() == "Z+|Z+|Z+");
  CHECK(settings[1].label() == "Z+|Z+|Z-");
  CHECK(settings.back().label() == "Y-|Y-|Y-");
  CHECK_THROWS_AS(MeasurementSetting::from_label("Z+|Q+|Z+"), ArgumentError);
  CHECK_THROWS_AS(MeasurementSetting::from_label("Z+|Z+"), ArgumentError);
  CHECK_THROWS_AS(MeasurementSetting::from_label("Z+|Z+|Z+|Z+"), ArgumentError);

  const double h = 1 / std::sqrt(2.0);
  CHECK(std::abs(basis_ket(BasisState::Yp)(1) - Complex(0, h)) < 1e-15);
  CHECK(std::abs(basis_ket(BasisState::Xm)(1) + h) < 1e-15);
  // Each qubit's six projectors sum to 3 * identity.
  ComplexMatrix sum = ComplexMatrix::Zero(2, 2);
  for (int s = 0; s < 6; ++s) {
    const ComplexVector k = basis_ket(static_cast<BasisState>(s));
    sum += k * k.adjoint();
  }
  CHECK((sum - 3 * ComplexMatrix::Identity(2, 2)).norm() < 1e-15);
}

TEST_CASE("Born probabilities") {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix rho = random_density_matrix(3, rng);
    const Eigen::VectorXd p = born_probabilities(rho);
    CHECK(std::abs(p.sum() - 27) < 1e-12);
    const auto& s = full_protocol()[static_cast<std::size_t>(trial * 7)];
    CHECK(p(s.index()) == doctest::Approx((rho.matrix() * s.projector()).trace().real()).epsilon(1e-12));
  }
  const Eigen::VectorXd flat = born_probabilities(maximally_mixed(3));
  CHECK((flat.array() - 0.125).abs().maxCoeff() < 1e-15);
  CHECK_THROWS_AS(born_probabilities(maximally_mixed(2)), ArgumentError);
}

TEST_CASE("simulated counts") {
  const DensityMatrix zero(basis_state(0, 3));
  const Eigen::VectorXd p = born_probabilities(zero);
  CHECK(8 * 350 * p(MeasurementSetting::from_label("Z+|Z+|Z+").index()) == doctest::Approx(8 * 350));
  CHECK(p(MeasurementSetting::from_label("Z-|Z+|Z+").index()) == 0.0);
  const auto data0 = simulate_counts(zero, 350, 1);
  CHECK(data0.counts()(MeasurementSetting::from_label("Z-|Z+|Z+").index()) == 0.0);

  const auto a = simulate_counts(rho_target(), 350, 5), b = simulate_counts(rho_target(), 350, 5);
  CHECK((a.counts() - b.counts()).norm() == 0.0);
  CHECK(a.mean_count() == doctest::Approx(350).epsilon(0.05));
  CHECK(std::abs(a.frequencies().sum() - 1) < 1e-12);
  for (Index j = 0; j < a.counts().size(); ++j) CHECK(a.counts()(j) == std::floor(a.counts()(j)));
  const auto flat = simulate_counts(maximally_mixed(3), 350, 6);
  CHECK(flat.mean_count() == doctest::Approx(350).epsilon(0.05));
  CHECK_THROWS_AS(simulate_counts(rho_target(), 0, 1), ArgumentError);
}

TEST_CASE("dataset validation and JSON") {
  CHECK_THROWS_AS(TomographyDataset::from_counts(Eigen::VectorXd::Ones(10)), ArgumentError);
  CHECK_THROWS_AS(TomographyDataset::from_counts(Eigen::VectorXd::Zero(216)), ArgumentError);
  Eigen::VectorXd neg = Eigen::VectorXd::Ones(216);
  neg(3) = -1;
  CHECK_THROWS_AS(TomographyDataset::from_counts(neg), ArgumentError);

  const auto data = simulate_counts(rho_target(), 50, 9);
  const auto j = to_json(data);
  CHECK(j.at("settings").size() == 216);
  CHECK(j.at("settings")[0] == "Z+|Z+|Z+");
  CHECK(j.at("counts")[0].is_number_integer());
  const auto back = dataset_from_json(nlohmann::json::parse(j.dump()));
  CHECK((back.counts() - data.counts()).norm() == 0.0);

  // Reordered settings map back onto the canonical order.
  nlohmann::json reversed = {{"settings", nlohmann::json::array()}, {"counts", nlohmann::json::array()}};
  for (int k = 215; k >= 0; --k) {
    reversed["settings"].push_back(j["settings"][static_cast<std::size_t>(k)]);
    reversed["counts"].push_back(j["counts"][static_cast<std::size_t>(k)]);
  }
  CHECK((dataset_from_json(reversed).counts() - data.counts()).norm() == 0.0);

  nlohmann::json dup = j;
  dup["settings"][1] = dup["settings"][0];
  CHECK_THROWS_AS(dataset_from_json(dup), ArgumentError);
  nlohmann::json short_list = j;
  short_list["counts"].erase(0);
  CHECK_THROWS_AS(dataset_from_json(short_list), ArgumentError);
}

TEST_CASE("maximum likelihood reconstruction") {
  SUBCASE("maximally mixed fixed point") {
    const auto rec = ml_reconstruct(exact_dataset(maximally_mixed(3)));
    CHECK(rec.converged);
    CHECK((rec.rho_hat.matrix() - ComplexMatrix::Identity(8, 8) / 8.0).norm() < 1e-12);
  }
  SUBCASE("exact frequencies of the target state") {
    MlOptions opts;
    opts.record_likelihood = true;
    const auto rec = ml_reconstruct(exact_dataset(rho_target()), opts);
    CHECK(rec.converged);
    CHECK(rec.final_step_norm <= 1e-10);
    CHECK(fidelity(rec.rho_hat, rho_target()) >= 0.9999);
    CHECK(rec.likelihood_decreases == 0);
    for (std::size_t k = 1; k < rec.likelihood_trace.size(); ++k)
      CHECK(rec.likelihood_trace[k] >= rec.likelihood_trace[k - 1] - 1e-12);
  }
  SUBCASE("high statistics") {
    const DensityMatrix rho = rho_noisy(MixingParameter(0.868));
    const auto rec = ml_reconstruct(simulate_counts(rho, 1e5, 3));
    CHECK(fidelity(rec.rho_hat, rho) >= 0.999);
  }
  SUBCASE("noisy low-count data stay physical and monotone") {
    MlOptions opts;
    opts.record_likelihood = true;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto data = simulate_counts(rho_target(), 20, seed);
      const auto rec = ml_reconstruct(data, opts);
      CHECK(rec.rho_hat.hermitian().trace() == doctest::Approx(1).epsilon(1e-10));
      CHECK(testing::reference_min_eig(rec.rho_hat.matrix()) >= -1e-9);
      CHECK(rec.likelihood_decreases == 0);
      for (std::size_t k = 1; k < rec.likelihood_trace.size(); ++k)
        CHECK(rec.likelihood_trace[k] >= rec.likelihood_trace[k - 1] - 1e-12);
      CHECK(rec.log_likelihood == doctest::Approx(log_likelihood(data, rec.rho_hat)).epsilon(1e-12));
    }
  }
  SUBCASE("diluted iteration") {
    MlOptions opts;
    opts.relaxation = 0.5;
    const auto rec = ml_reconstruct(exact_dataset(rho_noisy(MixingParameter(0.5))), opts);
    CHECK(fidelity(rec.rho_hat, rho_noisy(MixingParameter(0.5))) >= 0.9999);
    opts.relaxation = 0;
    CHECK_THROWS_AS(ml_reconstruct(exact_dataset(rho_target()), opts), ArgumentError);
  }
  SUBCASE("iteration cap") {
    MlOptions opts;
    opts.max_iterations = 3;
    const auto rec = ml_reconstruct(exact_dataset(rho_target()), opts);
    CHECK_FALSE(rec.converged);
    CHECK(rec.iterations == 3);
  }
}

TEST_CASE("dataset mixing") {
  const auto in = exact_dataset(rho_target());
  const auto single = mix_datasets({{in, 1.0}});
  CHECK((single.frequencies() - in.frequencies()).norm() == 0.0);

  const auto xi = exact_dataset(DensityMatrix(xi_state())), wb = exact_dataset(DensityMatrix(w_bar_state()));
  const auto mixed = mix_datasets({{xi, 2.0 / 3}, {wb, 1.0 / 3}});
  CHECK((mixed.frequencies() - born_probabilities(rho_target()) / 27).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fidelity(ml_reconstruct(mixed).rho_hat, rho_target()) >= 0.9999);

  std::vector<std::pair<TomographyDataset, double>> basis;
  for (unsigned k = 0; k < 8; ++k) basis.emplace_back(exact_dataset(DensityMatrix(basis_state(k, 3))), 1.0 / 8);
  const auto flat = ml_reconstruct(mix_datasets(basis));
  CHECK(purity(flat.rho_hat) == doctest::Approx(0.125).epsilon(1e-6));

  const double p = 0.868;
  std::vector<std::pair<TomographyDataset, double>> noisy{{xi, 2 * p / 3}, {wb, p / 3}};
  for (unsigned k = 0; k < 8; ++k) noisy.emplace_back(exact_dataset(DensityMatrix(basis_state(k, 3))), (1 - p) / 8);
  const auto mix = mix_datasets(noisy);
  CHECK((mix.frequencies() - born_probabilities(rho_noisy(MixingParameter(p))) / 27).cwiseAbs().maxCoeff() < 1e-12);

  const auto a = simulate_counts(rho_target(), 100, 1), b = simulate_counts(rho_target(), 300, 2);
  CHECK(mix_datasets({{a, 0.25}, {b, 0.75}}).total() == doctest::Approx(0.25 * a.total() + 0.75 * b.total()));
  CHECK_THROWS_AS(mix_datasets({{a, 0.5}, {b, 0.6}}), ArgumentError);
  CHECK_THROWS_AS(mix_datasets({{a, -0.5}, {b, 1.5}}), ArgumentError);
  CHECK_THROWS_AS(mix_datasets({}), ArgumentError);
}

TEST_CASE("fidelity and purity") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const DensityMatrix a = random_density_matrix(3, rng), b = random_density_matrix(3, rng);
    CHECK(std::abs(fidelity(a, a) - 1) < 1e-10);
    const double f = fidelity(a, b);
    CHECK(f == doctest::Approx(fidelity_oracle(a.matrix(), b.matrix())).epsilon(1e-9));
    CHECK(std::abs(f - fidelity(b, a)) < 1e-10);
    CHECK(f >= 0);
    CHECK(f <= 1 + 1e-9);
    CHECK(purity(a) >= 0.125 - 1e-10);
    CHECK(purity(a) <= 1 + 1e-10);
  }
  CHECK(fidelity(DensityMatrix(basis_state(0, 1)), DensityMatrix(basis_state(1, 1))) == doctest::Approx(0.0));
  CHECK(fidelity(rho_target(), maximally_mixed(3)) ==
        doctest::Approx(fidelity_oracle(rho_target().matrix(), maximally_mixed(3).matrix())).epsilon(1e-8));
  // Pure target: F = <psi|sigma|psi>.
  const DensityMatrix xi(xi_state());
  CHECK(fidelity(xi, rho_target()) == doctest::Approx(2.0 / 3).epsilon(1e-10));
  CHECK_THROWS_AS(fidelity(maximally_mixed(3), maximally_mixed(2)), ArgumentError);

  CHECK(purity(maximally_mixed(3)) == doctest::Approx(0.125).epsilon(1e-14));
  CHECK(purity(rho_target()) == doctest::Approx(5.0 / 9).epsilon(1e-14));
  CHECK(purity(xi) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("local unitary optimization") {
  const ComplexMatrix u = euler_unitary(0.3, -1.2, 2.0);
  CHECK((u * u.adjoint() - ComplexMatrix::Identity(2, 2)).norm() < 1e-14);

  SUBCASE("identity start") {
    const auto res = optimize_local_unitaries(rho_target(), rho_target(), {2, 1, 1e-9, 4000});
    CHECK(res.fidelity == doctest::Approx(1.0).epsilon(1e-8));
  }
  SUBCASE("recovers a bit flip") {
    const ComplexMatrix x = kron(pauli_matrices()[1], ComplexMatrix(ComplexMatrix::Identity(4, 4)));
    const DensityMatrix flipped = rotate(rho_target(), x);
    const auto res = optimize_local_unitaries(flipped, rho_target());
    CHECK(res.initial_fidelity < 0.9);
    CHECK(res.fidelity >= 1 - 1e-6);
    for (const auto& v : res.unitaries) CHECK((v * v.adjoint() - ComplexMatrix::Identity(2, 2)).norm() < 1e-10);
    const ComplexMatrix total = kron(res.unitaries[0], res.unitaries[1], res.unitaries[2]);
    CHECK(fidelity(rotate(flipped, total), rho_target()) == doctest::Approx(res.fidelity).epsilon(1e-9));
  }
  SUBCASE("dephasing cannot be undone") {
    // Dephase qubit A: keep only block-diagonal part in its index.
    ComplexMatrix m = rho_target().matrix();
    for (Index i = 0; i < 8; ++i)
      for (Index j = 0; j < 8; ++j)
        if ((i >> 2) != (j >> 2)) m(i, j) *= 0.5;
    const DensityMatrix dephased{Hermitian(m)};
    const auto res = optimize_local_unitaries(dephased, rho_target(), {4, 2, 1e-9, 4000});
    CHECK(res.fidelity >= res.initial_fidelity - 1e-9);
    CHECK(res.fidelity < 1 - 1e-3);
  }
}

TEST_CASE("Monte Carlo resampling") {
  const DensityMatrix rho = rho_noisy(MixingParameter(0.868));
  const auto data = simulate_counts(rho, 350, 11);
  const Hermitian w = find_witness(rho_target(), true).witness;
  auto stats = marginal_statistics(w);
  stats.push_back({"trace", [](const DensityMatrix& r) { return r.hermitian().trace(); }});

  MonteCarloOptions opts;
  opts.n_samples = 12;
  opts.seed = 77;
  opts.workers = 1;
  const auto serial = monte_carlo(data, stats, opts);
  opts.workers = 4;
  const auto parallel = monte_carlo(data, stats, opts);
  REQUIRE(serial.statistics.size() == 5);
  for (std::size_t s = 0; s < serial.statistics.size(); ++s) {
    CHECK(serial.statistics[s].samples == parallel.statistics[s].samples);
    CHECK(serial.statistics[s].mean == parallel.statistics[s].mean);
    CHECK(serial.statistics[s].std == parallel.statistics[s].std);
  }
  CHECK(serial.at("trace").mean == doctest::Approx(1).epsilon(1e-12));
  CHECK(serial.at("trace").std <= 1e-10);
  CHECK(serial.at("witness").samples.size() == 12);
  const double frac = joint_satisfaction_fraction(serial);
  CHECK(frac >= 0);
  CHECK(frac <= 1);
  CHECK_THROWS_AS(serial.at("missing"), ArgumentError);
  opts.n_samples = 1;
  CHECK_THROWS_AS(monte_carlo(data, stats, opts), ArgumentError);

  SUBCASE("high statistics narrow the fidelity spread") {
    const auto big = simulate_counts(rho, 1e5, 12);
    MonteCarloOptions o;
    o.n_samples = 8;
    o.seed = 5;
    const auto mc = monte_carlo(big, {{"fidelity", [&](const DensityMatrix& r) { return fidelity(r, rho); }}}, o);
    CHECK(mc.at("fidelity").std <= 0.002);
  }
}

TEST_CASE("bias study bookkeeping") {
  const Hermitian w = find_witness(rho_target(), true).witness;
  BiasOptions opts;
  opts.n_trials = 30;
  opts.mean_pairs = 2000;
  opts.seed = 3;
  const auto report = bias_study(rho_noisy(MixingParameter(0.868)), w, opts);
  REQUIRE(report.entries.size() == 4);
  CHECK(report.entries[0].name == "witness");
  CHECK(report.at("beta_AB").true_value == doctest::Approx(0.868 * (5 - 2 * std::sqrt(6.0)) / 27 + 0.132 / 4));
  CHECK(report.control_variate);
  for (const auto& e : report.entries) {
    CHECK(e.raw_bias == doctest::Approx(e.mean_estimate - e.true_value));
    CHECK(e.raw_standard_error == doctest::Approx(e.spread / std::sqrt(30.0)));
    // Adjusted and raw estimates target the same mean.
    CHECK(std::abs(e.bias - e.raw_bias) <= 4 * std::hypot(e.standard_error, e.raw_standard_error));
    CHECK(e.standard_error < e.raw_standard_error);
  }

  BiasOptions plain = opts;
  plain.control_variate = false;
  const auto raw = bias_study(rho_noisy(MixingParameter(0.868)), w, plain);
  CHECK_FALSE(raw.control_variate);
  for (std::size_t k = 0; k < 4; ++k) {
    CHECK(raw.entries[k].bias == doctest::Approx(report.entries[k].raw_bias));
    CHECK(raw.entries[k].standard_error == doctest::Approx(report.entries[k].raw_standard_error));
  }
  // Rank-deficient truth falls back to the plain mean.
  CHECK_FALSE(bias_study(rho_target(), w, opts).control_variate);

  opts.n_trials = 29;
  CHECK_THROWS_AS(bias_study(rho_target(), w, opts), ArgumentError);

  const auto j = to_json(report);
  CHECK(j.at("entries").size() == 4);
  CHECK(j.at("seed") == 3);
}

TEST_CASE("bias shrinks with more pairs") {
  const Hermitian w = find_witness(rho_target(), true).witness;
  const DensityMatrix rho = rho_noisy(MixingParameter(0.868));
  auto mean_beta_bias = [&](double pairs) {
    BiasOptions opts;
    opts.n_trials = 60;
    opts.mean_pairs = pairs;
    opts.seed = 11;
    const auto report = bias_study(rho, w, opts);
    return (std::abs(report.at("beta_AB").bias) + std::abs(report.at("beta_BC").bias) +
            std::abs(report.at("beta_AC").bias)) / 3;
  };
  const double small = mean_beta_bias(350), large = mean_beta_bias(1e4);
  CHECK(large <= 0.5 * small);
}
