#pragma once

// Simulated three-qubit Pauli-eigenstate tomography: 6^3 product projectors,
// Poisson counts, RrhoR maximum-likelihood reconstruction and the
// statistics built on top of it.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gmecert/states.hpp"

namespace gmecert {

/// Single-qubit projection states in protocol order.
enum class BasisState { Zp, Zm, Xp, Xm, Yp, Ym };

inline constexpr int kSettingsPerQubit = 6;
inline constexpr int kSettings = 216;

std::string_view basis_label(BasisState s);
ComplexVector basis_ket(BasisState s);

struct MeasurementSetting {
  std::array<BasisState, 3> states;

  /// "Z+|X-|Y+" (qubits A, B, C).
  std::string label() const;
  static MeasurementSetting from_label(std::string_view label);

  ComplexVector ket() const;
  ComplexMatrix projector() const { return ket() * ket().adjoint(); }
  /// Position in the canonical enumeration (lexicographic over A, B, C).
  int index() const;
};

/// All 216 settings in canonical order.
const std::vector<MeasurementSetting>& full_protocol();

/// Tr(rho Pi_j) for every setting; sums to 27 for any state.
Eigen::VectorXd born_probabilities(const DensityMatrix& rho);

/// Counts over the canonical protocol. Raw datasets hold integer counts;
/// mixed datasets hold the rescaled, possibly fractional, effective counts.
class TomographyDataset {
 public:
  /// Throws ArgumentError unless there are 216 non-negative finite counts with a positive total.
  static TomographyDataset from_counts(Eigen::VectorXd counts);
  /// counts_j = frequencies_j * effective_total.
  static TomographyDataset from_frequencies(const Eigen::VectorXd& frequencies, double effective_total);

  const Eigen::VectorXd& counts() const { return counts_; }
  const Eigen::VectorXd& frequencies() const { return frequencies_; }
  double total() const { return total_; }
  double mean_count() const { return total_ / kSettings; }

 private:
  Eigen::VectorXd counts_;
  Eigen::VectorXd frequencies_;
  double total_ = 0;
};

/// Counts_j ~ Poisson(8 * mean_pairs * Tr(rho Pi_j)).
TomographyDataset simulate_counts(const DensityMatrix& rho, double mean_pairs, std::uint64_t seed);

/// Frequencies equal to the normalized Born probabilities (infinite statistics).
TomographyDataset exact_dataset(const DensityMatrix& rho, double effective_total = 1e6);

/// Convex mix of frequencies; effective total sum_i w_i total_i.
TomographyDataset mix_datasets(const std::vector<std::pair<TomographyDataset, double>>& parts);

struct MlOptions {
  int max_iterations = 5000;
  double step_tolerance = 1e-10;      // Frobenius norm of rho_{k+1} - rho_k
  double probability_floor = 1e-12;
  /// rho <- (1 - r) rho + r RrhoR / Tr(RrhoR); 1 is the plain iteration.
  /// Steps that lower the likelihood are retried with r halved.
  double relaxation = 1.0;
  /// After an accepted step, try R^t rho R^t / Tr for t = 2, 4, ... and keep
  /// the last t that still raises the likelihood.
  bool extrapolate = true;
  int max_doublings = 12;
  bool record_likelihood = false;
};

struct ReconstructionResult {
  DensityMatrix rho_hat;
  int iterations = 0;
  double final_step_norm = 0;
  double log_likelihood = 0;  // sum_j f_j log(Tr(rho Pi_j)/27)
  bool converged = false;
  int rejected_steps = 0;
  int likelihood_decreases = 0;  // accepted steps lowering the likelihood by more than 1e-12
  std::vector<double> likelihood_trace;
};

ReconstructionResult ml_reconstruct(const TomographyDataset& data, const MlOptions& options = {});

double log_likelihood(const TomographyDataset& data, const DensityMatrix& rho, double floor = 1e-12);

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, evaluated as the
/// squared trace norm of sqrt(rho) sqrt(sigma).
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

double purity(const DensityMatrix& rho);

/// exp(-i a Z/2) exp(-i b Y/2) exp(-i c Z/2).
ComplexMatrix euler_unitary(double a, double b, double c);

struct LocalUnitaryOptions {
  int restarts = 20;  // restart 0 starts at the identity, the rest at seeded random angles
  std::uint64_t seed = 0;
  double function_tolerance = 1e-9;
  int max_evaluations = 4000;  // per restart
};

struct LocalUnitaryResult {
  std::array<ComplexMatrix, 3> unitaries;
  std::array<double, 9> angles{};
  double fidelity = 0;          // with the unitaries applied
  double initial_fidelity = 0;  // without
};

/// Maximizes fidelity((U_A x U_B x U_C) rho_exp (.)^H, rho_target) over
/// z-y-z Euler angles with restarted Nelder-Mead.
LocalUnitaryResult optimize_local_unitaries(const DensityMatrix& rho_exp, const DensityMatrix& rho_target,
                                            const LocalUnitaryOptions& options = {});

// ---------------------------------------------------------------------------
// Resampling studies

struct NamedStatistic {
  std::string name;
  std::function<double(const DensityMatrix&)> evaluate;
};

/// beta_AB, beta_BC, beta_AC and Tr(rho W), in that order.
std::vector<NamedStatistic> marginal_statistics(const Hermitian& witness);

struct StatisticSummary {
  std::string name;
  double mean = 0;
  double std = 0;  // sample standard deviation (n - 1)
  std::vector<double> samples;
};

struct MonteCarloOptions {
  int n_samples = 1000;
  std::uint64_t seed = 0;
  unsigned workers = 0;  // 0: hardware concurrency
  MlOptions ml;
};

struct MonteCarloResult {
  std::vector<StatisticSummary> statistics;
  std::uint64_t seed = 0;
  int n_samples = 0;
  int non_converged = 0;

  const StatisticSummary& at(std::string_view name) const;
};

/// Resamples counts'_j ~ Poisson(counts_j), reconstructs every sample and
/// evaluates each statistic. Sample k draws from a generator derived from
/// (seed, k), so results do not depend on the worker count.
MonteCarloResult monte_carlo(const TomographyDataset& data, const std::vector<NamedStatistic>& statistics,
                             const MonteCarloOptions& options);

/// Fraction of samples with every beta > 0 and witness value < 0; expects the
/// layout of marginal_statistics.
double joint_satisfaction_fraction(const MonteCarloResult& mc);

struct BiasOptions {
  int n_trials = 200;
  double mean_pairs = 350;
  std::uint64_t seed = 0;
  unsigned workers = 0;
  MlOptions ml;
  /// Subtract a first-order proxy of each statistic evaluated on an unbiased
  /// weighted least-squares estimate. Requires rho_true with minimum
  /// eigenvalue >= 1e-3; otherwise the plain mean is used.
  bool control_variate = true;
};

struct BiasEntry {
  std::string name;
  double true_value = 0;
  double mean_estimate = 0;
  double bias = 0;            // mean of (estimate - proxy) minus true_value
  double standard_error = 0;  // of `bias`
  double raw_bias = 0;        // mean_estimate - true_value
  double raw_standard_error = 0;
  double spread = 0;  // standard deviation of the estimates across trials
};

struct BiasReport {
  std::vector<BiasEntry> entries;  // witness, beta_AB, beta_BC, beta_AC
  int n_trials = 0;
  double mean_pairs = 0;
  std::uint64_t seed = 0;
  bool control_variate = false;

  const BiasEntry& at(std::string_view name) const;
};

/// Simulates n_trials independent datasets from rho_true and compares the
/// reconstructed witness value and marginal betas with their true values.
/// With the control variate each statistic f contributes f(rho_hat) - g per
/// trial, where g = grad f(rho_true) . (theta_wls - theta_true) in Pauli
/// coordinates. theta_wls fits frequencies 27 N_j / sum N with weights
/// 1 / p_j(rho_true); it is linear in those frequencies, whose expectation is
/// exact, so E[g] = 0 and the bias estimate stays unbiased.
BiasReport bias_study(const DensityMatrix& rho_true, const Hermitian& witness, const BiasOptions& options);

// ---------------------------------------------------------------------------
// JSON

/// {"settings": ["Z+|Z+|Z+", ...], "counts": [...]}
nlohmann::json to_json(const TomographyDataset& data);
TomographyDataset dataset_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ReconstructionResult& rec);
nlohmann::json to_json(const MonteCarloResult& mc, bool include_samples = false);
nlohmann::json to_json(const BiasReport& report);

}  // namespace gmecert
