#include "gmecert/tomography.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "gmecert/matrix_json.hpp"
#include "gmecert/nelder_mead.hpp"
#include "gmecert/parallel.hpp"
#include "gmecert/separability.hpp"
#include "gmecert/witness.hpp"

namespace gmecert {

namespace {

constexpr std::array<std::string_view, kSettingsPerQubit> kLabels = {"Z+", "Z-", "X+", "X-", "Y+", "Y-"};

// Columns are the 216 product kets in canonical order.
const ComplexMatrix& protocol_kets() {
  static const ComplexMatrix kets = [] {
    ComplexMatrix v(8, kSettings);
    for (const auto& s : full_protocol()) v.col(s.index()) = s.ket();
    return v;
  }();
  return kets;
}

Eigen::VectorXd probabilities_of(const ComplexMatrix& rho) {
  const ComplexMatrix& v = protocol_kets();
  const ComplexMatrix rv = rho * v;
  return (v.conjugate().array() * rv.array()).colwise().sum().real().transpose();
}

double likelihood_of(const Eigen::VectorXd& freq, const Eigen::VectorXd& probs, double floor) {
  double acc = 0;
  for (Index j = 0; j < freq.size(); ++j)
    if (freq(j) > 0) acc += freq(j) * std::log(std::max(probs(j), floor) / 27.0);
  return acc;
}

double poisson_draw(double mean, std::mt19937_64& rng) {
  if (!(mean > 0)) return 0.0;
  std::poisson_distribution<long long> dist(mean);
  return static_cast<double>(dist(rng));
}

double sample_std(const std::vector<double>& xs, double mean) {
  if (xs.size() < 2) return 0.0;
  double acc = 0;
  for (double x : xs) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

double mean_of(const std::vector<double>& xs) {
  double acc = 0;
  for (double x : xs) acc += x;
  return xs.empty() ? 0.0 : acc / static_cast<double>(xs.size());
}

// The 63 three-qubit Pauli words other than the identity.
const std::vector<ComplexMatrix>& traceless_paulis() {
  static const std::vector<ComplexMatrix> words = [] {
    const auto& p = pauli_matrices();
    std::vector<ComplexMatrix> out;
    for (int w = 1; w < 64; ++w) out.push_back(kron(p[w >> 4], p[(w >> 2) & 3], p[w & 3]));
    return out;
  }();
  return words;
}

// First-order proxies g_s = grad f_s(rho_true) . (theta_wls - theta_true).
class LinearProxy {
 public:
  LinearProxy(const DensityMatrix& rho_true, const std::vector<NamedStatistic>& stats) {
    const auto& words = traceless_paulis();
    const auto nw = static_cast<Index>(words.size());
    const Eigen::VectorXd p_true = probabilities_of(rho_true.matrix());
    Eigen::MatrixXd design(kSettings, nw);
    theta_true_.resize(nw);
    for (Index k = 0; k < nw; ++k) {
      design.col(k) = probabilities_of(words[k]) / 8.0;
      theta_true_(k) = (rho_true.matrix() * words[k]).trace().real();
    }
    const Eigen::VectorXd w = p_true.cwiseInverse();
    const Eigen::MatrixXd normal = design.transpose() * w.asDiagonal() * design;
    solve_ = normal.ldlt().solve(design.transpose() * w.asDiagonal());

    constexpr double h = 1e-5;
    gradient_.resize(static_cast<Index>(stats.size()), nw);
    for (Index k = 0; k < nw; ++k) {
      const DensityMatrix up(ComplexMatrix(rho_true.matrix() + (h / 8.0) * words[k]));
      const DensityMatrix down(ComplexMatrix(rho_true.matrix() - (h / 8.0) * words[k]));
      for (std::size_t s = 0; s < stats.size(); ++s)
        gradient_(static_cast<Index>(s), k) = (stats[s].evaluate(up) - stats[s].evaluate(down)) / (2 * h);
    }
  }

  Eigen::VectorXd operator()(const TomographyDataset& data) const {
    const double total = data.counts().sum();
    if (!(total > 0)) return Eigen::VectorXd::Zero(gradient_.rows());
    const Eigen::VectorXd freq = (27.0 / total) * data.counts();
    const Eigen::VectorXd theta = solve_ * (freq.array() - 0.125).matrix();
    return gradient_ * (theta - theta_true_);
  }

 private:
  Eigen::MatrixXd solve_;
  Eigen::VectorXd theta_true_;
  Eigen::MatrixXd gradient_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Protocol

std::string_view basis_label(BasisState s) { return kLabels[static_cast<std::size_t>(s)]; }

ComplexVector basis_ket(BasisState s) {
  const double h = 1.0 / std::sqrt(2.0);
  const Complex i(0, 1);
  ComplexVector v(2);
  switch (s) {
    case BasisState::Zp: v << 1, 0; break;
    case BasisState::Zm: v << 0, 1; break;
    case BasisState::Xp: v << h, h; break;
    case BasisState::Xm: v << h, -h; break;
    case BasisState::Yp: v << h, h * i; break;
    case BasisState::Ym: v << h, -h * i; break;
  }
  return v;
}

std::string MeasurementSetting::label() const {
  std::string out;
  for (std::size_t q = 0; q < 3; ++q) {
    if (q) out += '|';
    out += basis_label(states[q]);
  }
  return out;
}

MeasurementSetting MeasurementSetting::from_label(std::string_view label) {
  std::vector<std::string_view> parts;
  for (std::size_t pos = 0;;) {
    const std::size_t bar = label.find('|', pos);
    parts.push_back(label.substr(pos, bar == std::string_view::npos ? std::string_view::npos : bar - pos));
    if (bar == std::string_view::npos) break;
    pos = bar + 1;
  }
  if (parts.size() != 3) throw ArgumentError("measurement label must name three qubits: '" + std::string(label) + "'");
  MeasurementSetting s{};
  for (std::size_t q = 0; q < 3; ++q) {
    const auto it = std::find(kLabels.begin(), kLabels.end(), parts[q]);
    if (it == kLabels.end()) throw ArgumentError("unknown measurement label '" + std::string(label) + "'");
    s.states[q] = static_cast<BasisState>(it - kLabels.begin());
  }
  return s;
}

ComplexVector MeasurementSetting::ket() const {
  return kron(basis_ket(states[0]), basis_ket(states[1]), basis_ket(states[2]));
}

int MeasurementSetting::index() const {
  return 36 * static_cast<int>(states[0]) + 6 * static_cast<int>(states[1]) + static_cast<int>(states[2]);
}

const std::vector<MeasurementSetting>& full_protocol() {
  static const std::vector<MeasurementSetting> settings = [] {
    std::vector<MeasurementSetting> out;
    out.reserve(kSettings);
    for (int a = 0; a < kSettingsPerQubit; ++a)
      for (int b = 0; b < kSettingsPerQubit; ++b)
        for (int c = 0; c < kSettingsPerQubit; ++c)
          out.push_back(MeasurementSetting{
              {static_cast<BasisState>(a), static_cast<BasisState>(b), static_cast<BasisState>(c)}});
    return out;
  }();
  return settings;
}

Eigen::VectorXd born_probabilities(const DensityMatrix& rho) {
  if (rho.n_qubits() != 3) throw ArgumentError("tomography protocol is defined for three qubits");
  return probabilities_of(rho.matrix());
}

// ---------------------------------------------------------------------------
// Datasets

TomographyDataset TomographyDataset::from_counts(Eigen::VectorXd counts) {
  if (counts.size() != kSettings) throw ArgumentError("dataset needs 216 counts");
  for (Index j = 0; j < counts.size(); ++j)
    if (!std::isfinite(counts(j)) || counts(j) < 0) throw ArgumentError("counts must be finite and non-negative");
  TomographyDataset d;
  d.total_ = counts.sum();
  if (!(d.total_ > 0)) throw ArgumentError("dataset total must be positive");
  d.frequencies_ = counts / d.total_;
  d.counts_ = std::move(counts);
  return d;
}

TomographyDataset TomographyDataset::from_frequencies(const Eigen::VectorXd& frequencies, double effective_total) {
  if (frequencies.size() != kSettings) throw ArgumentError("dataset needs 216 frequencies");
  if (!(effective_total > 0)) throw ArgumentError("effective total must be positive");
  const double sum = frequencies.sum();
  if (std::abs(sum - 1.0) > 1e-10) throw ArgumentError("frequencies must sum to one");
  if (frequencies.minCoeff() < 0) throw ArgumentError("frequencies must be non-negative");
  TomographyDataset d;
  d.frequencies_ = frequencies / sum;
  d.total_ = effective_total;
  d.counts_ = d.frequencies_ * effective_total;
  return d;
}

TomographyDataset simulate_counts(const DensityMatrix& rho, double mean_pairs, std::uint64_t seed) {
  if (!(mean_pairs > 0)) throw ArgumentError("mean_pairs must be positive");
  const Eigen::VectorXd probs = born_probabilities(rho);
  std::mt19937_64 rng(seed);
  Eigen::VectorXd counts(kSettings);
  for (Index j = 0; j < kSettings; ++j) counts(j) = poisson_draw(8.0 * mean_pairs * probs(j), rng);
  return TomographyDataset::from_counts(std::move(counts));
}

TomographyDataset exact_dataset(const DensityMatrix& rho, double effective_total) {
  Eigen::VectorXd probs = born_probabilities(rho).cwiseMax(0.0);
  return TomographyDataset::from_frequencies(probs / probs.sum(), effective_total);
}

TomographyDataset mix_datasets(const std::vector<std::pair<TomographyDataset, double>>& parts) {
  if (parts.empty()) throw ArgumentError("mix_datasets: nothing to mix");
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(kSettings);
  double weight_sum = 0, total = 0;
  for (const auto& [data, w] : parts) {
    if (w < 0) throw ArgumentError("mix_datasets: weights must be non-negative");
    freq += w * data.frequencies();
    total += w * data.total();
    weight_sum += w;
  }
  if (std::abs(weight_sum - 1.0) > 1e-12) throw ArgumentError("mix_datasets: weights must sum to one");
  return TomographyDataset::from_frequencies(freq, total);
}

// ---------------------------------------------------------------------------
// Maximum likelihood

double log_likelihood(const TomographyDataset& data, const DensityMatrix& rho, double floor) {
  return likelihood_of(data.frequencies(), born_probabilities(rho), floor);
}

ReconstructionResult ml_reconstruct(const TomographyDataset& data, const MlOptions& options) {
  if (!(options.relaxation > 0 && options.relaxation <= 1)) throw ArgumentError("relaxation must lie in (0, 1]");
  const ComplexMatrix& v = protocol_kets();
  const Eigen::VectorXd& f = data.frequencies();

  ComplexMatrix rho = ComplexMatrix::Identity(8, 8) / 8.0;
  Eigen::VectorXd probs = probabilities_of(rho);
  double ll = likelihood_of(f, probs, options.probability_floor);

  int iterations = 0, rejected = 0, decreases = 0;
  double step = std::numeric_limits<double>::infinity();
  bool converged = false;
  std::vector<double> trace;
  if (options.record_likelihood) trace.push_back(ll);

  while (iterations < options.max_iterations) {
    const Eigen::VectorXd ratio = f.array() / probs.array().max(options.probability_floor);
    const ComplexMatrix r = v * ratio.asDiagonal() * v.adjoint();
    ComplexMatrix full = r * rho * r;
    full = 0.5 * (full + full.adjoint()).eval();
    full /= full.trace().real();

    double relax = options.relaxation;
    ComplexMatrix next;
    Eigen::VectorXd next_probs;
    double next_ll = 0;
    for (int attempt = 0;; ++attempt) {
      next = (1.0 - relax) * rho + relax * full;
      next_probs = probabilities_of(next);
      next_ll = likelihood_of(f, next_probs, options.probability_floor);
      if (next_ll >= ll - 1e-13 || attempt == 40) break;
      ++rejected;
      relax *= 0.5;
    }

    if (options.extrapolate && next_ll > ll) {
      // R^t rho R^t with t = 2, 4, ...; t = 1 is the plain step.
      const Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(r);
      const Eigen::VectorXd r_eig = es.eigenvalues().cwiseMax(0.0);
      double t = 1.0;
      for (int k = 0; k < options.max_doublings; ++k) {
        t *= 2.0;
        const ComplexMatrix rt = es.eigenvectors() * r_eig.array().pow(t).matrix().asDiagonal() * es.eigenvectors().adjoint();
        ComplexMatrix candidate = rt * rho * rt;
        candidate = 0.5 * (candidate + candidate.adjoint()).eval();
        const double tr = candidate.trace().real();
        if (!(tr > 0) || !std::isfinite(tr)) break;
        candidate /= tr;
        Eigen::VectorXd candidate_probs = probabilities_of(candidate);
        const double candidate_ll = likelihood_of(f, candidate_probs, options.probability_floor);
        if (!(candidate_ll > next_ll)) break;
        next = std::move(candidate);
        next_probs = std::move(candidate_probs);
        next_ll = candidate_ll;
      }
    }

    ++iterations;
    if (next_ll < ll - 1e-12) ++decreases;
    step = (next - rho).norm();
    rho = std::move(next);
    probs = std::move(next_probs);
    ll = next_ll;
    if (options.record_likelihood) trace.push_back(ll);
    if (step <= options.step_tolerance) {
      converged = true;
      break;
    }
  }

  return ReconstructionResult{DensityMatrix(Hermitian(rho, 1e-10)), iterations, step, ll, converged,
                              rejected, decreases, std::move(trace)};
}

// ---------------------------------------------------------------------------
// Figures of merit

namespace {

double fidelity_from_roots(const ComplexMatrix& sqrt_a, const ComplexMatrix& sqrt_b) {
  const Eigen::JacobiSVD<ComplexMatrix> svd(sqrt_a * sqrt_b);
  const double tr = svd.singularValues().sum();
  return tr * tr;
}

}  // namespace

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  if (rho.dim() != sigma.dim()) throw ArgumentError("fidelity: dimension mismatch");
  return fidelity_from_roots(sqrtm_psd(rho.hermitian()).matrix(), sqrtm_psd(sigma.hermitian()).matrix());
}

double purity(const DensityMatrix& rho) { return rho.matrix().squaredNorm(); }

ComplexMatrix euler_unitary(double a, double b, double c) {
  const Complex i(0, 1);
  ComplexMatrix rz_a(2, 2), ry(2, 2), rz_c(2, 2);
  rz_a << std::exp(-i * a / 2.0), 0, 0, std::exp(i * a / 2.0);
  ry << std::cos(b / 2), -std::sin(b / 2), std::sin(b / 2), std::cos(b / 2);
  rz_c << std::exp(-i * c / 2.0), 0, 0, std::exp(i * c / 2.0);
  return rz_a * ry * rz_c;
}

LocalUnitaryResult optimize_local_unitaries(const DensityMatrix& rho_exp, const DensityMatrix& rho_target,
                                            const LocalUnitaryOptions& options) {
  if (rho_exp.n_qubits() != 3 || rho_target.n_qubits() != 3)
    throw ArgumentError("optimize_local_unitaries expects three-qubit states");
  if (options.restarts < 1) throw ArgumentError("optimize_local_unitaries needs at least one restart");

  // ||sqrt(target) U sqrt(exp) U^H||_tr = ||sqrt(target) U sqrt(exp)||_tr.
  const ComplexMatrix root_target = sqrtm_psd(rho_target.hermitian()).matrix();
  const ComplexMatrix root_exp = sqrtm_psd(rho_exp.hermitian()).matrix();
  auto local = [](const Eigen::VectorXd& t) {
    return kron(euler_unitary(t(0), t(1), t(2)), euler_unitary(t(3), t(4), t(5)), euler_unitary(t(6), t(7), t(8)));
  };
  auto cost = [&](const Eigen::VectorXd& t) { return -fidelity_from_roots(root_target, local(t) * root_exp); };

  NelderMeadOptions nm;
  nm.function_tolerance = options.function_tolerance;
  nm.max_evaluations = options.max_evaluations;

  std::mt19937_64 rng(options.seed);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  Eigen::VectorXd best_x = Eigen::VectorXd::Zero(9);
  double best = cost(best_x);
  const double initial = -best;
  for (int r = 0; r < options.restarts; ++r) {
    Eigen::VectorXd start = Eigen::VectorXd::Zero(9);
    if (r > 0)
      for (Index k = 0; k < 9; ++k) start(k) = angle(rng);
    auto res = nelder_mead(cost, start, nm);
    // Polish from the restart's optimum with a fresh simplex.
    nm.initial_step = 0.05;
    res = nelder_mead(cost, res.x, nm);
    nm.initial_step = 0.5;
    if (res.value < best) {
      best = res.value;
      best_x = res.x;
    }
  }

  LocalUnitaryResult out;
  for (std::size_t q = 0; q < 3; ++q) {
    const auto k = static_cast<Index>(3 * q);
    out.unitaries[q] = euler_unitary(best_x(k), best_x(k + 1), best_x(k + 2));
  }
  for (std::size_t k = 0; k < 9; ++k) out.angles[k] = best_x(static_cast<Index>(k));
  out.fidelity = -best;
  out.initial_fidelity = initial;
  return out;
}

// ---------------------------------------------------------------------------
// Resampling studies

std::vector<NamedStatistic> marginal_statistics(const Hermitian& witness) {
  std::vector<NamedStatistic> stats;
  for (QubitPair pair : kAllPairs)
    stats.push_back({"beta_" + pair_name(pair), [pair](const DensityMatrix& r) { return beta_of_pair(r, pair); }});
  stats.push_back({"witness", [witness](const DensityMatrix& r) { return witness_value(witness, r); }});
  return stats;
}

const StatisticSummary& MonteCarloResult::at(std::string_view name) const {
  for (const auto& s : statistics)
    if (s.name == name) return s;
  throw ArgumentError("no statistic named '" + std::string(name) + "'");
}

MonteCarloResult monte_carlo(const TomographyDataset& data, const std::vector<NamedStatistic>& statistics,
                             const MonteCarloOptions& options) {
  if (options.n_samples < 2) throw ArgumentError("monte_carlo needs at least two samples");
  const auto n = static_cast<std::size_t>(options.n_samples);
  std::vector<std::vector<double>> values(statistics.size(), std::vector<double>(n));
  std::vector<char> converged(n);

  parallel_for(n, options.workers, [&](std::size_t k) {
    std::mt19937_64 rng = task_rng(options.seed, k);
    Eigen::VectorXd counts(kSettings);
    for (Index j = 0; j < kSettings; ++j) counts(j) = poisson_draw(data.counts()(j), rng);
    const auto rec = ml_reconstruct(TomographyDataset::from_counts(std::move(counts)), options.ml);
    converged[k] = rec.converged;
    for (std::size_t s = 0; s < statistics.size(); ++s) values[s][k] = statistics[s].evaluate(rec.rho_hat);
  });

  MonteCarloResult out;
  out.seed = options.seed;
  out.n_samples = options.n_samples;
  for (char c : converged) out.non_converged += c ? 0 : 1;
  for (std::size_t s = 0; s < statistics.size(); ++s) {
    StatisticSummary summary;
    summary.name = statistics[s].name;
    summary.mean = mean_of(values[s]);
    summary.std = sample_std(values[s], summary.mean);
    summary.samples = std::move(values[s]);
    out.statistics.push_back(std::move(summary));
  }
  return out;
}

double joint_satisfaction_fraction(const MonteCarloResult& mc) {
  const auto& ab = mc.at("beta_AB").samples;
  const auto& bc = mc.at("beta_BC").samples;
  const auto& ac = mc.at("beta_AC").samples;
  const auto& w = mc.at("witness").samples;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < w.size(); ++k)
    if (ab[k] > 0 && bc[k] > 0 && ac[k] > 0 && w[k] < 0) ++hits;
  return w.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(w.size());
}

const BiasEntry& BiasReport::at(std::string_view name) const {
  for (const auto& e : entries)
    if (e.name == name) return e;
  throw ArgumentError("no bias entry named '" + std::string(name) + "'");
}

BiasReport bias_study(const DensityMatrix& rho_true, const Hermitian& witness, const BiasOptions& options) {
  if (options.n_trials < 30) throw ArgumentError("bias_study needs at least 30 trials");
  const auto n = static_cast<std::size_t>(options.n_trials);
  auto stats = marginal_statistics(witness);
  // Report the witness first.
  std::rotate(stats.begin(), stats.end() - 1, stats.end());

  const bool use_proxy =
      options.control_variate && Eigen::SelfAdjointEigenSolver<ComplexMatrix>(rho_true.matrix(), Eigen::EigenvaluesOnly)
                                         .eigenvalues()(0) >= 1e-3;
  const std::optional<LinearProxy> proxy = use_proxy ? std::optional<LinearProxy>(std::in_place, rho_true, stats)
                                                     : std::nullopt;

  std::vector<std::vector<double>> values(stats.size(), std::vector<double>(n));
  std::vector<std::vector<double>> adjusted(stats.size(), std::vector<double>(n));
  parallel_for(n, options.workers, [&](std::size_t k) {
    std::mt19937_64 rng = task_rng(options.seed, k);
    const auto data = simulate_counts(rho_true, options.mean_pairs, rng());
    const auto rec = ml_reconstruct(data, options.ml);
    const Eigen::VectorXd g = proxy ? (*proxy)(data) : Eigen::VectorXd::Zero(static_cast<Index>(stats.size()));
    for (std::size_t s = 0; s < stats.size(); ++s) {
      values[s][k] = stats[s].evaluate(rec.rho_hat);
      adjusted[s][k] = values[s][k] - g(static_cast<Index>(s));
    }
  });

  BiasReport report;
  report.n_trials = options.n_trials;
  report.mean_pairs = options.mean_pairs;
  report.seed = options.seed;
  report.control_variate = use_proxy;
  const double root_n = std::sqrt(static_cast<double>(n));
  for (std::size_t s = 0; s < stats.size(); ++s) {
    BiasEntry e;
    e.name = stats[s].name;
    e.true_value = stats[s].evaluate(rho_true);
    e.mean_estimate = mean_of(values[s]);
    e.raw_bias = e.mean_estimate - e.true_value;
    e.spread = sample_std(values[s], e.mean_estimate);
    e.raw_standard_error = e.spread / root_n;
    const double adjusted_mean = mean_of(adjusted[s]);
    e.bias = adjusted_mean - e.true_value;
    e.standard_error = sample_std(adjusted[s], adjusted_mean) / root_n;
    report.entries.push_back(e);
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const TomographyDataset& data) {
  nlohmann::json settings = nlohmann::json::array();
  for (const auto& s : full_protocol()) settings.push_back(s.label());
  nlohmann::json counts = nlohmann::json::array();
  for (Index j = 0; j < kSettings; ++j) {
    const double c = data.counts()(j);
    if (c == std::floor(c) && c < 9e15)
      counts.push_back(static_cast<long long>(c));
    else
      counts.push_back(c);
  }
  return {{"settings", settings}, {"counts", counts}};
}

TomographyDataset dataset_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("settings") || !j.contains("counts"))
    throw ArgumentError("dataset JSON needs \"settings\" and \"counts\"");
  const auto& settings = j.at("settings");
  const auto& counts = j.at("counts");
  if (!settings.is_array() || !counts.is_array() || settings.size() != kSettings || counts.size() != kSettings)
    throw ArgumentError("dataset JSON must list 216 settings and 216 counts");

  Eigen::VectorXd ordered = Eigen::VectorXd::Constant(kSettings, -1.0);
  for (std::size_t k = 0; k < settings.size(); ++k) {
    const auto s = MeasurementSetting::from_label(settings[k].get<std::string>());
    if (ordered(s.index()) >= 0) throw ArgumentError("dataset JSON repeats setting " + s.label());
    if (!counts[k].is_number()) throw ArgumentError("dataset counts must be numbers");
    ordered(s.index()) = counts[k].get<double>();
  }
  return TomographyDataset::from_counts(std::move(ordered));
}

nlohmann::json to_json(const ReconstructionResult& rec) {
  return {{"rho_hat", matrix_to_json(rec.rho_hat.matrix())},
          {"iterations", rec.iterations},
          {"converged", rec.converged},
          {"final_step_norm", rec.final_step_norm},
          {"log_likelihood", rec.log_likelihood},
          {"rejected_steps", rec.rejected_steps},
          {"likelihood_decreases", rec.likelihood_decreases}};
}

nlohmann::json to_json(const MonteCarloResult& mc, bool include_samples) {
  nlohmann::json stats = nlohmann::json::array();
  for (const auto& s : mc.statistics) {
    nlohmann::json e{{"name", s.name}, {"mean", s.mean}, {"std", s.std}};
    if (include_samples) e["samples"] = s.samples;
    stats.push_back(std::move(e));
  }
  return {{"seed", mc.seed}, {"n_samples", mc.n_samples}, {"non_converged", mc.non_converged}, {"statistics", stats}};
}

nlohmann::json to_json(const BiasReport& report) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : report.entries)
    entries.push_back({{"name", e.name},
                       {"true_value", e.true_value},
                       {"mean_estimate", e.mean_estimate},
                       {"bias", e.bias},
                       {"standard_error", e.standard_error},
                       {"raw_bias", e.raw_bias},
                       {"raw_standard_error", e.raw_standard_error},
                       {"spread", e.spread}});
  return {{"seed", report.seed},
          {"n_trials", report.n_trials},
          {"mean_pairs", report.mean_pairs},
          {"control_variate", report.control_variate},
          {"entries", entries}};
}

}  // namespace gmecert
