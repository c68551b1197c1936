#include "gmecert/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>

#include "gmecert/matrix_json.hpp"
#include "gmecert/parallel.hpp"
#include "gmecert/separability.hpp"
#include "gmecert/tomography.hpp"
#include "gmecert/witness.hpp"

namespace gmecert {

namespace {

using nlohmann::json;

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string mode_name(WitnessMode m) { return m == WitnessMode::fixed ? "fixed" : "reopt"; }

WitnessMode parse_mode(const std::string& s) {
  if (s == "fixed") return WitnessMode::fixed;
  if (s == "reopt") return WitnessMode::reoptimized;
  throw ArgumentError("--witness-mode must be fixed or reopt");
}

WitnessCertificate solve_witness(const DensityMatrix& rho, bool two_body_only, double tolerance) {
  sdp::SdpOptions opts;
  opts.tolerance = tolerance;
  auto cert = find_witness(rho, two_body_only, opts);
  if (cert.status != sdp::SdpStatus::optimal) {
    std::ostringstream msg;
    msg << "witness SDP failed: status " << sdp::to_string(cert.status) << ", iterations " << cert.iterations
        << ", residuals primal " << cert.kkt.primal << " dual " << cert.kkt.dual << " gap " << cert.kkt.gap;
    throw NumericalError(msg.str());
  }
  return cert;
}

const Hermitian& reference_witness(bool two_body_only, double tolerance) {
  static std::mutex m;
  static std::optional<Hermitian> cached[2];
  std::lock_guard lock(m);
  auto& slot = cached[two_body_only ? 1 : 0];
  if (!slot) slot = solve_witness(rho_target(), two_body_only, tolerance).witness;
  return *slot;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ArgumentError("'" + path + "' is not valid JSON: " + e.what());
  }
}

DensityMatrix density_from_json(const json& j) {
  const auto dm = matrix_from_json(j.contains("rho_hat") ? j.at("rho_hat") : j);
  return DensityMatrix(Hermitian(dm.matrix, 1e-10));
}

/// Registry key, or a path to a matrix / reconstruction JSON file.
DensityMatrix load_state(const std::string& ref) {
  if (std::filesystem::is_regular_file(ref)) return density_from_json(read_json_file(ref));
  return resolve_named_state(ref);
}

TomographyDataset load_dataset(const std::string& path) {
  const json j = read_json_file(path);
  return dataset_from_json(j.contains("dataset") ? j.at("dataset") : j);
}

double std_or_zero(const MonteCarloResult& mc, const std::string& name) { return mc.at(name).std; }

SweepRecord sweep_point(const SweepOptions& o, double p, std::size_t index) {
  SweepRecord rec;
  rec.p = p;
  rec.mode = o.mode;
  const DensityMatrix rho_p = rho_noisy(MixingParameter(p));

  if (!o.simulate) {
    for (std::size_t k = 0; k < 3; ++k) rec.beta[k] = beta_of_pair(rho_p, kAllPairs[k]);
    const Hermitian w = o.mode == WitnessMode::fixed ? reference_witness(o.two_body_only, o.sdp_tolerance)
                                                     : solve_witness(rho_p, o.two_body_only, o.sdp_tolerance).witness;
    rec.witness_value = witness_value(w, rho_p);
    return rec;
  }

  std::mt19937_64 rng = task_rng(o.seed, index);
  const auto data = simulate_counts(rho_p, o.mean_pairs, rng());
  const auto reconstruction = ml_reconstruct(data);
  const DensityMatrix& rho_hat = reconstruction.rho_hat;
  const Hermitian w = o.mode == WitnessMode::fixed ? reference_witness(o.two_body_only, o.sdp_tolerance)
                                                   : solve_witness(rho_hat, o.two_body_only, o.sdp_tolerance).witness;
  for (std::size_t k = 0; k < 3; ++k) rec.beta[k] = beta_of_pair(rho_hat, kAllPairs[k]);
  rec.witness_value = witness_value(w, rho_hat);

  MonteCarloOptions mo;
  mo.n_samples = o.samples;
  mo.seed = rng();
  mo.workers = 1;
  const auto mc = monte_carlo(data, marginal_statistics(w), mo);
  rec.has_std = true;
  for (std::size_t k = 0; k < 3; ++k) rec.beta_std[k] = std_or_zero(mc, "beta_" + pair_name(kAllPairs[k]));
  rec.witness_std = std_or_zero(mc, "witness");
  return rec;
}

// ---------------------------------------------------------------------------

struct Globals {
  std::uint64_t seed = 0;
  std::string out_path;
  std::string format;
  double tolerance = 1e-8;
  double pairs = 350;
  int samples = 1000;
  std::string witness_mode = "reopt";
  bool full_witness = false;
  unsigned threads = 0;

  CLI::Option* seed_opt = nullptr;
  CLI::Option* samples_opt = nullptr;
  std::string invocation;

  bool has_seed() const { return seed_opt->count() > 0; }
  void require_seed(const std::string& command) const {
    if (!has_seed()) throw ArgumentError(command + " requires --seed");
  }
  bool two_body_only() const { return !full_witness; }
  WitnessMode mode() const { return parse_mode(witness_mode); }
  std::string format_or(const std::string& fallback) const { return format.empty() ? fallback : format; }
};

void emit(const Globals& g, std::ostream& out, const std::string& text) {
  if (g.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(g.out_path);
  if (!f) throw ArgumentError("cannot write '" + g.out_path + "'");
  f << text;
}

void emit_json(const Globals& g, std::ostream& out, json j) {
  j["invocation"] = g.invocation;
  if (g.has_seed()) j["seed"] = g.seed;
  emit(g, out, j.dump(2) + "\n");
}

void require_json(const Globals& g, const std::string& command) {
  if (g.format_or("json") != "json") throw ArgumentError(command + " only writes JSON");
}

json certificate_summary(const WitnessCertificate& cert) {
  return {{"objective", cert.objective},
          {"valid", cert.valid},
          {"status", sdp::to_string(cert.status)},
          {"iterations", cert.iterations},
          {"two_body_only", cert.two_body_only},
          {"dual_bound", cert.dual_bound},
          {"kkt", {{"primal", cert.kkt.primal}, {"dual", cert.kkt.dual}, {"gap", cert.kkt.gap}}}};
}

// ---------------------------------------------------------------------------

void cmd_analyze(const Globals& g, const std::string& state_ref, const std::string& reconstruction_path,
                 std::ostream& out) {
  if (state_ref.empty() == reconstruction_path.empty())
    throw ArgumentError("analyze takes either a state or --from-reconstruction");
  std::optional<json> reconstruction;
  std::optional<DensityMatrix> loaded;
  if (!reconstruction_path.empty()) {
    reconstruction = read_json_file(reconstruction_path);
    loaded = density_from_json(*reconstruction);
  } else {
    loaded = load_state(state_ref);
  }
  const DensityMatrix& rho = *loaded;
  if (rho.n_qubits() != 3) throw ArgumentError("analyze expects a three-qubit state");

  const auto marginals = analyze_marginals(rho);
  const auto cert = solve_witness(rho, g.two_body_only(), g.tolerance);
  const Hermitian& w = g.mode() == WitnessMode::fixed ? reference_witness(g.two_body_only(), g.tolerance) : cert.witness;
  const double value = witness_value(w, rho);

  bool pass = value < 0;
  json betas, reports = json::array();
  for (const auto& r : marginals) {
    betas[pair_name(r.pair)] = r.beta;
    reports.push_back(to_json(r));
    pass = pass && r.beta > 0;
  }

  json j{{"state", reconstruction_path.empty() ? state_ref : reconstruction_path},
         {"beta", betas},
         {"marginals", reports},
         {"witness", certificate_summary(cert)},
         {"witness_mode", g.witness_mode},
         {"witness_value", value},
         {"verdict", pass ? "PASS" : "FAIL"},
         {"significance", nullptr}};

  // Error bars for reconstructed states: resample the embedded dataset.
  if (reconstruction && reconstruction->contains("dataset") && g.has_seed()) {
    MonteCarloOptions mo;
    mo.n_samples = g.samples;
    mo.seed = g.seed;
    mo.workers = g.threads;
    const auto mc = monte_carlo(dataset_from_json(reconstruction->at("dataset")), marginal_statistics(w), mo);
    double sigma_units = -value / mc.at("witness").std;
    json stds{{"witness", mc.at("witness").std}};
    for (const auto& r : marginals) {
      const double s = mc.at("beta_" + pair_name(r.pair)).std;
      stds["beta_" + pair_name(r.pair)] = s;
      sigma_units = std::min(sigma_units, r.beta / s);
    }
    j["monte_carlo_std"] = stds;
    j["joint_satisfaction_fraction"] = joint_satisfaction_fraction(mc);
    j["significance"] = sigma_units;
  }

  const std::string fmt = g.format_or("json");
  if (fmt == "csv") {
    std::ostringstream s;
    s << "# " << g.invocation << "\nquantity,value\n";
    for (const auto& r : marginals) s << "beta_" << pair_name(r.pair) << ',' << format_number(r.beta) << '\n';
    s << "witness_value," << format_number(value) << "\nverdict," << (pass ? "PASS" : "FAIL") << '\n';
    emit(g, out, s.str());
  } else if (fmt == "json") {
    emit_json(g, out, j);
  } else {
    throw ArgumentError("--format must be json or csv");
  }
  if (!g.out_path.empty()) out << "verdict: " << (pass ? "PASS" : "FAIL") << '\n';
}

void cmd_witness(const Globals& g, const std::string& state_ref, bool with_noise, std::ostream& out) {
  require_json(g, "witness");
  const DensityMatrix rho = load_state(state_ref);
  const auto cert = solve_witness(rho, g.two_body_only(), g.tolerance);
  json j = to_json(cert);
  j["state"] = state_ref;
  j["validation"] = to_json(validate_certificate(cert));
  if (with_noise) {
    NoiseToleranceOptions no;
    no.two_body_only = g.two_body_only();
    no.sdp.tolerance = g.tolerance;
    const auto nt = noise_tolerance(rho, no);
    j["noise_tolerance"] = {{"tolerance", nt.tolerance},
                            {"p_star", nt.p_star},
                            {"closed_form", nt.closed_form},
                            {"sdp_solves", nt.sdp_solves}};
  }
  emit_json(g, out, j);
}

void cmd_sweep(const Globals& g, SweepOptions o, std::ostream& out) {
  o.mode = g.mode();
  o.two_body_only = g.two_body_only();
  o.sdp_tolerance = g.tolerance;
  o.mean_pairs = g.pairs;
  o.workers = g.threads;
  if (o.simulate) {
    g.require_seed("sweep --simulate");
    o.seed = g.seed;
    if (g.samples_opt->count() > 0) o.samples = g.samples;
  }
  const auto records = run_sweep(o);

  const std::string fmt = g.format_or("csv");
  if (fmt == "csv") {
    std::ostringstream s;
    s << "# " << g.invocation << '\n';
    s << "# seed: " << (o.simulate ? std::to_string(o.seed) : std::string("none")) << '\n';
    s << sweep_csv(records);
    emit(g, out, s.str());
  } else if (fmt == "json") {
    json rows = json::array();
    for (const auto& r : records) {
      json row{{"p", r.p}, {"witness_value", r.witness_value}, {"witness_mode", mode_name(r.mode)}};
      for (std::size_t k = 0; k < 3; ++k) row["beta_" + pair_name(kAllPairs[k])] = r.beta[k];
      if (r.has_std) {
        for (std::size_t k = 0; k < 3; ++k) row["beta_" + pair_name(kAllPairs[k]) + "_std"] = r.beta_std[k];
        row["witness_value_std"] = r.witness_std;
      }
      rows.push_back(row);
    }
    emit_json(g, out, {{"records", rows}});
  } else {
    throw ArgumentError("--format must be json or csv");
  }
}

void cmd_simulate(const Globals& g, const std::string& state_ref, std::ostream& out) {
  require_json(g, "simulate");
  g.require_seed("simulate");
  const DensityMatrix rho = load_state(state_ref);
  json j = to_json(simulate_counts(rho, g.pairs, g.seed));
  j["state"] = state_ref;
  j["mean_pairs"] = g.pairs;
  emit_json(g, out, j);
}

void cmd_reconstruct(const Globals& g, const std::string& dataset_path, const std::string& target_ref,
                     bool optimize_unitaries, std::ostream& out) {
  require_json(g, "reconstruct");
  const auto data = load_dataset(dataset_path);
  const auto rec = ml_reconstruct(data);
  json j = to_json(rec);
  j["dataset"] = to_json(data);
  j["purity"] = purity(rec.rho_hat);
  if (!target_ref.empty()) {
    const DensityMatrix target = load_state(target_ref);
    j["target"] = target_ref;
    j["fidelity"] = fidelity(rec.rho_hat, target);
    if (optimize_unitaries) {
      LocalUnitaryOptions lo;
      lo.seed = g.seed;
      const auto lu = optimize_local_unitaries(rec.rho_hat, target, lo);
      json us = json::array();
      for (const auto& u : lu.unitaries) us.push_back(matrix_to_json(u));
      j["local_unitaries"] = {{"fidelity", lu.fidelity}, {"angles", lu.angles}, {"unitaries", us}};
    }
  } else if (optimize_unitaries) {
    throw ArgumentError("--optimize-unitaries needs --target");
  }
  emit_json(g, out, j);
}

void cmd_mc(const Globals& g, const std::string& dataset_path, std::ostream& out) {
  require_json(g, "mc");
  g.require_seed("mc");
  const auto data = load_dataset(dataset_path);
  const Hermitian w = g.mode() == WitnessMode::fixed
                          ? reference_witness(g.two_body_only(), g.tolerance)
                          : solve_witness(ml_reconstruct(data).rho_hat, g.two_body_only(), g.tolerance).witness;
  MonteCarloOptions mo;
  mo.n_samples = g.samples;
  mo.seed = g.seed;
  mo.workers = g.threads;
  const auto mc = monte_carlo(data, marginal_statistics(w), mo);
  json j = to_json(mc);
  j["witness_mode"] = g.witness_mode;
  j["joint_satisfaction_fraction"] = joint_satisfaction_fraction(mc);
  emit_json(g, out, j);
}

void cmd_bias(const Globals& g, const std::string& state_ref, int trials, bool plain_mean, std::ostream& out) {
  require_json(g, "bias");
  g.require_seed("bias");
  const DensityMatrix rho = load_state(state_ref);
  const Hermitian w = g.mode() == WitnessMode::fixed ? reference_witness(g.two_body_only(), g.tolerance)
                                                     : solve_witness(rho, g.two_body_only(), g.tolerance).witness;
  BiasOptions bo;
  bo.n_trials = trials;
  bo.control_variate = !plain_mean;
  bo.mean_pairs = g.pairs;
  bo.seed = g.seed;
  bo.workers = g.threads;
  const auto report = bias_study(rho, w, bo);
  json j = to_json(report);
  j["state"] = state_ref;
  j["witness_mode"] = g.witness_mode;

  // Compare with the resampling spread of one dataset at the same count rate.
  if (g.samples_opt->count() > 0) {
    std::mt19937_64 rng = task_rng(g.seed, static_cast<std::uint64_t>(trials));
    const auto data = simulate_counts(rho, g.pairs, rng());
    MonteCarloOptions mo;
    mo.n_samples = g.samples;
    mo.seed = rng();
    mo.workers = g.threads;
    const auto mc = monte_carlo(data, marginal_statistics(w), mo);
    for (auto& e : j["entries"]) {
      const double s = mc.at(e["name"].get<std::string>()).std;
      e["monte_carlo_std"] = s;
      e["bias_over_std"] = std::abs(e["bias"].get<double>()) / s;
    }
  }
  emit_json(g, out, j);
}

void cmd_export(const Globals& g, const std::string& state_ref, std::ostream& out) {
  require_json(g, "export-state");
  const DensityMatrix rho = load_state(state_ref);
  emit(g, out, matrix_to_json(rho.matrix()).dump(2) + "\n");
}

}  // namespace

// ---------------------------------------------------------------------------

std::vector<SweepRecord> run_sweep(const SweepOptions& o) {
  if (!(0.0 <= o.p_min && o.p_min < o.p_max && o.p_max <= 1.0)) throw ArgumentError("sweep needs 0 <= p_min < p_max <= 1");
  if (o.steps < 2) throw ArgumentError("sweep needs at least two steps");
  if (o.simulate && o.samples < 2) throw ArgumentError("sweep --simulate needs at least two samples");
  if (o.mode == WitnessMode::fixed) reference_witness(o.two_body_only, o.sdp_tolerance);

  const auto n = static_cast<std::size_t>(o.steps);
  std::vector<SweepRecord> records(n);
  parallel_for(n, o.workers, [&](std::size_t i) {
    const double p = i + 1 == n ? o.p_max : o.p_min + (o.p_max - o.p_min) * static_cast<double>(i) / static_cast<double>(n - 1);
    records[i] = sweep_point(o, p, i);
  });
  return records;
}

std::string sweep_csv(const std::vector<SweepRecord>& records) {
  std::ostringstream s;
  const bool with_std = !records.empty() && records.front().has_std;
  s << "p,beta_AB,beta_BC,beta_AC,witness_value";
  if (with_std) s << ",beta_AB_std,beta_BC_std,beta_AC_std,witness_value_std";
  s << ",witness_mode\n";
  for (const auto& r : records) {
    s << format_number(r.p);
    for (double b : r.beta) s << ',' << format_number(b);
    s << ',' << format_number(r.witness_value);
    if (with_std) {
      for (double b : r.beta_std) s << ',' << format_number(b);
      s << ',' << format_number(r.witness_std);
    }
    s << ',' << mode_name(r.mode) << '\n';
  }
  return s.str();
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certifies genuine three-qubit entanglement from separable two-qubit marginals.", "gmecert"};
  app.require_subcommand(1);

  Globals g;
  g.seed_opt = app.add_option("--seed", g.seed, "Master seed for every random draw");
  app.add_option("--out", g.out_path, "Write the report here instead of stdout");
  app.add_option("--format", g.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--tolerance", g.tolerance, "SDP stopping tolerance")->capture_default_str();
  app.add_option("--pairs", g.pairs, "Mean detected pairs per setting")->capture_default_str();
  g.samples_opt = app.add_option("--samples", g.samples, "Monte Carlo samples")->capture_default_str();
  app.add_option("--witness-mode", g.witness_mode, "fixed (witness of the target state) or reopt")
      ->check(CLI::IsMember({"fixed", "reopt"}))
      ->capture_default_str();
  app.add_flag("--full-witness", g.full_witness, "Allow three-body terms in the witness");
  app.add_option("--threads", g.threads, "Worker threads, 0 for all cores")->capture_default_str();

  std::string state_ref, reconstruction_path, dataset_path, target_ref;
  bool with_noise = false, optimize_unitaries = false;
  int trials = 200;
  bool plain_mean = false;
  SweepOptions sweep;

  auto* analyze = app.add_subcommand("analyze", "Marginal PPT test, witness search and verdict");
  analyze->add_option("state", state_ref, "Named state or matrix JSON file");
  analyze->add_option("--from-reconstruction", reconstruction_path, "Output of `reconstruct`");
  analyze->fallthrough();

  auto* witness = app.add_subcommand("witness", "Witness certificate for a state");
  witness->add_option("state", state_ref)->required();
  witness->add_flag("--noise-tolerance", with_noise, "Also bisect the white-noise tolerance");
  witness->fallthrough();

  auto* sweep_cmd = app.add_subcommand("sweep", "Betas and witness value along rho_p");
  sweep_cmd->add_option("--p-min", sweep.p_min)->capture_default_str();
  sweep_cmd->add_option("--p-max", sweep.p_max)->capture_default_str();
  sweep_cmd->add_option("--steps", sweep.steps)->capture_default_str();
  sweep_cmd->add_flag("--simulate", sweep.simulate, "Reconstruct from simulated counts with error bars");
  sweep_cmd->fallthrough();

  auto* simulate = app.add_subcommand("simulate", "Simulated tomography counts");
  simulate->add_option("state", state_ref)->required();
  simulate->fallthrough();

  auto* reconstruct = app.add_subcommand("reconstruct", "Maximum-likelihood reconstruction");
  reconstruct->add_option("dataset", dataset_path)->required();
  reconstruct->add_option("--target", target_ref, "Report fidelity with this state");
  reconstruct->add_flag("--optimize-unitaries", optimize_unitaries, "Maximize fidelity over local unitaries");
  reconstruct->fallthrough();

  auto* mc = app.add_subcommand("mc", "Monte Carlo error bars for a dataset");
  mc->add_option("dataset", dataset_path)->required();
  mc->fallthrough();

  auto* bias = app.add_subcommand("bias", "Reconstruction bias study");
  bias->add_option("state", state_ref)->required();
  bias->add_option("--trials", trials)->capture_default_str();
  bias->add_flag("--plain-mean", plain_mean, "Report the plain mean without the least-squares control variate");
  bias->fallthrough();

  auto* export_state = app.add_subcommand("export-state", "Density matrix as JSON");
  export_state->add_option("state", state_ref)->required();
  export_state->fallthrough();

  std::ostringstream joined;
  joined << "gmecert";
  for (const auto& a : args) joined << ' ' << a;
  g.invocation = joined.str();

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*analyze) cmd_analyze(g, state_ref, reconstruction_path, out);
    else if (*witness) cmd_witness(g, state_ref, with_noise, out);
    else if (*sweep_cmd) cmd_sweep(g, sweep, out);
    else if (*simulate) cmd_simulate(g, state_ref, out);
    else if (*reconstruct) cmd_reconstruct(g, dataset_path, target_ref, optimize_unitaries, out);
    else if (*mc) cmd_mc(g, dataset_path, out);
    else if (*bias) cmd_bias(g, state_ref, trials, plain_mean, out);
    else if (*export_state) cmd_export(g, state_ref, out);
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace gmecert
