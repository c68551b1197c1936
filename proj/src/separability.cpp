#include "gmecert/separability.hpp"

namespace gmecert {

std::string pair_name(QubitPair pair) {
  switch (pair) {
    case QubitPair::AB: return "AB";
    case QubitPair::BC: return "BC";
    case QubitPair::AC: return "AC";
  }
  throw ArgumentError("invalid qubit pair");
}

QubitPair pair_from_name(const std::string& name) {
  if (name == "AB") return QubitPair::AB;
  if (name == "BC") return QubitPair::BC;
  if (name == "AC") return QubitPair::AC;
  throw ArgumentError("unknown qubit pair '" + name + "'");
}

Qubit transposed_qubit(QubitPair pair) {
  return pair == QubitPair::BC ? Qubit::B : Qubit::A;
}

Hermitian pair_marginal(const DensityMatrix& rho, QubitPair pair) {
  if (rho.n_qubits() != 3) throw ArgumentError("marginal analysis needs a three-qubit state");
  switch (pair) {
    case QubitPair::AB: return partial_trace(rho.hermitian(), {Qubit::A, Qubit::B});
    case QubitPair::BC: return partial_trace(rho.hermitian(), {Qubit::B, Qubit::C});
    case QubitPair::AC: return partial_trace(rho.hermitian(), {Qubit::A, Qubit::C});
  }
  throw ArgumentError("invalid qubit pair");
}

double beta_of_pair(const DensityMatrix& rho, QubitPair pair) {
  // Within the 4x4 marginal the first-listed qubit sits at position 0.
  return min_eigenvalue(partial_transpose(pair_marginal(rho, pair), QubitSet::from_mask(0b01)));
}

std::array<MarginalReport, 3> analyze_marginals(const DensityMatrix& rho, double tolerance) {
  if (rho.n_qubits() != 3) throw ArgumentError("marginal analysis needs a three-qubit state");
  std::array<MarginalReport, 3> out{};
  for (std::size_t k = 0; k < kAllPairs.size(); ++k) {
    const QubitPair pair = kAllPairs[k];
    const double beta = beta_of_pair(rho, pair);
    out[k] = MarginalReport{pair, beta, beta >= -tolerance, transposed_qubit(pair)};
  }
  return out;
}

nlohmann::json to_json(const MarginalReport& report) {
  return {{"pair", pair_name(report.pair)},
          {"beta", report.beta},
          {"separable", report.separable},
          {"transposed_subsystem", std::string(1, qubit_name(report.transposed_subsystem))}};
}

}  // namespace gmecert
