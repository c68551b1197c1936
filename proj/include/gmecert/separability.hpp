#pragma once

#include <array>
#include <string>

#include <json.hpp>

#include "gmecert/states.hpp"

namespace gmecert {

/// Two-qubit marginals in report order.
enum class QubitPair { AB, BC, AC };

inline constexpr std::array<QubitPair, 3> kAllPairs = {QubitPair::AB, QubitPair::BC, QubitPair::AC};

std::string pair_name(QubitPair pair);
QubitPair pair_from_name(const std::string& name);

/// First-listed qubit of the pair; its index is partially transposed.
Qubit transposed_qubit(QubitPair pair);

struct MarginalReport {
  QubitPair pair;
  double beta;  // min eigenvalue of the marginal's partial transpose
  bool separable;
  Qubit transposed_subsystem;
};

/// Default verdict tolerance for exact inputs.
inline constexpr double kPptTolerance = 1e-10;

/// Two-qubit marginal for `pair`, ordered as listed (e.g. AC keeps A first).
Hermitian pair_marginal(const DensityMatrix& rho, QubitPair pair);

double beta_of_pair(const DensityMatrix& rho, QubitPair pair);

/// PPT analysis of the AB, BC and AC marginals of a three-qubit state.
std::array<MarginalReport, 3> analyze_marginals(const DensityMatrix& rho, double tolerance = kPptTolerance);

nlohmann::json to_json(const MarginalReport& report);

}  // namespace gmecert
