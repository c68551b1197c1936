#pragma once

// Small dense semidefinite programs over Hermitian matrix variables.
//
// A problem is stated in terms of real decision variables x. Hermitian
// variable blocks and any affine images of them (sums, partial transposes)
// are AffineHermitian expressions in x. The solver handles
//
//   minimize   c^T x + c0
//   subject to E x = f
//              F_k(x) >= 0   (PSD, one per cone)
//
// Equalities are eliminated through an orthonormal null-space basis; the
// remaining LMI is solved by a primal-dual interior-point method (HKM
// search direction, Mehrotra predictor-corrector) applied to the real
// symmetric embeddings of the cones.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gmecert/linalg.hpp"

namespace gmecert::sdp {

/// Real-linear functional sum_i a_i x_i + constant.
struct LinearFunctional {
  std::vector<std::pair<Index, double>> terms;
  double constant = 0.0;

  double evaluate(const Eigen::VectorXd& x) const;
  LinearFunctional& operator*=(double s);
};

/// Hermitian-valued affine function F(x) = F0 + sum_i x_i F_i.
class AffineHermitian {
 public:
  AffineHermitian() = default;
  explicit AffineHermitian(Index dim);
  AffineHermitian(const ComplexMatrix& constant);

  Index dim() const { return constant_.rows(); }
  const ComplexMatrix& constant() const { return constant_; }
  const std::map<Index, ComplexMatrix>& terms() const { return terms_; }

  AffineHermitian& add_term(Index var, const ComplexMatrix& coefficient);

  /// Applies a real-linear map to the constant and every coefficient.
  template <typename Map>
  AffineHermitian mapped(Map&& f) const {
    AffineHermitian out(ComplexMatrix(f(constant_)));
    for (const auto& [var, coeff] : terms_) out.add_term(var, f(coeff));
    return out;
  }

  ComplexMatrix evaluate(const Eigen::VectorXd& x) const;

  friend AffineHermitian operator+(AffineHermitian a, const AffineHermitian& b);
  friend AffineHermitian operator-(AffineHermitian a, const AffineHermitian& b);
  friend AffineHermitian operator*(double s, AffineHermitian a);

 private:
  ComplexMatrix constant_;
  std::map<Index, ComplexMatrix> terms_;
};

/// Re Tr(weight * expr) as a functional of x.
LinearFunctional trace_inner(const ComplexMatrix& weight, const AffineHermitian& expr);

/// Real 2n x 2n embedding [[Re, -Im], [Im, Re]]. PSD-ness is preserved and
/// every eigenvalue appears twice.
Eigen::MatrixXd embed_complex(const ComplexMatrix& h);

class SdpProblem {
 public:
  /// Declares a Hermitian variable with dim^2 real parameters: diagonal
  /// entries, then (Re, Im) of each strictly-upper entry in row order.
  AffineHermitian add_hermitian_block(const std::string& name, Index dim);

  /// Declares a Hermitian variable restricted to span_R{basis}.
  AffineHermitian add_parametrized_block(const std::string& name, const std::vector<ComplexMatrix>& basis);

  void add_equality(const LinearFunctional& lhs, double rhs);

  /// expr == 0 entrywise (dim^2 real equations).
  void add_equality(const AffineHermitian& expr);

  void add_psd(const std::string& name, AffineHermitian expr);

  void set_objective(LinearFunctional objective) { objective_ = std::move(objective); }

  Index num_variables() const { return n_vars_; }
  const LinearFunctional& objective() const { return objective_; }
  const std::vector<std::pair<LinearFunctional, double>>& equalities() const { return equalities_; }
  const std::vector<std::pair<std::string, AffineHermitian>>& cones() const { return cones_; }
  const std::vector<std::pair<std::string, AffineHermitian>>& blocks() const { return blocks_; }

  /// Debug dump: variable blocks, cones, equalities and objective. Not a
  /// stable interchange format.
  nlohmann::json to_debug_json() const;

 private:
  Index n_vars_ = 0;
  LinearFunctional objective_;
  std::vector<std::pair<LinearFunctional, double>> equalities_;
  std::vector<std::pair<std::string, AffineHermitian>> cones_;
  std::vector<std::pair<std::string, AffineHermitian>> blocks_;
};

struct SdpOptions {
  double tolerance = 1e-8;
  int max_iterations = 5000;
  /// Stop once the worst KKT residual has not halved for this many iterations.
  int stall_iterations = 50;
};

enum class SdpStatus { optimal, max_iterations, infeasible_suspected };

std::string to_string(SdpStatus status);

/// Relative KKT residuals of the final iterate. `primal` measures how well the
/// cone slacks match F_k(x), `dual` the multiplier equations, `gap` the signed
/// relative duality gap (primal objective minus dual bound).
struct KktResiduals {
  double primal = 0;
  double dual = 0;
  double gap = 0;
};

struct SdpSolution {
  SdpStatus status = SdpStatus::max_iterations;
  Eigen::VectorXd x;
  double objective = 0;
  double dual_bound = 0;  // lower bound on the optimum from the dual iterate
  KktResiduals residuals;
  int iterations = 0;
  bool regularized = false;  // Schur complement needed diagonal damping
  std::map<std::string, Hermitian> block_values;
  std::map<std::string, Hermitian> cone_values;
};

/// Throws ArgumentError on malformed problems (dimension mismatch, unknown
/// variables, non-Hermitian coefficients).
SdpSolution solve(const SdpProblem& problem, const SdpOptions& options = {});

}  // namespace gmecert::sdp
