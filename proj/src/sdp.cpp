#include "gmecert/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace gmecert::sdp {

// ---------------------------------------------------------------------------
// Expressions

double LinearFunctional::evaluate(const Eigen::VectorXd& x) const {
  double acc = constant;
  for (const auto& [i, a] : terms) acc += a * x(i);
  return acc;
}

LinearFunctional& LinearFunctional::operator*=(double s) {
  for (auto& term : terms) term.second *= s;
  constant *= s;
  return *this;
}

AffineHermitian::AffineHermitian(Index dim) : constant_(ComplexMatrix::Zero(dim, dim)) {}

AffineHermitian::AffineHermitian(const ComplexMatrix& constant) : constant_(constant) {
  if (constant.rows() != constant.cols()) throw ArgumentError("AffineHermitian: constant must be square");
}

AffineHermitian& AffineHermitian::add_term(Index var, const ComplexMatrix& coefficient) {
  if (coefficient.rows() != dim() || coefficient.cols() != dim())
    throw ArgumentError("AffineHermitian: coefficient dimension mismatch");
  if (var < 0) throw ArgumentError("AffineHermitian: negative variable index");
  auto [it, inserted] = terms_.try_emplace(var, coefficient);
  if (!inserted) it->second += coefficient;
  return *this;
}

ComplexMatrix AffineHermitian::evaluate(const Eigen::VectorXd& x) const {
  ComplexMatrix out = constant_;
  for (const auto& [var, coeff] : terms_) out += x(var) * coeff;
  return out;
}

AffineHermitian operator+(AffineHermitian a, const AffineHermitian& b) {
  if (a.dim() != b.dim()) throw ArgumentError("AffineHermitian: dimension mismatch in sum");
  a.constant_ += b.constant_;
  for (const auto& [var, coeff] : b.terms_) a.add_term(var, coeff);
  return a;
}

AffineHermitian operator-(AffineHermitian a, const AffineHermitian& b) { return a + (-1.0) * b; }

AffineHermitian operator*(double s, AffineHermitian a) {
  a.constant_ *= s;
  for (auto& [var, coeff] : a.terms_) coeff *= s;
  return a;
}

LinearFunctional trace_inner(const ComplexMatrix& weight, const AffineHermitian& expr) {
  if (weight.rows() != expr.dim() || weight.cols() != expr.dim())
    throw ArgumentError("trace_inner: dimension mismatch");
  auto tr = [&](const ComplexMatrix& m) { return (weight.array() * m.transpose().array()).sum().real(); };
  LinearFunctional f;
  f.constant = tr(expr.constant());
  for (const auto& [var, coeff] : expr.terms()) f.terms.emplace_back(var, tr(coeff));
  return f;
}

Eigen::MatrixXd embed_complex(const ComplexMatrix& h) {
  const Index n = h.rows();
  Eigen::MatrixXd out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = h.real();
  out.topRightCorner(n, n) = -h.imag();
  out.bottomLeftCorner(n, n) = h.imag();
  out.bottomRightCorner(n, n) = h.real();
  return out;
}

// ---------------------------------------------------------------------------
// Problem builder

AffineHermitian SdpProblem::add_hermitian_block(const std::string& name, Index dim) {
  AffineHermitian expr(dim);
  for (Index i = 0; i < dim; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(dim, dim);
    e(i, i) = 1.0;
    expr.add_term(n_vars_++, e);
  }
  for (Index i = 0; i < dim; ++i)
    for (Index j = i + 1; j < dim; ++j) {
      ComplexMatrix re = ComplexMatrix::Zero(dim, dim);
      re(i, j) = re(j, i) = 1.0;
      expr.add_term(n_vars_++, re);
      ComplexMatrix im = ComplexMatrix::Zero(dim, dim);
      im(i, j) = Complex(0, 1);
      im(j, i) = Complex(0, -1);
      expr.add_term(n_vars_++, im);
    }
  blocks_.emplace_back(name, expr);
  return expr;
}

AffineHermitian SdpProblem::add_parametrized_block(const std::string& name,
                                                  const std::vector<ComplexMatrix>& basis) {
  if (basis.empty()) throw ArgumentError("add_parametrized_block: empty basis");
  AffineHermitian expr(basis.front().rows());
  for (const auto& b : basis) expr.add_term(n_vars_++, b);
  blocks_.emplace_back(name, expr);
  return expr;
}

void SdpProblem::add_equality(const LinearFunctional& lhs, double rhs) { equalities_.emplace_back(lhs, rhs); }

void SdpProblem::add_equality(const AffineHermitian& expr) {
  const Index d = expr.dim();
  auto entry = [&](Index i, Index j, bool imag) {
    LinearFunctional f;
    const Complex c0 = expr.constant()(i, j);
    f.constant = imag ? c0.imag() : c0.real();
    for (const auto& [var, coeff] : expr.terms()) {
      const double a = imag ? coeff(i, j).imag() : coeff(i, j).real();
      if (a != 0.0) f.terms.emplace_back(var, a);
    }
    // f(x) == 0  <=>  sum a_i x_i == -constant
    const double rhs = -f.constant;
    f.constant = 0;
    equalities_.emplace_back(std::move(f), rhs);
  };
  for (Index i = 0; i < d; ++i) {
    entry(i, i, false);
    for (Index j = i + 1; j < d; ++j) {
      entry(i, j, false);
      entry(i, j, true);
    }
  }
}

void SdpProblem::add_psd(const std::string& name, AffineHermitian expr) { cones_.emplace_back(name, std::move(expr)); }

nlohmann::json SdpProblem::to_debug_json() const {
  using nlohmann::json;
  auto functional = [](const LinearFunctional& f) {
    json terms = json::array();
    for (const auto& [i, a] : f.terms) terms.push_back({i, a});
    return json{{"terms", terms}, {"constant", f.constant}};
  };
  auto expression = [](const AffineHermitian& e) {
    json terms = json::array();
    for (const auto& [var, coeff] : e.terms()) {
      json entries = json::array();
      for (Index i = 0; i < coeff.rows(); ++i)
        for (Index j = 0; j < coeff.cols(); ++j)
          if (coeff(i, j) != Complex(0)) entries.push_back({i, j, coeff(i, j).real(), coeff(i, j).imag()});
      terms.push_back({{"var", var}, {"entries", entries}});
    }
    return json{{"dim", e.dim()}, {"terms", terms}};
  };

  json out;
  out["num_variables"] = n_vars_;
  out["objective"] = functional(objective_);
  for (const auto& [name, e] : blocks_) out["blocks"].push_back({{"name", name}, {"expr", expression(e)}});
  for (const auto& [name, e] : cones_) out["cones"].push_back({{"name", name}, {"expr", expression(e)}});
  for (const auto& [f, rhs] : equalities_) out["equalities"].push_back({{"lhs", functional(f)}, {"rhs", rhs}});
  return out;
}

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::max_iterations: return "max_iterations";
    case SdpStatus::infeasible_suspected: return "infeasible_suspected";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Interior-point core
//
// Standard form over block-diagonal real symmetric matrices:
//   primal  min <C, X>  s.t.  <A_i, X> = b_i,  X >= 0
//   dual    max b^T y   s.t.  sum_i y_i A_i + S = C,  S >= 0
// The LMI  min c^T z  s.t.  F0 + sum z_i F_i >= 0  is the dual with
// C = F0, A_i = -F_i, b = -c.

namespace {

using Blocks = std::vector<Eigen::MatrixXd>;

struct StandardForm {
  Blocks c;
  std::vector<Eigen::MatrixXd> a;  // per block: column i is vec(A_i restricted to the block)
  Eigen::VectorXd b;
  Index total_dim = 0;
};

double inner(const Blocks& x, const Blocks& y) {
  double acc = 0;
  for (std::size_t k = 0; k < x.size(); ++k) acc += (x[k].array() * y[k].array()).sum();
  return acc;
}

double norm(const Blocks& x) { return std::sqrt(inner(x, x)); }

Eigen::VectorXd apply_a(const StandardForm& sf, const Blocks& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sf.b.size());
  for (std::size_t k = 0; k < x.size(); ++k)
    out.noalias() += sf.a[k].transpose() * Eigen::Map<const Eigen::VectorXd>(x[k].data(), x[k].size());
  return out;
}

Blocks apply_at(const StandardForm& sf, const Eigen::VectorXd& y) {
  Blocks out(sf.c.size());
  for (std::size_t k = 0; k < sf.c.size(); ++k) {
    const Index s = sf.c[k].rows();
    Eigen::VectorXd v = sf.a[k] * y;
    out[k] = Eigen::Map<Eigen::MatrixXd>(v.data(), s, s);
  }
  return out;
}

void symmetrize(Eigen::MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

// Largest alpha with x + alpha dx >= 0 (infinity if unbounded).
double max_step(const Blocks& x, const Blocks& dx) {
  double alpha = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < x.size(); ++k) {
    Eigen::LLT<Eigen::MatrixXd> llt(x[k]);
    if (llt.info() != Eigen::Success) return 0.0;
    Eigen::MatrixXd t = llt.matrixL().solve(dx[k]);
    t = llt.matrixL().solve(t.transpose()).eval();
    symmetrize(t);
    const double lowest = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t, Eigen::EigenvaluesOnly).eigenvalues()(0);
    if (lowest < 0) alpha = std::min(alpha, -1.0 / lowest);
  }
  return alpha;
}

struct IpmResult {
  Eigen::VectorXd y;
  double pobj = 0, dobj = 0;
  KktResiduals residuals;
  SdpStatus status = SdpStatus::max_iterations;
  int iterations = 0;
  bool regularized = false;
};

IpmResult interior_point(const StandardForm& sf, const SdpOptions& opts) {
  const std::size_t nb = sf.c.size();
  const Index m = sf.b.size();
  const double n = static_cast<double>(sf.total_dim);

  double max_norm_a = 0, scale_x = 0;
  for (Index i = 0; i < m; ++i) {
    double sq = 0;
    for (std::size_t k = 0; k < nb; ++k) sq += sf.a[k].col(i).squaredNorm();
    max_norm_a = std::max(max_norm_a, std::sqrt(sq));
    scale_x = std::max(scale_x, (1 + std::abs(sf.b(i))) / (1 + std::sqrt(sq)));
  }
  const double norm_b = sf.b.norm();
  const double norm_c = norm(sf.c);
  const double xi = std::max({10.0, std::sqrt(n), scale_x});
  const double eta = std::max({10.0, std::sqrt(n), norm_c, max_norm_a});

  Blocks x(nb), s(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const Index d = sf.c[k].rows();
    x[k] = xi * Eigen::MatrixXd::Identity(d, d);
    s[k] = eta * Eigen::MatrixXd::Identity(d, d);
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);

  IpmResult result;
  int stalls = 0;
  double best_merit = std::numeric_limits<double>::infinity();
  int since_progress = 0;
  for (int iter = 0;; ++iter) {
    // Residuals.
    const Eigen::VectorXd rp = sf.b - apply_a(sf, x);
    Blocks rd = apply_at(sf, y);
    for (std::size_t k = 0; k < nb; ++k) rd[k] = sf.c[k] - s[k] - rd[k];
    const double pobj = inner(sf.c, x);
    const double dobj = sf.b.dot(y);

    result.y = y;
    result.pobj = pobj;
    result.dobj = dobj;
    result.iterations = iter;
    // Named from the LMI side: "primal" is slack consistency, "dual" the multiplier equations.
    result.residuals = KktResiduals{norm(rd) / (1 + norm_c), rp.norm() / (1 + norm_b),
                                    (pobj - dobj) / (1 + std::abs(pobj) + std::abs(dobj))};

    const auto& r = result.residuals;
    if (std::max({r.primal, r.dual, std::abs(r.gap)}) <= opts.tolerance) {
      result.status = SdpStatus::optimal;
      return result;
    }
    const double merit = std::max({r.primal, r.dual, std::abs(r.gap)});
    if (merit < 0.5 * best_merit) {
      best_merit = merit;
      since_progress = 0;
    } else {
      ++since_progress;
    }
    if (iter >= opts.max_iterations || since_progress >= opts.stall_iterations) {
      result.status = SdpStatus::max_iterations;
      return result;
    }
    if (norm(x) > 1e12 || y.norm() > 1e12) {
      result.status = SdpStatus::infeasible_suspected;
      return result;
    }

    const double mu = inner(x, s) / n;

    Blocks s_inv(nb);
    for (std::size_t k = 0; k < nb; ++k) {
      Eigen::LLT<Eigen::MatrixXd> llt(s[k]);
      if (llt.info() != Eigen::Success) throw NumericalError("sdp: dual slack lost positive definiteness");
      s_inv[k] = llt.solve(Eigen::MatrixXd::Identity(s[k].rows(), s[k].cols()));
      symmetrize(s_inv[k]);
    }

    // Schur complement M_ij = <A_i, X A_j S^-1>; vec(X A S^-1) = (S^-1 kron X) vec(A).
    Eigen::MatrixXd schur = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t k = 0; k < nb; ++k) {
      const Eigen::MatrixXd kr = kron(s_inv[k], x[k]);
      const Eigen::MatrixXd ka = kr * sf.a[k];
      schur.noalias() += sf.a[k].transpose() * ka;
    }
    schur = 0.5 * (schur + schur.transpose()).eval();

    Eigen::LLT<Eigen::MatrixXd> chol(schur);
    if (chol.info() != Eigen::Success) {
      const double diag = std::max(1.0, schur.diagonal().cwiseAbs().maxCoeff());
      for (double delta = 1e-14; delta < 1e-4; delta *= 100) {
        chol.compute(schur + delta * diag * Eigen::MatrixXd::Identity(m, m));
        if (chol.info() == Eigen::Success) break;
      }
      if (chol.info() != Eigen::Success) {
        result.status = SdpStatus::infeasible_suspected;
        return result;
      }
      result.regularized = true;
    }

    struct Direction {
      Blocks dx, ds;
      Eigen::VectorXd dy;
    };
    auto direction = [&](double sigma, const Blocks* corr) {
      Blocks g(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        g[k] = x[k] * rd[k] * s_inv[k] - sigma * mu * s_inv[k];
        if (corr) g[k] += (*corr)[k];
      }
      Direction d;
      d.dy = chol.solve(sf.b + apply_a(sf, g));
      d.ds = apply_at(sf, d.dy);
      d.dx.resize(nb);
      for (std::size_t k = 0; k < nb; ++k) {
        d.ds[k] = rd[k] - d.ds[k];
        symmetrize(d.ds[k]);
        d.dx[k] = sigma * mu * s_inv[k] - x[k] - x[k] * d.ds[k] * s_inv[k];
        if (corr) d.dx[k] -= (*corr)[k];
        symmetrize(d.dx[k]);
      }
      return d;
    };

    // Predictor.
    const Direction aff = direction(0.0, nullptr);
    const double ap_aff = std::min(1.0, max_step(x, aff.dx));
    const double ad_aff = std::min(1.0, max_step(s, aff.ds));
    double mu_aff = 0;
    for (std::size_t k = 0; k < nb; ++k)
      mu_aff += ((x[k] + ap_aff * aff.dx[k]).array() * (s[k] + ad_aff * aff.ds[k]).array()).sum();
    mu_aff /= n;
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, 3.0), 0.0, 1.0);

    // Corrector.
    Blocks corr(nb);
    for (std::size_t k = 0; k < nb; ++k) corr[k] = aff.dx[k] * aff.ds[k] * s_inv[k];
    const Direction d = direction(sigma, &corr);

    const double gamma = 0.9 + 0.09 * std::min(ap_aff, ad_aff);
    const double ap = std::min(1.0, gamma * max_step(x, d.dx));
    const double ad = std::min(1.0, gamma * max_step(s, d.ds));

    for (std::size_t k = 0; k < nb; ++k) {
      x[k] += ap * d.dx[k];
      s[k] += ad * d.ds[k];
      symmetrize(x[k]);
      symmetrize(s[k]);
    }
    y += ad * d.dy;

    stalls = (ap < 1e-10 && ad < 1e-10) ? stalls + 1 : 0;
    if (stalls >= 5) {
      result.status = std::max(result.residuals.primal, result.residuals.dual) > std::sqrt(opts.tolerance)
                          ? SdpStatus::infeasible_suspected
                          : SdpStatus::max_iterations;
      return result;
    }
  }
}

void check_problem(const SdpProblem& problem) {
  const Index n = problem.num_variables();
  auto check_functional = [&](const LinearFunctional& f) {
    for (const auto& [i, a] : f.terms)
      if (i < 0 || i >= n) throw ArgumentError("sdp: functional references an undeclared variable");
  };
  check_functional(problem.objective());
  for (const auto& [f, rhs] : problem.equalities()) check_functional(f);
  for (const auto& [name, expr] : problem.cones()) {
    if (expr.dim() == 0) throw ArgumentError("sdp: cone '" + name + "' has dimension zero");
    auto check_hermitian = [&](const ComplexMatrix& m) {
      if (max_abs(ComplexMatrix(m - m.adjoint())) > 1e-12 * std::max(1.0, max_abs(m)))
        throw ArgumentError("sdp: cone '" + name + "' has a non-Hermitian coefficient");
    };
    check_hermitian(expr.constant());
    for (const auto& [var, coeff] : expr.terms()) {
      if (var >= n) throw ArgumentError("sdp: cone '" + name + "' references an undeclared variable");
      check_hermitian(coeff);
    }
  }
}

}  // namespace

SdpSolution solve(const SdpProblem& problem, const SdpOptions& options) {
  check_problem(problem);
  if (problem.cones().empty()) throw ArgumentError("sdp: problem has no PSD constraints");
  const Index n = problem.num_variables();

  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  for (const auto& [i, a] : problem.objective().terms) c(i) += a;

  // Affine parametrization x = x0 + N z of the equality-feasible set.
  Eigen::VectorXd x0 = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd null_basis;
  bool equalities_consistent = true;
  const Index me = static_cast<Index>(problem.equalities().size());
  if (me > 0) {
    Eigen::MatrixXd e = Eigen::MatrixXd::Zero(me, n);
    Eigen::VectorXd f(me);
    for (Index r = 0; r < me; ++r) {
      const auto& [lhs, rhs] = problem.equalities()[static_cast<std::size_t>(r)];
      for (const auto& [i, a] : lhs.terms) e(r, i) += a;
      f(r) = rhs - lhs.constant;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(e);
    x0 = cod.solve(f);
    equalities_consistent = (e * x0 - f).norm() <= 1e-9 * (1 + f.norm());

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(e.transpose());
    const Index rank = qr.rank();
    const Eigen::MatrixXd q = qr.householderQ();
    null_basis = q.rightCols(n - rank);
  } else {
    null_basis = Eigen::MatrixXd::Identity(n, n);
  }
  const Index m = null_basis.cols();

  SdpSolution sol;
  auto finish = [&](const Eigen::VectorXd& x) {
    sol.x = x;
    sol.objective = problem.objective().evaluate(x);
    for (const auto& [name, expr] : problem.blocks()) sol.block_values.emplace(name, Hermitian(expr.evaluate(x), 1e-9));
    for (const auto& [name, expr] : problem.cones()) sol.cone_values.emplace(name, Hermitian(expr.evaluate(x), 1e-9));
    return sol;
  };

  if (!equalities_consistent) {
    sol.status = SdpStatus::infeasible_suspected;
    return finish(x0);
  }

  // Standard-form data for the reduced LMI in z.
  StandardForm sf;
  sf.b = -(null_basis.transpose() * c);
  for (const auto& [name, expr] : problem.cones()) {
    ComplexMatrix f0 = expr.evaluate(x0);
    const Index s = 2 * expr.dim();
    sf.c.push_back(embed_complex(f0));
    sf.total_dim += s;

    Eigen::MatrixXd coeffs(s * s, static_cast<Index>(expr.terms().size()));
    Eigen::MatrixXd rows(static_cast<Index>(expr.terms().size()), m);
    Index t = 0;
    for (const auto& [var, coeff] : expr.terms()) {
      const Eigen::MatrixXd emb = embed_complex(coeff);
      coeffs.col(t) = Eigen::Map<const Eigen::VectorXd>(emb.data(), emb.size());
      rows.row(t) = null_basis.row(var);
      ++t;
    }
    sf.a.push_back(-(coeffs * rows));
  }

  if (m == 0) {
    // Fully determined by the equalities.
    bool psd = true;
    for (const auto& blk : sf.c)
      psd = psd && Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(blk, Eigen::EigenvaluesOnly).eigenvalues()(0) >=
                       -options.tolerance;
    sol.status = psd ? SdpStatus::optimal : SdpStatus::infeasible_suspected;
    finish(x0);
    sol.dual_bound = sol.objective;
    return sol;
  }

  const IpmResult ipm = interior_point(sf, options);
  sol.status = ipm.status;
  sol.residuals = ipm.residuals;
  sol.iterations = ipm.iterations;
  sol.regularized = ipm.regularized;
  finish(x0 + null_basis * ipm.y);
  // objective = c.x0 + const - b.z, and b.z <= pobj for feasible iterates.
  sol.dual_bound = problem.objective().evaluate(x0) - ipm.pobj;
  return sol;
}

}  // namespace gmecert::sdp
