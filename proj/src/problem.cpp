#include "affineopt/problem.hpp"

#include <cmath>

#include <fmt/format.h>

#include "affineopt/errors.hpp"
#include "affineopt/spectral.hpp"

namespace affineopt {

Objective::Objective(Eigen::Index dim, double mu, double lip) : dim_(dim), mu_(mu), lip_(lip) {
  if (dim < 1) throw InputError("objective dimension must be >= 1");
  if (!(mu > 0.0) || !(lip >= mu) || !std::isfinite(lip)) {
    throw InputError(fmt::format("need 0 < mu <= L, got mu = {}, L = {}", mu, lip));
  }
}

void Objective::check_dim(const Vector& x) const {
  if (x.size() != dim_) {
    throw InputError(fmt::format("objective expects dimension {}, got {}", dim_, x.size()));
  }
}

double Objective::divergence(const Vector& x, const Vector& x_ref) const {
  return value(x) - value(x_ref) - gradient(x_ref).dot(x - x_ref);
}

namespace {

std::pair<double, double> extreme_eigenvalues(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() < 1) throw InputError("Hessian must be square and nonempty");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  return {solver.eigenvalues().minCoeff(), solver.eigenvalues().maxCoeff()};
}

}  // namespace

QuadraticObjective::QuadraticObjective(Eigen::MatrixXd hessian, Vector linear)
    : QuadraticObjective(hessian, linear, extreme_eigenvalues(hessian).first,
                         extreme_eigenvalues(hessian).second) {}

QuadraticObjective::QuadraticObjective(Eigen::MatrixXd hessian, Vector linear, double mu, double lip)
    : Objective(hessian.rows(), mu, lip), hessian_(std::move(hessian)), linear_(std::move(linear)) {
  if (hessian_.rows() != hessian_.cols()) throw InputError("Hessian must be square");
  if (linear_.size() != hessian_.rows()) throw InputError("linear term length must match Hessian");
  if (!hessian_.allFinite() || !linear_.allFinite()) throw InputError("quadratic has non-finite data");
  if (!hessian_.isApprox(hessian_.transpose(), 1e-12)) throw InputError("Hessian must be symmetric");
}

double QuadraticObjective::value(const Vector& x) const {
  check_dim(x);
  return 0.5 * x.dot(hessian_ * x) + linear_.dot(x);
}

Vector QuadraticObjective::gradient(const Vector& x) const {
  check_dim(x);
  return hessian_ * x + linear_;
}

double QuadraticObjective::divergence(const Vector& x, const Vector& x_ref) const {
  check_dim(x);
  check_dim(x_ref);
  const Vector delta = x - x_ref;
  return 0.5 * delta.dot(hessian_ * delta);
}

namespace {

double checked_smoothing(double e) {
  if (!(e > 0.0) || !std::isfinite(e)) throw InputError(fmt::format("smoothing e must be positive, got {}", e));
  return e;
}

}  // namespace

SmoothedL1Objective::SmoothedL1Objective(Eigen::Index dim, double smoothing)
    : Objective(dim, checked_smoothing(smoothing), 1.0 / checked_smoothing(smoothing) + smoothing),
      smoothing_(smoothing) {}

double SmoothedL1Objective::value(const Vector& x) const {
  check_dim(x);
  const double e = smoothing_;
  return (x.array().square() + e * e).sqrt().sum() + 0.5 * e * x.squaredNorm();
}

Vector SmoothedL1Objective::gradient(const Vector& x) const {
  check_dim(x);
  const double e = smoothing_;
  return (x.array() / (x.array().square() + e * e).sqrt() + e * x.array()).matrix();
}

// Per coordinate, with A = √(t²+e²), B = √(s²+e²):
// √(t²+e²) − B − (s/B)(t − s) = (t − s)(tB − sA)/((A + B)B), and for ts > 0
// tB − sA = e²(t − s)(t + s)/(tB + sA), so nothing cancels as t → s.
double SmoothedL1Objective::divergence(const Vector& x, const Vector& x_ref) const {
  check_dim(x);
  check_dim(x_ref);
  const double e = smoothing_, e2 = e * e;
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double t = x(i), s = x_ref(i), h = t - s;
    const double a = std::sqrt(t * t + e2), b = std::sqrt(s * s + e2);
    const double cross = t * s > 0.0 ? e2 * h * (t + s) / (t * b + s * a) : t * b - s * a;
    total += h * cross / ((a + b) * b) + 0.5 * e * h * h;
  }
  return total;
}

double bregman(const Objective& obj, const Vector& x, const Vector& x_ref) {
  if (x.size() != x_ref.size()) throw InputError("bregman: dimension mismatch");
  return obj.divergence(x, x_ref);
}

ProblemInstance::ProblemInstance(std::shared_ptr<const Objective> obj, AffineConstraint c)
    : objective(std::move(obj)), constraint(std::move(c)) {
  if (!objective) throw InputError("instance needs an objective");
  if (objective->dim() != constraint.map.cols()) {
    throw InputError(fmt::format("objective dimension {} does not match K columns {}", objective->dim(),
                                 constraint.map.cols()));
  }
  if (constraint.rhs.size() != constraint.map.rows()) {
    throw InputError(fmt::format("b has length {}, K has {} rows", constraint.rhs.size(), constraint.map.rows()));
  }
  if (!constraint.rhs.allFinite()) throw InputError("b contains non-finite entries");
}

ProblemInstance ProblemInstance::fresh_copy() const {
  return ProblemInstance(objective, AffineConstraint{constraint.map.fresh(), constraint.rhs});
}

double rhs_range_residual(const ProblemInstance& inst) {
  return (project_onto_range(inst.K(), inst.b()) - inst.b()).norm();
}

KktResidual kkt_residual(const ProblemInstance& inst, const Vector& x, const Vector& y) {
  if (x.size() != inst.dim() || y.size() != inst.dual_dim()) throw InputError("kkt_residual: dimension mismatch");
  const auto& k = inst.K().entries();
  return {(inst.objective->gradient(x) + k.transpose() * y).norm(), (k * x - inst.b()).norm()};
}

PrimalDualPair solve_kkt_direct(const ProblemInstance& inst) {
  const auto* quad = dynamic_cast<const QuadraticObjective*>(inst.objective.get());
  if (!quad) {
    throw UnsupportedOracleError(
        fmt::format("direct KKT solve needs a quadratic objective, got '{}'", inst.objective->kind()));
  }
  const Eigen::Index d = inst.dim(), p = inst.dual_dim();
  if (d + p > 500) throw InputError(fmt::format("direct KKT solve limited to d + p <= 500, got {}", d + p));

  // Null-space method: x⋆ = x_p + N z with x_p = K⁺b and N a basis of ker K,
  // then NᵀAN z = −Nᵀ∇F(x_p). NᵀAN has condition number at most κ, so the
  // solve stays accurate when the bordered KKT matrix would not.
  const Eigen::MatrixXd k = inst.K().entries();
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(k, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vector& sv = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < sv.size() && sv(rank) * sv(rank) > kDefaultRankTol * sv(0) * sv(0)) ++rank;
  if (rank == 0) throw DegenerateError("K is zero");
  const auto u_r = svd.matrixU().leftCols(rank);
  const auto v_r = svd.matrixV().leftCols(rank);
  const Vector inv_s = sv.head(rank).cwiseInverse();

  PrimalDualPair pair;
  pair.x_star = v_r * inv_s.asDiagonal() * (u_r.transpose() * inst.b());
  const double infeasible = (k * pair.x_star - inst.b()).norm();
  if (infeasible > 1e-8 * (1.0 + inst.b().norm())) {
    throw DegenerateError(fmt::format("b is not in range(K) (residual {:.3e})", infeasible));
  }
  if (rank < d) {
    const Eigen::MatrixXd n = svd.matrixV().rightCols(d - rank);
    const Eigen::MatrixXd reduced = n.transpose() * quad->hessian() * n;
    const Eigen::LLT<Eigen::MatrixXd> llt(reduced);
    if (llt.info() != Eigen::Success) throw DegenerateError("reduced Hessian is not positive definite");
    pair.x_star += n * llt.solve(-(n.transpose() * quad->gradient(pair.x_star)));
  }
  // Minimum-norm y with Kᵀy = −∇F(x⋆); it lies in range(K) by construction.
  pair.y_star = -(u_r * inv_s.asDiagonal() * (v_r.transpose() * quad->gradient(pair.x_star)));
  return pair;
}

}  // namespace affineopt
