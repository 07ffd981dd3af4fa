#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "affineopt/operators.hpp"

namespace affineopt {

/**
 * @brief Smooth, strongly convex objective F accessed through value and
 * gradient oracles, with its moduli μ (strong convexity) and L (smoothness).
 *
 * Implementations must be pure: no hidden state mutated by value() or
 * gradient(), so one instance can serve concurrent solver runs.
 */
class Objective {
 public:
  Objective(Eigen::Index dim, double mu, double lip);
  virtual ~Objective() = default;

  Eigen::Index dim() const { return dim_; }
  double mu() const { return mu_; }
  double lip() const { return lip_; }
  double kappa() const { return lip_ / mu_; }

  virtual std::string_view kind() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  /// D_F(x, x_ref). The default subtracts values; overrides avoid the
  /// cancellation that sets an absolute floor near the minimiser.
  virtual double divergence(const Vector& x, const Vector& x_ref) const;

 protected:
  void check_dim(const Vector& x) const;

 private:
  Eigen::Index dim_;
  double mu_;
  double lip_;
};

/// F(x) = ½ xᵀAx + cᵀx with A symmetric positive definite.
class QuadraticObjective final : public Objective {
 public:
  /// μ and L default to the extreme eigenvalues of A.
  QuadraticObjective(Eigen::MatrixXd hessian, Vector linear);
  QuadraticObjective(Eigen::MatrixXd hessian, Vector linear, double mu, double lip);

  std::string_view kind() const override { return "quadratic"; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  double divergence(const Vector& x, const Vector& x_ref) const override;

  const Eigen::MatrixXd& hessian() const { return hessian_; }
  const Vector& linear() const { return linear_; }

 private:
  Eigen::MatrixXd hessian_;
  Vector linear_;
};

/// F(x) = Σ sqrt(x_i² + e²) + (e/2) x_i², a smooth strongly convex proxy
/// for the ℓ1 norm with μ = e and L = 1/e + e.
class SmoothedL1Objective final : public Objective {
 public:
  SmoothedL1Objective(Eigen::Index dim, double smoothing);

  std::string_view kind() const override { return "smoothed_l1"; }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  double divergence(const Vector& x, const Vector& x_ref) const override;

  double smoothing() const { return smoothing_; }

 private:
  double smoothing_;
};

/// D_F(x, x_ref) = F(x) − F(x_ref) − <∇F(x_ref), x − x_ref>.
double bregman(const Objective& obj, const Vector& x, const Vector& x_ref);

struct AffineConstraint {
  InstrumentedMap map;
  Vector rhs;
};

struct ProblemInstance {
  ProblemInstance(std::shared_ptr<const Objective> objective, AffineConstraint constraint);

  std::shared_ptr<const Objective> objective;
  AffineConstraint constraint;

  Eigen::Index dim() const { return constraint.map.cols(); }
  Eigen::Index dual_dim() const { return constraint.map.rows(); }
  const DenseMatrix& K() const { return constraint.map.matrix(); }
  const Vector& b() const { return constraint.rhs; }

  /// Same objective, matrix and rhs; counters start at zero.
  ProblemInstance fresh_copy() const;
};

/// ‖K K⁺ b − b‖, the distance from b to range(K).
double rhs_range_residual(const ProblemInstance& inst);

struct PrimalDualPair {
  Vector x_star;
  Vector y_star;
};

struct KktResidual {
  double stationarity = 0.0;  ///< ‖∇F(x) + Kᵀy‖
  double feasibility = 0.0;   ///< ‖Kx − b‖
};

/// Does not touch the map's counters.
KktResidual kkt_residual(const ProblemInstance& inst, const Vector& x, const Vector& y);

/**
 * @brief Ground truth for quadratic instances: the solution of the linear
 * system [A Kᵀ; K 0](x, y) = (−c, b), by direct factorization.
 *
 * Uses an SVD of K and a Cholesky solve on ker K rather than factorizing
 * the bordered matrix, whose conditioning degrades as κ·χ. The returned y
 * is the minimum-norm one, i.e. it lies in range(K), which makes the pair
 * unique. Throws UnsupportedOracleError for non-quadratic objectives and
 * DegenerateError when b is not in range(K) to working accuracy.
 */
PrimalDualPair solve_kkt_direct(const ProblemInstance& inst);

}  // namespace affineopt
