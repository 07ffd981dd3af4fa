#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "affineopt/problem.hpp"
#include "affineopt/solve.hpp"

namespace affineopt {

/**
 * @brief Seeded random source with a fixed, documented algorithm so
 * instances reproduce across platforms and languages.
 *
 * Engine: MT19937-64 (std::mt19937_64) seeded with the 64-bit seed.
 * uniform(): top 53 bits of one draw, scaled to [0, 1).
 * gaussian(): Marsaglia polar method on 2·uniform() − 1 pairs; each
 * accepted pair yields two variates, the second cached for the next call.
 * below(n): rejection sampling on full 64-bit draws (no modulo bias).
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  double gaussian();
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// e = √(1/(κ−1)), the smoothing giving the smoothed ℓ1 objective condition number κ.
double e_from_kappa(double kappa);

std::shared_ptr<const SmoothedL1Objective> smoothed_l1_objective(Eigen::Index dim, double e);

/// Gaussian p x d matrix whose nonzero singular values are replaced by an
/// equispaced grid from 1 down to 1/√χ, so that χ(KᵀK) = χ exactly.
DenseMatrix gaussian_with_condition(Rng& rng, Eigen::Index p, Eigen::Index d, double chi_target);

struct CsConfig {
  Eigen::Index d = 1000;
  Eigen::Index p = 250;
  Eigen::Index sparsity = 50;
  double chi_target = 1e5;
  double e = 0.01;
  std::uint64_t seed = 0;
};

struct CsInstance {
  ProblemInstance instance;
  Vector x_sharp;
};

/// Compressed-sensing instance: b = Kx♯ with x♯ a 0/1 vector of given sparsity.
CsInstance gen_compressed_sensing(const CsConfig& cfg);

/// F(x) = ½xᵀAx + cᵀx with spec(A) equispaced on [1, κ], conditioned
/// Gaussian K, and b = Kx₀ for a Gaussian x₀.
ProblemInstance gen_random_quadratic(Eigen::Index d, Eigen::Index p, double kappa_target, double chi_target,
                                     std::uint64_t seed);

/**
 * @brief Ground-truth primal-dual pair for any instance.
 *
 * Quadratic instances small enough for the direct solve use
 * solve_kkt_direct. Otherwise algo1 runs to a 1e-12 KKT residual with ten
 * times the iteration count its rate predicts for a 1e-24 reduction, and y
 * is recovered as the minimum-norm solution of Kᵀy = u.
 */
PrimalDualPair reference_solution(const ProblemInstance& inst, const SpectralBounds& bounds);

struct MethodRun {
  Method method;
  MethodParams params;
  SolveResult result;
};

/// Runs every method from x0 = 0 with its default parameters until its
/// matvec count exceeds the budget. Methods run concurrently.
std::vector<MethodRun> run_comparison(const ProblemInstance& inst, std::span<const Method> methods,
                                      std::uint64_t matvec_budget, const std::optional<PrimalDualPair>& oracle,
                                      const SpectralBounds& bounds);

/// First record whose err_sq is at or below level.
std::optional<TraceRecord> first_reaching(const ConvergenceTrace& trace, double level);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

/// Least-squares line through (x_i, y_i).
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace affineopt
