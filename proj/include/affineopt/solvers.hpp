#pragma once

#include <cstdint>
#include <string_view>

#include "affineopt/problem.hpp"
#include "affineopt/spectral.hpp"

namespace affineopt {

enum class Method { papc, algo3, algo1 };

std::string_view to_string(Method m);
/// Accepts "papc", "algo3", "algo1"; throws InputError otherwise.
Method parse_method(std::string_view name);

struct PapcParams {
  double eta = 0.0;
  double theta = 0.0;
};

/// Step sizes and momentum for the accelerated methods. n_inner is the
/// Chebyshev degree N for algo1 and 0 for algo3.
struct AccelParams {
  double tau = 1.0;
  double eta = 0.0;
  double theta = 0.0;
  double alpha = 0.0;
  SpectralBounds bounds{1.0, 1.0};
  int n_inner = 0;
};

/**
 * Iterate bundle. `dual` is y ∈ R^p for papc/algo3 and u ∈ R^d for algo1.
 * x_f is carried along for papc too (kept equal to x) so every method
 * exposes the same fields.
 */
struct SolverState {
  Vector x;
  Vector x_f;
  Vector dual;
  std::int64_t k = 0;
  std::uint64_t grads = 0;
};

SolverState initial_state(Method method, const ProblemInstance& inst, const Vector& x0);

/// η = 1/(2L), θ = 1/(ηλ1), so ηθλ1 = 1.
PapcParams papc_default_params(double lip, const SpectralBounds& bounds);

/// τ = min{1, ½√(χ/κ)}, η = 1/(4τL), θ = 1/(ηλ1), α = μ.
AccelParams accel_params_prop1(double mu, double lip, const SpectralBounds& bounds);

/// τ = min{1, ½√(19/(15κ))}, η = 1/(4τL), θ = 15/(19η), α = μ, N = ⌈√χ⌉.
AccelParams accel_params_theorem2(double mu, double lip, const SpectralBounds& bounds);

/// One PAPC step: one gradient, one K, two Kᵀ.
void papc_step(SolverState& state, ProblemInstance& inst, const PapcParams& params);

/// One step of the Nesterov-accelerated PAPC variant: one gradient, one K, two Kᵀ.
void algorithm3_step(SolverState& state, ProblemInstance& inst, const AccelParams& params);

/**
 * One step of the Chebyshev-preconditioned accelerated method: one
 * gradient and N applications each of K and Kᵀ. When λ1 = λ2 the
 * preconditioner collapses to W/λ1 and the step costs one of each.
 */
void algorithm1_step(SolverState& state, ProblemInstance& inst, const AccelParams& params);

}  // namespace affineopt
