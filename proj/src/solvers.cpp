#include "affineopt/solvers.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "affineopt/chebyshev.hpp"
#include "affineopt/errors.hpp"

namespace affineopt {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::papc: return "papc";
    case Method::algo3: return "algo3";
    case Method::algo1: return "algo1";
  }
  return "unknown";
}

Method parse_method(std::string_view name) {
  if (name == "papc") return Method::papc;
  if (name == "algo3") return Method::algo3;
  if (name == "algo1") return Method::algo1;
  throw InputError(fmt::format("unknown method '{}' (expected papc, algo3 or algo1)", name));
}

SolverState initial_state(Method method, const ProblemInstance& inst, const Vector& x0) {
  if (x0.size() != inst.dim()) {
    throw InputError(fmt::format("x0 has length {}, expected {}", x0.size(), inst.dim()));
  }
  SolverState s;
  s.x = x0;
  s.x_f = x0;
  s.dual = Vector::Zero(method == Method::algo1 ? inst.dim() : inst.dual_dim());
  return s;
}

PapcParams papc_default_params(double lip, const SpectralBounds& bounds) {
  PapcParams p;
  p.eta = 1.0 / (2.0 * lip);
  p.theta = 1.0 / (p.eta * bounds.lambda1());
  return p;
}

AccelParams accel_params_prop1(double mu, double lip, const SpectralBounds& bounds) {
  if (!(mu > 0.0) || !(lip >= mu)) throw InputError("need 0 < mu <= L");
  const double kappa = lip / mu;
  AccelParams p;
  p.tau = std::min(1.0, 0.5 * std::sqrt(bounds.chi() / kappa));
  p.eta = 1.0 / (4.0 * p.tau * lip);
  p.theta = 1.0 / (p.eta * bounds.lambda1());
  p.alpha = mu;
  p.bounds = bounds;
  p.n_inner = 0;
  return p;
}

AccelParams accel_params_theorem2(double mu, double lip, const SpectralBounds& bounds) {
  if (!(mu > 0.0) || !(lip >= mu)) throw InputError("need 0 < mu <= L");
  const double kappa = lip / mu;
  AccelParams p;
  p.tau = std::min(1.0, 0.5 * std::sqrt(19.0 / (15.0 * kappa)));
  p.eta = 1.0 / (4.0 * p.tau * lip);
  p.theta = 15.0 / (19.0 * p.eta);
  p.alpha = mu;
  p.bounds = bounds;
  p.n_inner = inner_iterations_for(bounds.chi());
  return p;
}

namespace {

void check_state(const SolverState& s, const ProblemInstance& inst, Eigen::Index dual_dim) {
  if (s.x.size() != inst.dim() || s.x_f.size() != inst.dim() || s.dual.size() != dual_dim) {
    throw InputError("solver state dimensions do not match the instance");
  }
}

}  // namespace

void papc_step(SolverState& s, ProblemInstance& inst, const PapcParams& prm) {
  check_state(s, inst, inst.dual_dim());
  auto& map = inst.constraint.map;
  const Vector grad = inst.objective->gradient(s.x);
  ++s.grads;

  const Vector forward = s.x - prm.eta * grad;
  const Vector x_half = forward - prm.eta * map.apply_transpose(s.dual);
  s.dual += prm.theta * (map.apply(x_half) - inst.b());
  s.x = forward - prm.eta * map.apply_transpose(s.dual);
  s.x_f = s.x;
  ++s.k;
}

void algorithm3_step(SolverState& s, ProblemInstance& inst, const AccelParams& prm) {
  check_state(s, inst, inst.dual_dim());
  auto& map = inst.constraint.map;
  const double tau = prm.tau, eta = prm.eta, alpha = prm.alpha;
  const double damp = 1.0 / (1.0 + eta * alpha);

  const Vector x_g = tau * s.x + (1.0 - tau) * s.x_f;
  const Vector shifted_grad = inst.objective->gradient(x_g) - alpha * x_g;
  ++s.grads;

  const Vector x_half = damp * (s.x - eta * (shifted_grad + map.apply_transpose(s.dual)));
  s.dual += prm.theta * (map.apply(x_half) - inst.b());
  const Vector x_next = damp * (s.x - eta * (shifted_grad + map.apply_transpose(s.dual)));

  s.x_f = x_g + (2.0 * tau / (2.0 - tau)) * (x_next - s.x);
  s.x = x_next;
  ++s.k;
}

void algorithm1_step(SolverState& s, ProblemInstance& inst, const AccelParams& prm) {
  check_state(s, inst, inst.dim());
  auto& map = inst.constraint.map;
  const double tau = prm.tau, eta = prm.eta, alpha = prm.alpha;
  const double damp = 1.0 / (1.0 + eta * alpha);

  const Vector x_g = tau * s.x + (1.0 - tau) * s.x_f;
  const Vector grad = inst.objective->gradient(x_g);
  ++s.grads;

  const Vector x_half = damp * (s.x - eta * (grad - alpha * x_g + s.dual));

  Vector r;
  if (prm.bounds.degenerate()) {
    // λ1 = λ2: P(W) = W/λ1, and P(W)(x − x⋆) = Kᵀ(Kx − b)/λ1.
    r = prm.theta * map.apply_transpose(map.apply(x_half) - inst.b()) / prm.bounds.lambda1();
  } else {
    r = prm.theta * precond_residual(x_half, map, inst.b(), ChebyshevConfig(prm.n_inner, prm.bounds));
  }
  s.dual += r;
  const Vector x_next = x_half - eta * damp * r;

  s.x_f = x_g + (2.0 * tau / (2.0 - tau)) * (x_next - s.x);
  s.x = x_next;
  ++s.k;
}

}  // namespace affineopt
