#include "affineopt/solve.hpp"

#include <cmath>
#include <memory>

#include <fmt/format.h>

#include "affineopt/errors.hpp"

namespace affineopt {

MethodParams default_params(Method method, const ProblemInstance& inst, const SpectralBounds& bounds) {
  const double mu = inst.objective->mu(), lip = inst.objective->lip();
  switch (method) {
    case Method::papc: return papc_default_params(lip, bounds);
    case Method::algo3: return accel_params_prop1(mu, lip, bounds);
    case Method::algo1: return accel_params_theorem2(mu, lip, bounds);
  }
  throw InputError("unknown method");
}

namespace {

KktResidual residuals(Method method, const ProblemInstance& inst, const SolverState& s) {
  if (method != Method::algo1) return kkt_residual(inst, s.x, s.dual);
  const auto& k = inst.K().entries();
  return {(inst.objective->gradient(s.x) + s.dual).norm(), (k * s.x - inst.b()).norm()};
}

}  // namespace

SolveResult solve(Method method, const ProblemInstance& inst, const MethodParams& params, const Vector& x0,
                  const StoppingRule& stop, const TraceOptions& options) {
  if (stop.check_every < 1) throw InputError("check_every must be >= 1");
  if (!(stop.kkt_tol > 0.0)) throw InputError("kkt_tol must be positive");
  const bool papc = method == Method::papc;
  if (papc != std::holds_alternative<PapcParams>(params)) {
    throw InputError(fmt::format("parameter kind does not match method {}", to_string(method)));
  }

  ProblemInstance work = inst.fresh_copy();
  SolveResult res;
  res.state = initial_state(method, work, x0);
  res.final_kkt = residuals(method, work, res.state);
  if (stop.max_iters <= 0 || (stop.matvec_budget && *stop.matvec_budget == 0)) return res;

  // Lyapunov machinery, built once.
  std::optional<QMetric> metric;
  std::unique_ptr<PreconditionedReference> pref;
  const AccelParams* accel = std::get_if<AccelParams>(&params);
  if (options.oracle && options.lyapunov && accel) {
    const Spectrum spectrum = eigendecompose_gram(work.K());
    if (method == Method::algo3) {
      metric.emplace(accel->eta, accel->theta, accel->alpha, work.K(), spectrum.lambda_max());
    } else {
      pref = std::make_unique<PreconditionedReference>(work, spectrum, *accel, options.oracle->x_star);
    }
  }

  auto record = [&](const KktResidual& kkt) {
    TraceRecord r;
    const auto& s = res.state;
    r.k = s.k;
    r.kkt_stat = kkt.stationarity;
    r.kkt_feas = kkt.feasibility;
    r.grads = s.grads;
    const auto c = work.constraint.map.counter_snapshot();
    r.matvecs_K = c.count_K;
    r.matvecs_Kt = c.count_Kt;
    if (options.oracle) {
      const auto& star = *options.oracle;
      r.err_sq = (s.x - star.x_star).squaredNorm();
      r.bregman_f = bregman(*work.objective, s.x_f, star.x_star);
      if (metric) r.lyapunov = lyapunov(s, star, *work.objective, *metric, accel->tau);
      if (pref) r.lyapunov = pref->lyapunov(s);
    }
    res.trace.push_back(r);
  };

  const double blowup = 1e12 * (1.0 + x0.norm());
  auto converged = [&](const KktResidual& kkt) {
    return kkt.stationarity <= stop.kkt_tol && kkt.feasibility <= stop.kkt_tol;
  };

  record(res.final_kkt);
  if (converged(res.final_kkt)) {
    res.reason = StopReason::kkt_tolerance;
    return res;
  }

  while (res.state.k < stop.max_iters) {
    if (papc) {
      papc_step(res.state, work, std::get<PapcParams>(params));
    } else if (method == Method::algo3) {
      algorithm3_step(res.state, work, *accel);
    } else {
      algorithm1_step(res.state, work, *accel);
    }

    const double xn = res.state.x.norm();
    if (!std::isfinite(xn) || xn > blowup) {
      throw DivergenceError(fmt::format("{} diverged at iteration {}: |x| = {:.3e} exceeds {:.3e}", to_string(method),
                                        res.state.k, xn, blowup));
    }

    res.final_kkt = residuals(method, work, res.state);
    record(res.final_kkt);

    if (res.state.k % stop.check_every == 0 && converged(res.final_kkt)) {
      res.reason = StopReason::kkt_tolerance;
      break;
    }
    if (stop.matvec_budget && work.constraint.map.counter_snapshot().total() > *stop.matvec_budget) {
      res.reason = StopReason::matvec_budget;
      break;
    }
  }
  res.counters = work.constraint.map.counter_snapshot();
  return res;
}

}  // namespace affineopt
