#pragma once

#include <cstdint>
#include <optional>
#include <variant>

#include "affineopt/diagnostics.hpp"
#include "affineopt/solvers.hpp"

namespace affineopt {

struct StoppingRule {
  std::int64_t max_iters = 10000;
  double kkt_tol = 1e-10;  ///< both KKT residuals must drop to this level
  int check_every = 1;
  /// Stop once count_K + count_Kt exceeds this.
  std::optional<std::uint64_t> matvec_budget;
};

struct TraceOptions {
  /// Enables err_sq, bregman_f and lyapunov columns.
  std::optional<PrimalDualPair> oracle;
  /// Lyapunov column (needs a dense spectrum for algo1).
  bool lyapunov = true;
};

using MethodParams = std::variant<PapcParams, AccelParams>;

enum class StopReason { kkt_tolerance, max_iters, matvec_budget };

struct SolveResult {
  SolverState state;
  ConvergenceTrace trace;
  CounterSnapshot counters;  ///< deltas accumulated by this run
  StopReason reason = StopReason::max_iters;
  KktResidual final_kkt;
};

/**
 * @brief Runs one method from x0 until the stopping rule fires.
 *
 * The instance is copied with fresh counters, so concurrent calls on the
 * same instance do not interfere. One trace record is emitted for the
 * starting point and one per step (none when max_iters = 0). Diagnostic
 * quantities use the matrix directly and never count as matvecs or
 * gradient calls. For algo1 the stationarity residual is ‖∇F(x) + u‖.
 *
 * Throws DivergenceError when ‖x‖ exceeds 1e12·(1 + ‖x0‖) or turns non-finite.
 */
SolveResult solve(Method method, const ProblemInstance& inst, const MethodParams& params, const Vector& x0,
                  const StoppingRule& stop, const TraceOptions& options = {});

/// Default parameters: the standard chooser for papc, the accelerated
/// choosers for algo3 (unpreconditioned) and algo1 (Chebyshev-preconditioned).
MethodParams default_params(Method method, const ProblemInstance& inst, const SpectralBounds& bounds);

}  // namespace affineopt
