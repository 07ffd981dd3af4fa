#include "affineopt/experiments.hpp"

#include <cmath>
#include <future>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "affineopt/errors.hpp"
#include "affineopt/spectral.hpp"

namespace affineopt {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::gaussian() {
  if (spare_) {
    const double v = *spare_;
    spare_.reset();
    return v;
  }
  double u = 0.0, v = 0.0, s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double factor = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * factor;
  return u * factor;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw InputError("Rng::below needs n > 0");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t draw = 0;
  do {
    draw = engine_();
  } while (draw >= limit);
  return draw % n;
}

double e_from_kappa(double kappa) {
  if (!(kappa > 1.0)) throw InputError(fmt::format("smoothed l1 needs kappa > 1, got {}", kappa));
  return std::sqrt(1.0 / (kappa - 1.0));
}

std::shared_ptr<const SmoothedL1Objective> smoothed_l1_objective(Eigen::Index dim, double e) {
  return std::make_shared<const SmoothedL1Objective>(dim, e);
}

DenseMatrix gaussian_with_condition(Rng& rng, Eigen::Index p, Eigen::Index d, double chi_target) {
  if (p < 1 || d < 1) throw InputError("matrix dimensions must be positive");
  if (p > d) throw InputError(fmt::format("generators need p <= d, got p = {}, d = {}", p, d));
  if (!(chi_target >= 1.0)) throw InputError("chi_target must be >= 1");

  Eigen::MatrixXd g(p, d);
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.gaussian();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(g, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index m = std::min(p, d);
  const double smallest = 1.0 / std::sqrt(chi_target);
  Vector sigma(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    sigma(i) = m == 1 ? 1.0 : 1.0 - (1.0 - smallest) * static_cast<double>(i) / static_cast<double>(m - 1);
  }
  return DenseMatrix(RowMajorMatrix(svd.matrixU() * sigma.asDiagonal() * svd.matrixV().transpose()));
}

CsInstance gen_compressed_sensing(const CsConfig& cfg) {
  if (cfg.sparsity < 1 || cfg.sparsity > cfg.d) {
    throw InputError(fmt::format("sparsity must be in [1, d], got {}", cfg.sparsity));
  }
  Rng rng(cfg.seed);
  DenseMatrix k = gaussian_with_condition(rng, cfg.p, cfg.d, cfg.chi_target);

  // Partial Fisher-Yates for the support.
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(cfg.d));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  Vector x_sharp = Vector::Zero(cfg.d);
  for (Eigen::Index i = 0; i < cfg.sparsity; ++i) {
    const auto j = i + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(cfg.d - i)));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
    x_sharp(idx[static_cast<std::size_t>(i)]) = 1.0;
  }

  Vector b = k.entries() * x_sharp;
  InstrumentedMap map(std::move(k));
  return {ProblemInstance(smoothed_l1_objective(cfg.d, cfg.e), AffineConstraint{std::move(map), std::move(b)}),
          std::move(x_sharp)};
}

ProblemInstance gen_random_quadratic(Eigen::Index d, Eigen::Index p, double kappa_target, double chi_target,
                                     std::uint64_t seed) {
  if (!(kappa_target >= 1.0)) throw InputError("kappa_target must be >= 1");
  Rng rng(seed);
  DenseMatrix k = gaussian_with_condition(rng, p, d, chi_target);

  Eigen::MatrixXd a;
  if (kappa_target == 1.0) {
    a = Eigen::MatrixXd::Identity(d, d);
  } else {
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) g(i, j) = rng.gaussian();
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    Vector lambda(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      lambda(i) = d == 1 ? 1.0 : 1.0 + (kappa_target - 1.0) * static_cast<double>(i) / static_cast<double>(d - 1);
    }
    a = q * lambda.asDiagonal() * q.transpose();
    a = 0.5 * (a + a.transpose()).eval();
  }

  Vector c(d), x0(d);
  for (Eigen::Index i = 0; i < d; ++i) c(i) = rng.gaussian();
  for (Eigen::Index i = 0; i < d; ++i) x0(i) = rng.gaussian();
  Vector b = k.entries() * x0;

  auto obj = std::make_shared<const QuadraticObjective>(std::move(a), std::move(c), 1.0, kappa_target);
  return ProblemInstance(std::move(obj), AffineConstraint{InstrumentedMap(std::move(k)), std::move(b)});
}

PrimalDualPair reference_solution(const ProblemInstance& inst, const SpectralBounds& bounds) {
  if (dynamic_cast<const QuadraticObjective*>(inst.objective.get()) && inst.dim() + inst.dual_dim() <= 500) {
    return solve_kkt_direct(inst);
  }
  const AccelParams params = accel_params_theorem2(inst.objective->mu(), inst.objective->lip(), bounds);
  const double rate = rate_thm2(inst.objective->kappa()).rate_inverse;
  StoppingRule stop;
  stop.kkt_tol = 1e-12;
  stop.max_iters = 10 * static_cast<std::int64_t>(std::ceil(std::log(1e24) / -std::log(rate)));
  const SolveResult run = solve(Method::algo1, inst, params, Vector::Zero(inst.dim()), stop);

  PrimalDualPair pair;
  pair.x_star = run.state.x;
  const Eigen::MatrixXd kt = inst.K().entries().transpose();
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
  cod.setThreshold(kDefaultRankTol);
  cod.compute(kt);
  pair.y_star = cod.solve(run.state.dual);
  return pair;
}

std::vector<MethodRun> run_comparison(const ProblemInstance& inst, std::span<const Method> methods,
                                      std::uint64_t matvec_budget, const std::optional<PrimalDualPair>& oracle,
                                      const SpectralBounds& bounds) {
  if (methods.empty()) throw InputError("run_comparison needs at least one method");
  StoppingRule stop;
  stop.max_iters = std::numeric_limits<std::int64_t>::max();
  stop.kkt_tol = std::numeric_limits<double>::min();
  stop.matvec_budget = matvec_budget;
  TraceOptions opts;
  opts.oracle = oracle;
  opts.lyapunov = false;

  std::vector<std::future<MethodRun>> jobs;
  for (Method m : methods) {
    jobs.push_back(std::async(std::launch::async, [&, m] {
      MethodRun run{m, default_params(m, inst, bounds), {}};
      run.result = solve(m, inst, run.params, Vector::Zero(inst.dim()), stop, opts);
      return run;
    }));
  }
  std::vector<MethodRun> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

std::optional<TraceRecord> first_reaching(const ConvergenceTrace& trace, double level) {
  for (const auto& r : trace) {
    if (r.err_sq && *r.err_sq <= level) return r;
  }
  return std::nullopt;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw InputError("fit_line needs two or more paired points");
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r_squared = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace affineopt
