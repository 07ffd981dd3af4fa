#include <doctest.h>

#include "affineopt/errors.hpp"
#include "affineopt/experiments.hpp"
#include "affineopt/solve.hpp"
#include "affineopt/solvers.hpp"
#include "test_support.hpp"

using namespace affineopt;
using namespace testsupport;

namespace {

ProblemInstance half_norm_instance(const Eigen::MatrixXd& k, const Vector& b) {
  const auto d = k.cols();
  auto obj = std::make_shared<QuadraticObjective>(Eigen::MatrixXd::Identity(d, d), Vector::Zero(d));
  return ProblemInstance(obj, {InstrumentedMap(dense(k)), b});
}

SpectralBounds bounds_of(const ProblemInstance& inst) { return spectral_bounds(eigendecompose_gram(inst.K())); }

}  // namespace

TEST_CASE("method names round trip") {
  for (Method m : {Method::papc, Method::algo3, Method::algo1}) CHECK(parse_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_method("algo2"), InputError);
}

TEST_CASE("papc default parameters") {
  PapcParams p = papc_default_params(1.0, SpectralBounds(1.0, 1.0));
  CHECK(p.eta == 0.5);
  CHECK(p.theta == 2.0);
  p = papc_default_params(2.0, SpectralBounds(4.0, 1.0));
  CHECK(p.eta == 0.25);
  CHECK(p.theta == 1.0);
  p = papc_default_params(7.3, SpectralBounds(3.1, 0.2));
  CHECK(p.eta * p.theta * 3.1 == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("unpreconditioned accelerated parameters") {
  const double lip = 8.0, mu = 2.0;
  AccelParams p = accel_params_prop1(mu, lip, SpectralBounds(3.0, 3.0));
  CHECK(p.tau == doctest::Approx(0.25));
  CHECK(p.eta == doctest::Approx(1.0 / lip));
  CHECK(p.theta == doctest::Approx(lip / 3.0));
  CHECK(p.alpha == mu);
  CHECK(p.n_inner == 0);

  CHECK(accel_params_prop1(1.0, 1.0, SpectralBounds(4.0, 1.0)).tau == 1.0);
  CHECK(accel_params_prop1(1.0, 1e4, SpectralBounds(1e5, 1.0)).tau == 1.0);
  CHECK(accel_params_prop1(1.0, 1e4, SpectralBounds(10.0, 1.0)).tau == doctest::Approx(0.5 * std::sqrt(1e-3)));
  CHECK_THROWS_AS(accel_params_prop1(2.0, 1.0, SpectralBounds(1.0, 1.0)), InputError);
}

TEST_CASE("Chebyshev-preconditioned parameters") {
  AccelParams p = accel_params_theorem2(1.0, 1.0, SpectralBounds(4.0, 1.0));
  CHECK(p.tau == doctest::Approx(0.56273).epsilon(1e-5));
  CHECK(p.eta == doctest::Approx(1.0 / (4.0 * p.tau)));
  CHECK(p.theta == doctest::Approx(15.0 / (19.0 * p.eta)));
  CHECK(p.n_inner == 2);

  p = accel_params_theorem2(1.0, 1e4, SpectralBounds(1e5, 1.0));
  CHECK(p.tau == doctest::Approx(0.5 * std::sqrt(19.0 / 150000.0)));
  CHECK(p.tau == doctest::Approx(0.0056273).epsilon(1e-4));
  CHECK(p.n_inner == 317);
  CHECK(p.alpha == 1.0);
}

TEST_CASE("papc hand iteration") {
  ProblemInstance inst = half_norm_instance(Eigen::MatrixXd::Identity(1, 1), Vector{{0.0}});
  SolverState s = initial_state(Method::papc, inst, Vector{{1.0}});
  papc_step(s, inst, PapcParams{0.5, 0.5});
  CHECK(s.dual(0) == doctest::Approx(0.25));
  CHECK(s.x(0) == doctest::Approx(0.375));
  CHECK(s.k == 1);
  CHECK(s.grads == 1);
  CHECK(inst.constraint.map.counter_snapshot() == CounterSnapshot{1, 2});
}

TEST_CASE("accelerated step with tau = 1 matches a hand expansion") {
  ProblemInstance inst = half_norm_instance(Eigen::MatrixXd::Ones(1, 2), Vector{{2.0}});
  SolverState s = initial_state(Method::algo3, inst, Vector{{1.0, 0.0}});
  AccelParams p;
  p.tau = 1.0;
  p.eta = 0.5;
  p.theta = 1.0;
  p.alpha = 1.0;
  algorithm3_step(s, inst, p);
  CHECK(s.dual(0) == doctest::Approx(-4.0 / 3.0));
  CHECK(s.x(0) == doctest::Approx(10.0 / 9.0));
  CHECK(s.x(1) == doctest::Approx(4.0 / 9.0));
  CHECK(s.x_f(0) == doctest::Approx(11.0 / 9.0));
  CHECK(s.x_f(1) == doctest::Approx(8.0 / 9.0));
  CHECK(inst.constraint.map.counter_snapshot() == CounterSnapshot{1, 2});
}

TEST_CASE("optimal pair is a fixed point of papc and the accelerated step") {
  ProblemInstance inst = gen_random_quadratic(8, 3, 10.0, 5.0, 12);
  const PrimalDualPair star = solve_kkt_direct(inst);
  const SpectralBounds b = bounds_of(inst);

  SolverState s{star.x_star, star.x_star, star.y_star, 0, 0};
  papc_step(s, inst, papc_default_params(inst.objective->lip(), b));
  CHECK((s.x - star.x_star).norm() <= 1e-12 * (1 + star.x_star.norm()));
  CHECK((s.dual - star.y_star).norm() <= 1e-12 * (1 + star.y_star.norm()));

  SolverState t{star.x_star, star.x_star, star.y_star, 0, 0};
  algorithm3_step(t, inst, accel_params_prop1(inst.objective->mu(), inst.objective->lip(), b));
  CHECK((t.x - star.x_star).norm() <= 1e-12 * (1 + star.x_star.norm()));
  CHECK((t.x_f - star.x_star).norm() <= 1e-12 * (1 + star.x_star.norm()));
  CHECK((t.dual - star.y_star).norm() <= 1e-12 * (1 + star.y_star.norm()));
}

TEST_CASE("preconditioned step: converged state persists") {
  const ProblemInstance inst = gen_random_quadratic(10, 4, 5.0, 10.0, 13);
  const SpectralBounds b = bounds_of(inst);
  const AccelParams p = accel_params_theorem2(inst.objective->mu(), inst.objective->lip(), b);
  StoppingRule stop;
  stop.kkt_tol = 1e-13;
  stop.max_iters = 20000;
  SolveResult r = solve(Method::algo1, inst, p, Vector::Zero(10), stop);
  REQUIRE(r.reason == StopReason::kkt_tolerance);
  ProblemInstance work = inst.fresh_copy();
  SolverState s = r.state;
  algorithm1_step(s, work, p);
  CHECK((s.x - r.state.x).norm() <= 1e-10);
  CHECK((s.dual - r.state.dual).norm() <= 1e-10);
  CHECK(work.constraint.map.counter_snapshot() ==
        CounterSnapshot{static_cast<std::uint64_t>(p.n_inner), static_cast<std::uint64_t>(p.n_inner)});
}

TEST_CASE("accelerated step obeys the block step representation") {
  std::mt19937_64 gen(5);
  ProblemInstance inst = gen_random_quadratic(9, 4, 20.0, 10.0, 14);
  const SpectralBounds b = bounds_of(inst);
  const AccelParams p = accel_params_prop1(inst.objective->mu(), inst.objective->lip(), b);
  const Eigen::MatrixXd k = inst.K().entries();
  const Eigen::MatrixXd q = q_matrix(p.eta, p.theta, p.alpha, k);
  SolverState s = initial_state(Method::algo3, inst, random_vector(gen, 9));
  s.dual = k * random_vector(gen, 9);
  for (int step = 0; step < 30; ++step) {
    const SolverState prev = s;
    const Vector x_g = p.tau * s.x + (1 - p.tau) * s.x_f;
    algorithm3_step(s, inst, p);
    Vector delta(13), rhs(13);
    delta << s.x - prev.x, s.dual - prev.dual;
    rhs << p.alpha * (x_g - s.x) - (inst.objective->gradient(x_g) + k.transpose() * s.dual), k * s.x - inst.b();
    CHECK((q * delta - rhs).norm() <= 1e-10 * std::max(1.0, rhs.norm()));
  }
}

TEST_CASE("dual iterates stay in range(K) and range(W)") {
  const ProblemInstance inst = gen_random_quadratic(12, 5, 10.0, 20.0, 15);
  const SpectralBounds b = bounds_of(inst);
  const Spectrum spec = eigendecompose_gram(inst.K());
  const Eigen::MatrixXd ker_w = spec.kernel_projector();
  StoppingRule stop;
  stop.max_iters = 200;
  stop.kkt_tol = 1e-300;

  const SolveResult r3 = solve(Method::algo3, inst, default_params(Method::algo3, inst, b), Vector::Ones(12), stop);
  CHECK((project_onto_range(inst.K(), r3.state.dual) - r3.state.dual).norm() <= 1e-8 * (1 + r3.state.dual.norm()));
  const SolveResult rp = solve(Method::papc, inst, default_params(Method::papc, inst, b), Vector::Ones(12), stop);
  CHECK((project_onto_range(inst.K(), rp.state.dual) - rp.state.dual).norm() <= 1e-8 * (1 + rp.state.dual.norm()));
  const SolveResult r1 = solve(Method::algo1, inst, default_params(Method::algo1, inst, b), Vector::Ones(12), stop);
  CHECK((ker_w * r1.state.dual).norm() <= 1e-8 * (1 + r1.state.dual.norm()));
}

TEST_CASE("every method reaches the direct KKT solution") {
  const ProblemInstance inst = gen_random_quadratic(10, 4, 20.0, 20.0, 16);
  const PrimalDualPair star = solve_kkt_direct(inst);
  const SpectralBounds b = bounds_of(inst);
  StoppingRule stop;
  stop.max_iters = 50000;
  stop.kkt_tol = 1e-11;
  for (Method m : {Method::papc, Method::algo3, Method::algo1}) {
    const SolveResult r = solve(m, inst, default_params(m, inst, b), Vector::Zero(10), stop);
    CAPTURE(to_string(m));
    CHECK(r.reason == StopReason::kkt_tolerance);
    CHECK((r.state.x - star.x_star).norm() <= 1e-8);
  }
}

TEST_CASE("gradient and matvec accounting") {
  const ProblemInstance inst = gen_random_quadratic(10, 4, 10.0, 30.0, 17);
  const SpectralBounds b = bounds_of(inst);
  StoppingRule stop;
  stop.max_iters = 37;
  stop.kkt_tol = 1e-300;
  for (Method m : {Method::papc, Method::algo3, Method::algo1}) {
    const MethodParams prm = default_params(m, inst, b);
    const SolveResult r = solve(m, inst, prm, Vector::Zero(10), stop);
    CAPTURE(to_string(m));
    REQUIRE(r.state.k == 37);
    CHECK(r.state.grads == 37);
    REQUIRE(r.trace.size() == 38);
    const std::uint64_t per_k = m == Method::algo1 ? std::get<AccelParams>(prm).n_inner : 1;
    const std::uint64_t per_kt = m == Method::algo1 ? per_k : 2;
    CHECK(r.counters == CounterSnapshot{37 * per_k, 37 * per_kt});
    std::uint64_t sum_k = 0, sum_kt = 0;
    for (std::size_t i = 1; i < r.trace.size(); ++i) {
      sum_k += r.trace[i].matvecs_K - r.trace[i - 1].matvecs_K;
      sum_kt += r.trace[i].matvecs_Kt - r.trace[i - 1].matvecs_Kt;
      CHECK(r.trace[i].grads == r.trace[i - 1].grads + 1);
    }
    CHECK(CounterSnapshot{sum_k, sum_kt} == r.counters);
    CHECK(inst.constraint.map.counter_snapshot() == CounterSnapshot{0, 0});
  }
}

TEST_CASE("solve boundaries: zero iterations, start at the optimum, budgets") {
  const ProblemInstance zero = half_norm_instance(Eigen::MatrixXd::Ones(1, 3), Vector{{0.0}});
  const SpectralBounds b = bounds_of(zero);
  StoppingRule stop;
  stop.max_iters = 0;
  SolveResult r = solve(Method::algo1, zero, default_params(Method::algo1, zero, b), Vector::Ones(3), stop);
  CHECK(r.trace.empty());
  CHECK(r.state.x == Vector::Ones(3));

  stop.max_iters = 100;
  for (Method m : {Method::papc, Method::algo3, Method::algo1}) {
    r = solve(m, zero, default_params(m, zero, b), Vector::Zero(3), stop);
    CHECK(r.reason == StopReason::kkt_tolerance);
    CHECK(r.state.k == 0);
    CHECK(r.trace.size() == 1);
  }

  const ProblemInstance inst = gen_random_quadratic(10, 4, 10.0, 10.0, 18);
  stop.max_iters = 1000;
  stop.kkt_tol = 1e-300;
  stop.matvec_budget = 30;
  r = solve(Method::papc, inst, default_params(Method::papc, inst, bounds_of(inst)), Vector::Zero(10), stop);
  CHECK(r.reason == StopReason::matvec_budget);
  CHECK(r.counters.total() > 30);
  CHECK(r.counters.total() <= 33);
}

TEST_CASE("solve rejects bad input and trips the divergence guard") {
  const ProblemInstance inst = half_norm_instance(Eigen::MatrixXd::Ones(1, 2), Vector{{1.0}});
  const SpectralBounds b = bounds_of(inst);
  StoppingRule stop;
  CHECK_THROWS_AS(solve(Method::papc, inst, default_params(Method::algo3, inst, b), Vector::Zero(2), stop),
                  InputError);
  CHECK_THROWS_AS(solve(Method::papc, inst, default_params(Method::papc, inst, b), Vector::Zero(3), stop),
                  InputError);
  stop.check_every = 0;
  CHECK_THROWS_AS(solve(Method::papc, inst, default_params(Method::papc, inst, b), Vector::Zero(2), stop),
                  InputError);
  stop.check_every = 1;
  CHECK_THROWS_AS(solve(Method::papc, inst, PapcParams{1e6, 1.0}, Vector::Zero(2), stop), DivergenceError);
}

TEST_CASE("check_every delays the stopping test") {
  const ProblemInstance inst = gen_random_quadratic(8, 3, 4.0, 4.0, 19);
  const SpectralBounds b = bounds_of(inst);
  StoppingRule stop;
  stop.kkt_tol = 1e-8;
  stop.check_every = 25;
  const SolveResult r = solve(Method::algo3, inst, default_params(Method::algo3, inst, b), Vector::Zero(8), stop);
  CHECK(r.reason == StopReason::kkt_tolerance);
  CHECK(r.state.k % 25 == 0);
}

TEST_CASE("degenerate bounds use the W / lambda1 preconditioner") {
  // K with orthonormal rows scaled by 2: W has the single positive eigenvalue 4.
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(2, 4);
  k(0, 0) = 2.0;
  k(1, 2) = 2.0;
  const ProblemInstance inst = gen_random_quadratic(4, 2, 3.0, 1.0, 20);
  const ProblemInstance square(inst.objective, {InstrumentedMap(dense(k)), Vector{{1.0, -1.0}}});
  const SpectralBounds b = bounds_of(square);
  REQUIRE(b.degenerate());
  const PrimalDualPair star = solve_kkt_direct(square);
  StoppingRule stop;
  stop.kkt_tol = 1e-11;
  const SolveResult r = solve(Method::algo1, square, default_params(Method::algo1, square, b), Vector::Zero(4), stop);
  CHECK(r.reason == StopReason::kkt_tolerance);
  CHECK((r.state.x - star.x_star).norm() <= 1e-8);
  CHECK(r.counters.count_K == static_cast<std::uint64_t>(r.state.k));
}
