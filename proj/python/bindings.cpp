#include <limits>
#include <sstream>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "affineopt/chebyshev.hpp"
#include "affineopt/cli.hpp"
#include "affineopt/diagnostics.hpp"
#include "affineopt/errors.hpp"
#include "affineopt/experiments.hpp"
#include "affineopt/io.hpp"
#include "affineopt/solve.hpp"
#include "affineopt/spectral.hpp"

namespace py = pybind11;
using namespace affineopt;

namespace {

ProblemInstance make_instance(std::shared_ptr<const Objective> obj, const Eigen::MatrixXd& k, const Vector& b) {
  return ProblemInstance(std::move(obj), AffineConstraint{InstrumentedMap(DenseMatrix(RowMajorMatrix(k))), b});
}

py::dict trace_dict(const ConvergenceTrace& trace) {
  const auto n = static_cast<Eigen::Index>(trace.size());
  const double nan = std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd k(n), err(n), breg(n), lyap(n), stat(n), feas(n), grads(n), mk(n), mkt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& r = trace[static_cast<std::size_t>(i)];
    k(i) = static_cast<double>(r.k);
    err(i) = r.err_sq.value_or(nan);
    breg(i) = r.bregman_f.value_or(nan);
    lyap(i) = r.lyapunov.value_or(nan);
    stat(i) = r.kkt_stat;
    feas(i) = r.kkt_feas;
    grads(i) = static_cast<double>(r.grads);
    mk(i) = static_cast<double>(r.matvecs_K);
    mkt(i) = static_cast<double>(r.matvecs_Kt);
  }
  py::dict d;
  d["k"] = k;
  d["err_sq"] = err;
  d["bregman_f"] = breg;
  d["lyapunov"] = lyap;
  d["kkt_stat"] = stat;
  d["kkt_feas"] = feas;
  d["grads"] = grads;
  d["matvecs_K"] = mk;
  d["matvecs_Kt"] = mkt;
  return d;
}

}  // namespace

PYBIND11_MODULE(_affineopt, m) {
  m.doc() = "Accelerated primal-dual solvers for min F(x) subject to Kx = b";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<DegenerateError>(m, "DegenerateError", PyExc_RuntimeError);
  py::register_exception<UnsupportedOracleError>(m, "UnsupportedOracleError", PyExc_RuntimeError);
  py::register_exception<IndefiniteMetricError>(m, "IndefiniteMetricError", PyExc_RuntimeError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  py::class_<Objective, std::shared_ptr<Objective>>(m, "Objective")
      .def_property_readonly("dim", &Objective::dim)
      .def_property_readonly("mu", &Objective::mu)
      .def_property_readonly("lip", &Objective::lip)
      .def_property_readonly("kappa", &Objective::kappa)
      .def_property_readonly("kind", [](const Objective& o) { return std::string(o.kind()); })
      .def("value", &Objective::value)
      .def("gradient", &Objective::gradient);

  py::class_<QuadraticObjective, Objective, std::shared_ptr<QuadraticObjective>>(m, "QuadraticObjective")
      .def(py::init<Eigen::MatrixXd, Vector>(), py::arg("A"), py::arg("c"))
      .def(py::init<Eigen::MatrixXd, Vector, double, double>(), py::arg("A"), py::arg("c"), py::arg("mu"),
           py::arg("lip"));

  py::class_<SmoothedL1Objective, Objective, std::shared_ptr<SmoothedL1Objective>>(m, "SmoothedL1Objective")
      .def(py::init<Eigen::Index, double>(), py::arg("dim"), py::arg("e"))
      .def_property_readonly("e", &SmoothedL1Objective::smoothing);

  m.def("bregman", &bregman, py::arg("objective"), py::arg("x"), py::arg("x_ref"));

  py::class_<ProblemInstance>(m, "ProblemInstance")
      .def(py::init([](std::shared_ptr<Objective> obj, const Eigen::MatrixXd& k, const Vector& b) {
             return make_instance(std::move(obj), k, b);
           }),
           py::arg("objective"), py::arg("K"), py::arg("b"))
      .def_property_readonly("dim", &ProblemInstance::dim)
      .def_property_readonly("dual_dim", &ProblemInstance::dual_dim)
      .def_property_readonly("K", [](const ProblemInstance& i) { return Eigen::MatrixXd(i.K().entries()); })
      .def_property_readonly("b", [](const ProblemInstance& i) { return i.b(); })
      .def_property_readonly("objective",
                             [](const ProblemInstance& i) { return std::const_pointer_cast<Objective>(i.objective); });

  py::class_<PrimalDualPair>(m, "PrimalDualPair")
      .def_readonly("x_star", &PrimalDualPair::x_star)
      .def_readonly("y_star", &PrimalDualPair::y_star);

  m.def("solve_kkt_direct", &solve_kkt_direct, py::arg("instance"));
  m.def(
      "kkt_residual",
      [](const ProblemInstance& inst, const Vector& x, const Vector& y) {
        const auto r = kkt_residual(inst, x, y);
        return py::make_tuple(r.stationarity, r.feasibility);
      },
      py::arg("instance"), py::arg("x"), py::arg("y"));

  py::class_<SpectralBounds>(m, "SpectralBounds")
      .def(py::init<double, double>(), py::arg("lambda1"), py::arg("lambda2"))
      .def_property_readonly("lambda1", &SpectralBounds::lambda1)
      .def_property_readonly("lambda2", &SpectralBounds::lambda2)
      .def_property_readonly("chi", &SpectralBounds::chi);

  m.def(
      "eigendecompose_gram",
      [](const Eigen::MatrixXd& k) {
        const Spectrum s = eigendecompose_gram(DenseMatrix(RowMajorMatrix(k)));
        return py::make_tuple(s.eigenvalues, s.eigenvectors);
      },
      py::arg("K"));
  m.def(
      "spectral_bounds",
      [](const Eigen::MatrixXd& k, double rank_tol) {
        return spectral_bounds(eigendecompose_gram(DenseMatrix(RowMajorMatrix(k))), rank_tol);
      },
      py::arg("K"), py::arg("rank_tol") = kDefaultRankTol);
  m.def("shifted_chebyshev_eval", &shifted_chebyshev_eval, py::arg("n"), py::arg("bounds"), py::arg("t"));
  m.def("precond_poly_eval", &precond_poly_eval, py::arg("n"), py::arg("bounds"), py::arg("t"));
  m.def("cheb_sup_bound", &cheb_sup_bound, py::arg("n"), py::arg("chi"));
  m.def("inner_iterations_for", &inner_iterations_for, py::arg("chi"));
  m.def(
      "chebyshev_iterate",
      [](const Vector& z0, const Eigen::MatrixXd& k, const Vector& b, int n, const SpectralBounds& bounds) {
        InstrumentedMap map{DenseMatrix(RowMajorMatrix(k))};
        Vector z = chebyshev_iterate(z0, map, b, ChebyshevConfig(n, bounds));
        const auto c = map.counter_snapshot();
        return py::make_tuple(z, c.count_K, c.count_Kt);
      },
      py::arg("z0"), py::arg("K"), py::arg("b"), py::arg("n"), py::arg("bounds"));

  py::class_<PapcParams>(m, "PapcParams")
      .def(py::init<>())
      .def_readwrite("eta", &PapcParams::eta)
      .def_readwrite("theta", &PapcParams::theta);
  py::class_<AccelParams>(m, "AccelParams")
      .def(py::init<>())
      .def_readwrite("tau", &AccelParams::tau)
      .def_readwrite("eta", &AccelParams::eta)
      .def_readwrite("theta", &AccelParams::theta)
      .def_readwrite("alpha", &AccelParams::alpha)
      .def_readwrite("bounds", &AccelParams::bounds)
      .def_readwrite("n_inner", &AccelParams::n_inner);
  m.def("papc_default_params", &papc_default_params, py::arg("lip"), py::arg("bounds"));
  m.def("accel_params_prop1", &accel_params_prop1, py::arg("mu"), py::arg("lip"), py::arg("bounds"));
  m.def("accel_params_theorem2", &accel_params_theorem2, py::arg("mu"), py::arg("lip"), py::arg("bounds"));

  m.def(
      "solve",
      [](const std::string& method_name, const ProblemInstance& inst, std::optional<MethodParams> params,
         std::optional<Vector> x0, std::int64_t max_iters, double kkt_tol, int check_every, bool oracle) {
        const Method method = parse_method(method_name);
        const SpectralBounds bounds = spectral_bounds(eigendecompose_gram(inst.K()));
        const MethodParams prm = params ? *params : default_params(method, inst, bounds);
        StoppingRule stop;
        stop.max_iters = max_iters;
        stop.kkt_tol = kkt_tol;
        stop.check_every = check_every;
        TraceOptions opts;
        if (oracle) opts.oracle = reference_solution(inst, bounds);
        SolveResult res;
        {
          py::gil_scoped_release release;
          res = solve(method, inst, prm, x0 ? *x0 : Vector::Zero(inst.dim()), stop, opts);
        }
        py::dict out;
        out["x"] = res.state.x;
        out["x_f"] = res.state.x_f;
        out["dual"] = res.state.dual;
        out["iterations"] = res.state.k;
        out["grads"] = res.state.grads;
        out["matvecs_K"] = res.counters.count_K;
        out["matvecs_Kt"] = res.counters.count_Kt;
        out["kkt"] = py::make_tuple(res.final_kkt.stationarity, res.final_kkt.feasibility);
        out["converged"] = res.reason == StopReason::kkt_tolerance;
        out["trace"] = trace_dict(res.trace);
        if (opts.oracle) out["x_star"] = opts.oracle->x_star;
        return out;
      },
      py::arg("method"), py::arg("instance"), py::arg("params") = py::none(), py::arg("x0") = py::none(),
      py::arg("max_iters") = 10000, py::arg("kkt_tol") = 1e-10, py::arg("check_every") = 1,
      py::arg("oracle") = false);

  m.def("rate_prop1", [](double kappa, double chi) { return rate_prop1(kappa, chi).rate_inverse; },
        py::arg("kappa"), py::arg("chi"));
  m.def("rate_thm2", [](double kappa) { return rate_thm2(kappa).rate_inverse; }, py::arg("kappa"));

  m.def("e_from_kappa", &e_from_kappa, py::arg("kappa"));
  m.def("gen_random_quadratic", &gen_random_quadratic, py::arg("d"), py::arg("p"), py::arg("kappa"),
        py::arg("chi"), py::arg("seed"));
  m.def(
      "gen_compressed_sensing",
      [](Eigen::Index d, Eigen::Index p, Eigen::Index s, double chi, double e, std::uint64_t seed) {
        CsConfig cfg{d, p, s, chi, e, seed};
        auto cs = gen_compressed_sensing(cfg);
        return py::make_tuple(std::move(cs.instance), cs.x_sharp);
      },
      py::arg("d"), py::arg("p"), py::arg("s"), py::arg("chi"), py::arg("e"), py::arg("seed"));

  m.def("save_instance", &save_instance, py::arg("instance"), py::arg("dir"), py::arg("stem"));
  m.def("load_instance", &load_instance, py::arg("path"));

  m.def(
      "cli",
      [](std::vector<std::string> args) {
        std::ostringstream out, err;
        const int code = cli::run(std::move(args), out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
