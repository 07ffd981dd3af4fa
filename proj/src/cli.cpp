#include "affineopt/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "affineopt/errors.hpp"
#include "affineopt/experiments.hpp"
#include "affineopt/io.hpp"
#include "affineopt/solve.hpp"
#include "affineopt/spectral.hpp"

namespace affineopt::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

bool has_flag(const std::vector<std::string>& args, const std::string& flag) {
  return std::any_of(args.begin(), args.end(),
                     [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
}

// Flags from a --config JSON object are appended unless given on the command line.
void merge_config(std::vector<std::string>& args) {
  auto it = std::find(args.begin(), args.end(), "--config");
  if (it == args.end()) return;
  if (std::next(it) == args.end()) throw InputError("--config needs a path");
  const std::string path = *std::next(it);
  args.erase(it, std::next(it, 2));

  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open config {}", path));
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(fmt::format("config {}: {}", path, e.what()));
  }
  if (!cfg.is_object()) throw InputError("config must be a JSON object");
  for (const auto& [key, value] : cfg.items()) {
    const std::string flag = "--" + key;
    if (has_flag(args, flag)) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back(flag);
    } else if (value.is_string()) {
      args.push_back(flag);
      args.push_back(value.get<std::string>());
    } else if (value.is_number()) {
      args.push_back(flag);
      args.push_back(value.dump());
    } else if (value.is_array()) {
      std::string joined;
      for (const auto& v : value) {
        if (!joined.empty()) joined += ',';
        joined += v.is_string() ? v.get<std::string>() : v.dump();
      }
      args.push_back(flag);
      args.push_back(joined);
    } else {
      throw InputError(fmt::format("config key '{}' has unsupported type", key));
    }
  }
}

json params_json(const MethodParams& params) {
  if (const auto* p = std::get_if<PapcParams>(&params)) return {{"eta", p->eta}, {"theta", p->theta}};
  const auto& a = std::get<AccelParams>(params);
  return {{"tau", a.tau},
          {"eta", a.eta},
          {"theta", a.theta},
          {"alpha", a.alpha},
          {"lambda1", a.bounds.lambda1()},
          {"lambda2", a.bounds.lambda2()},
          {"N", a.n_inner}};
}

std::string_view reason_name(StopReason r) {
  switch (r) {
    case StopReason::kkt_tolerance: return "kkt_tolerance";
    case StopReason::max_iters: return "max_iters";
    case StopReason::matvec_budget: return "matvec_budget";
  }
  return "unknown";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  out << text;
}

void write_trace_file(const fs::path& path, const ConvergenceTrace& trace) {
  std::ofstream out(path);
  if (!out) throw InputError(fmt::format("cannot write {}", path.string()));
  write_trace_csv(out, trace);
}

struct GenOptions {
  long long d = 0, p = 0, s = 0;
  double chi = 1.0, kappa = 1.0;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string name = "instance";
};

struct SolveOptions {
  std::string instance;
  std::string method;
  long long max_iters = 100000;
  double tol = 1e-10;
  int check_every = 1;
  std::string out = ".";
  bool oracle = false;
  std::optional<double> tau, eta, theta, alpha;
  std::optional<int> n_inner;
};

struct CompareOptions {
  std::string instance;
  std::string methods;
  std::uint64_t budget = 100000;
  std::string out = ".";
};

struct SpectralOptions {
  std::string instance;
  double rank_tol = kDefaultRankTol;
};

int cmd_gen(const std::string& kind, const GenOptions& o, std::ostream& out) {
  std::optional<ProblemInstance> inst;
  json config = {{"kind", kind}, {"d", o.d}, {"p", o.p}, {"chi", o.chi}, {"kappa", o.kappa}, {"seed", o.seed}};
  json extra = json::object();
  if (kind == "cs") {
    CsConfig cfg;
    cfg.d = o.d;
    cfg.p = o.p;
    cfg.sparsity = o.s;
    cfg.chi_target = o.chi;
    cfg.e = e_from_kappa(o.kappa);
    cfg.seed = o.seed;
    config["s"] = o.s;
    config["e"] = cfg.e;
    auto cs = gen_compressed_sensing(cfg);
    std::vector<Eigen::Index> support;
    for (Eigen::Index i = 0; i < cs.x_sharp.size(); ++i)
      if (cs.x_sharp(i) != 0.0) support.push_back(i);
    extra["x_sharp_support"] = support;
    inst.emplace(std::move(cs.instance));
  } else {
    inst.emplace(gen_random_quadratic(o.d, o.p, o.kappa, o.chi, o.seed));
  }

  const fs::path json_path = save_instance(*inst, o.out, o.name);
  const SpectralBounds bounds = spectral_bounds(eigendecompose_gram(inst->K()));
  double kappa_measured = inst->objective->kappa();
  if (const auto* q = dynamic_cast<const QuadraticObjective*>(inst->objective.get())) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q->hessian(), Eigen::EigenvaluesOnly);
    kappa_measured = es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
  }
  json manifest = {{"config", config},
                   {"files", {{"instance", json_path.string()}, {"matrix", (fs::path(o.out) / (o.name + "_K.csv")).string()}}},
                   {"measured",
                    {{"chi", bounds.chi()},
                     {"kappa", kappa_measured},
                     {"lambda_max", bounds.lambda1()},
                     {"lambda_min_plus", bounds.lambda2()},
                     {"rhs_range_residual", rhs_range_residual(*inst)}}}};
  manifest.update(extra);
  out << manifest.dump(2) << '\n';
  return kExitOk;
}

MethodParams apply_overrides(Method method, MethodParams params, const SolveOptions& o, bool& overridden) {
  overridden = o.tau || o.eta || o.theta || o.alpha || o.n_inner;
  if (auto* p = std::get_if<PapcParams>(&params)) {
    if (o.tau || o.alpha || o.n_inner) throw InputError("papc accepts only --eta and --theta overrides");
    if (o.eta) p->eta = *o.eta;
    if (o.theta) p->theta = *o.theta;
    if (!(p->eta > 0.0) || !(p->theta > 0.0)) throw InputError("eta and theta must be positive");
    return params;
  }
  auto& a = std::get<AccelParams>(params);
  if (o.n_inner && method != Method::algo1) throw InputError("--N applies to algo1 only");
  if (o.tau) a.tau = *o.tau;
  if (o.eta) a.eta = *o.eta;
  if (o.theta) a.theta = *o.theta;
  if (o.alpha) a.alpha = *o.alpha;
  if (o.n_inner) a.n_inner = *o.n_inner;
  if (!(a.tau > 0.0 && a.tau <= 1.0)) throw InputError("tau must lie in (0, 1]");
  if (!(a.eta > 0.0) || !(a.theta > 0.0) || !(a.alpha >= 0.0)) throw InputError("eta, theta must be positive and alpha >= 0");
  if (method == Method::algo1 && a.n_inner < 1) throw InputError("N must be >= 1");
  return params;
}

int cmd_solve(const SolveOptions& o, std::ostream& out) {
  const Method method = parse_method(o.method);
  const ProblemInstance inst = load_instance(o.instance);
  const SpectralBounds bounds = spectral_bounds(eigendecompose_gram(inst.K()));
  bool overridden = false;
  const MethodParams params = apply_overrides(method, default_params(method, inst, bounds), o, overridden);

  StoppingRule stop;
  stop.max_iters = o.max_iters;
  stop.kkt_tol = o.tol;
  stop.check_every = o.check_every;
  TraceOptions topts;
  if (o.oracle) topts.oracle = reference_solution(inst, bounds);

  const SolveResult res = solve(method, inst, params, Vector::Zero(inst.dim()), stop, topts);

  fs::create_directories(o.out);
  const std::string stem(to_string(method));
  write_trace_file(fs::path(o.out) / (stem + "_trace.csv"), res.trace);

  json summary = {{"method", stem},
                  {"params", params_json(params)},
                  {"default_params", !overridden},
                  {"iterations", res.state.k},
                  {"grads", res.state.grads},
                  {"matvecs_K", res.counters.count_K},
                  {"matvecs_Kt", res.counters.count_Kt},
                  {"stop_reason", reason_name(res.reason)},
                  {"final_kkt", {{"stationarity", res.final_kkt.stationarity}, {"feasibility", res.final_kkt.feasibility}}}};
  if (topts.oracle) summary["err_sq"] = (res.state.x - topts.oracle->x_star).squaredNorm();
  write_text(fs::path(o.out) / (stem + "_summary.json"), summary.dump(2) + "\n");
  out << summary.dump(2) << '\n';
  return kExitOk;
}

int cmd_compare(const CompareOptions& o, std::ostream& out) {
  std::vector<Method> methods;
  std::stringstream ss(o.methods);
  for (std::string name; std::getline(ss, name, ',');) {
    if (name.empty()) continue;
    const Method m = parse_method(name);
    if (std::find(methods.begin(), methods.end(), m) != methods.end()) {
      throw InputError(fmt::format("method '{}' listed twice", name));
    }
    methods.push_back(m);
  }
  if (methods.size() < 2) throw InputError("compare needs at least two methods");

  const ProblemInstance inst = load_instance(o.instance);
  const SpectralBounds bounds = spectral_bounds(eigendecompose_gram(inst.K()));
  const PrimalDualPair oracle = reference_solution(inst, bounds);
  const auto runs = run_comparison(inst, methods, o.budget, oracle, bounds);

  fs::create_directories(o.out);
  std::ostringstream by_matvec, by_grad;
  by_matvec << "method,matvecs,err_sq\n";
  by_grad << "method,grads,err_sq\n";
  json entries = json::array();
  for (const auto& run : runs) {
    const std::string name(to_string(run.method));
    write_trace_file(fs::path(o.out) / (name + "_trace.csv"), run.result.trace);
    for (const auto& r : run.result.trace) {
      by_matvec << fmt::format("{},{},{:.17g}\n", name, r.matvecs(), *r.err_sq);
      by_grad << fmt::format("{},{},{:.17g}\n", name, r.grads, *r.err_sq);
    }
    json e = {{"method", name},
              {"params", params_json(run.params)},
              {"iterations", run.result.state.k},
              {"grads", run.result.state.grads},
              {"matvecs_K", run.result.counters.count_K},
              {"matvecs_Kt", run.result.counters.count_Kt},
              {"final_kkt",
               {{"stationarity", run.result.final_kkt.stationarity}, {"feasibility", run.result.final_kkt.feasibility}}},
              {"final_err_sq", (run.result.state.x - oracle.x_star).squaredNorm()}};
    if (auto hit = first_reaching(run.result.trace, 1e-8)) {
      e["matvecs_to_1e-8"] = hit->matvecs();
      e["grads_to_1e-8"] = hit->grads;
    } else {
      e["matvecs_to_1e-8"] = nullptr;
      e["grads_to_1e-8"] = nullptr;
    }
    entries.push_back(e);
  }
  write_text(fs::path(o.out) / "err_vs_matvec.csv", by_matvec.str());
  write_text(fs::path(o.out) / "err_vs_grad.csv", by_grad.str());
  json manifest = {{"instance", o.instance},
                   {"budget", o.budget},
                   {"chi", bounds.chi()},
                   {"kappa", inst.objective->kappa()},
                   {"methods", entries}};
  write_text(fs::path(o.out) / "manifest.json", manifest.dump(2) + "\n");
  out << manifest.dump(2) << '\n';
  return kExitOk;
}

int cmd_spectral(const SpectralOptions& o, std::ostream& out) {
  const ProblemInstance inst = load_instance(o.instance);
  const Spectrum spectrum = eigendecompose_gram(inst.K());
  const SpectralBounds bounds = spectral_bounds(spectrum, o.rank_tol);
  json doc = {{"lambda_max", bounds.lambda1()},
              {"lambda_min_plus", bounds.lambda2()},
              {"chi", bounds.chi()},
              {"rank", spectrum.rank(o.rank_tol)},
              {"dim", spectrum.dim()}};
  out << doc.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"affineopt: accelerated primal-dual solvers for min F(x) s.t. Kx = b"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate a problem instance");
  gen_cmd->require_subcommand(1);
  auto add_common_gen = [&](CLI::App* sub, bool with_sparsity) {
    sub->add_option("--d", gen.d, "Primal dimension")->required()->check(CLI::PositiveNumber);
    sub->add_option("--p", gen.p, "Number of constraints")->required()->check(CLI::PositiveNumber);
    if (with_sparsity) sub->add_option("--s", gen.s, "Nonzeros in x_sharp")->required()->check(CLI::PositiveNumber);
    sub->add_option("--chi", gen.chi, "Target condition number of KᵀK")->required();
    sub->add_option("--kappa", gen.kappa, "Target condition number of F")->required();
    sub->add_option("--seed", gen.seed, "Random seed (falls back to AFFINEOPT_SEED)");
    sub->add_option("--out", gen.out, "Output directory");
    sub->add_option("--name", gen.name, "File stem");
  };
  auto* gen_cs = gen_cmd->add_subcommand("cs", "Compressed-sensing instance with smoothed l1 objective");
  add_common_gen(gen_cs, true);
  auto* gen_quad = gen_cmd->add_subcommand("quad", "Random strongly convex quadratic instance");
  add_common_gen(gen_quad, false);

  SolveOptions sol;
  auto* solve_cmd = app.add_subcommand("solve", "Run one method and write its trace");
  solve_cmd->add_option("--instance", sol.instance, "Instance JSON")->required();
  solve_cmd->add_option("--method", sol.method, "papc | algo3 | algo1")->required();
  solve_cmd->add_option("--max-iters", sol.max_iters, "Iteration cap")->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--tol", sol.tol, "KKT residual tolerance")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--check-every", sol.check_every, "Stopping-check period")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--out", sol.out, "Output directory");
  solve_cmd->add_flag("--oracle", sol.oracle, "Compute a reference solution and trace the error");
  solve_cmd->add_option("--tau", sol.tau);
  solve_cmd->add_option("--eta", sol.eta);
  solve_cmd->add_option("--theta", sol.theta);
  solve_cmd->add_option("--alpha", sol.alpha);
  solve_cmd->add_option("--N", sol.n_inner, "Chebyshev degree (algo1)");

  CompareOptions cmp;
  auto* compare_cmd = app.add_subcommand("compare", "Run several methods under a shared matvec budget");
  compare_cmd->add_option("--instance", cmp.instance, "Instance JSON")->required();
  compare_cmd->add_option("--methods", cmp.methods, "Comma-separated list, at least two")->required();
  compare_cmd->add_option("--budget", cmp.budget, "Matvec budget per method");
  compare_cmd->add_option("--out", cmp.out, "Output directory");

  SpectralOptions spec;
  auto* spectral_cmd = app.add_subcommand("spectral", "Print spectral bounds of KᵀK");
  spectral_cmd->add_option("--instance", spec.instance, "Instance JSON")->required();
  spectral_cmd->add_option("--rank-tol", spec.rank_tol, "Relative rank tolerance");

  try {
    merge_config(args);
    if (!has_flag(args, "--seed") && !args.empty() && args.front() == "gen") {
      if (const char* env = std::getenv("AFFINEOPT_SEED")) {
        args.push_back("--seed");
        args.push_back(env);
      }
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*gen_cs) return cmd_gen("cs", gen, out);
    if (*gen_quad) return cmd_gen("quad", gen, out);
    if (*solve_cmd) return cmd_solve(sol, out);
    if (*compare_cmd) return cmd_compare(cmp, out);
    if (*spectral_cmd) return cmd_spectral(spec, out);
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const UnsupportedOracleError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DivergenceError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}

}  // namespace affineopt::cli
