#include "affineopt/diagnostics.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "affineopt/errors.hpp"

namespace affineopt {

namespace {

std::string cell(const std::optional<double>& v) { return v ? fmt::format("{:.17g}", *v) : std::string(); }

template <typename T>
T parse_field(std::string_view field, std::size_t line) {
  T value{};
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw InputError(fmt::format("trace line {}: cannot parse '{}'", line, field));
  }
  return value;
}

}  // namespace

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace) {
  out << kTraceHeader << '\n';
  for (const auto& r : trace) {
    out << fmt::format("{},{},{},{},{:.17g},{:.17g},{},{},{}\n", r.k, cell(r.err_sq), cell(r.bregman_f),
                       cell(r.lyapunov), r.kkt_stat, r.kkt_feas, r.grads, r.matvecs_K, r.matvecs_Kt);
  }
}

ConvergenceTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw InputError("trace CSV header mismatch");
  ConvergenceTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 9) throw InputError(fmt::format("trace line {}: expected 9 fields", line_no));
    auto opt = [&](std::string_view s) -> std::optional<double> {
      if (s.empty()) return std::nullopt;
      return parse_field<double>(s, line_no);
    };
    TraceRecord r;
    r.k = parse_field<std::int64_t>(f[0], line_no);
    r.err_sq = opt(f[1]);
    r.bregman_f = opt(f[2]);
    r.lyapunov = opt(f[3]);
    r.kkt_stat = parse_field<double>(f[4], line_no);
    r.kkt_feas = parse_field<double>(f[5], line_no);
    r.grads = parse_field<std::uint64_t>(f[6], line_no);
    r.matvecs_K = parse_field<std::uint64_t>(f[7], line_no);
    r.matvecs_Kt = parse_field<std::uint64_t>(f[8], line_no);
    trace.push_back(r);
  }
  return trace;
}

QMetric::QMetric(double eta, double theta, double alpha, const DenseMatrix& K, double lambda_max)
    : eta_(eta), theta_(theta), alpha_(alpha), K_(&K) {
  if (!(eta > 0.0) || !(theta > 0.0) || !(alpha >= 0.0)) throw InputError("Q metric needs eta, theta > 0, alpha >= 0");
  if (eta * theta * lambda_max > 1.0 + 1e-12) {
    throw IndefiniteMetricError(
        fmt::format("eta*theta*lambda_max(W) = {:.6g} exceeds 1; Q is not positive definite", eta * theta * lambda_max));
  }
}

double QMetric::norm_sq(const Vector& x, const Vector& y) const {
  if (x.size() != K_->cols() || y.size() != K_->rows()) throw InputError("q_norm_sq: dimension mismatch");
  const double kty = (K_->entries().transpose() * y).squaredNorm();
  return x.squaredNorm() / eta_ + y.squaredNorm() / theta_ - eta_ / (1.0 + eta_ * alpha_) * kty;
}

double q_norm_sq(double eta, double theta, double alpha, const DenseMatrix& K, const Vector& x, const Vector& y) {
  return QMetric(eta, theta, alpha, K, eigendecompose_gram(K).lambda_max()).norm_sq(x, y);
}

double lyapunov(const SolverState& s, const PrimalDualPair& star, const Objective& obj, const QMetric& metric,
                double tau) {
  const double q = metric.norm_sq(s.x - star.x_star, s.dual - star.y_star);
  if (tau >= 1.0) return q;
  return q + 2.0 * (1.0 - tau) / tau * bregman(obj, s.x_f, star.x_star);
}

PreconditionedReference::PreconditionedReference(const ProblemInstance& inst, const Spectrum& spectrum,
                                                 const AccelParams& params, const Vector& x_star, double rank_tol)
    : objective_(inst.objective), params_(params), basis_(spectrum.eigenvectors), x_star_(x_star) {
  if (x_star.size() != inst.dim() || spectrum.dim() != inst.dim()) {
    throw InputError("PreconditionedReference: dimension mismatch");
  }
  const double cutoff = rank_tol * spectrum.lambda_max();
  p_eigs_.resize(spectrum.dim());
  for (Eigen::Index i = 0; i < spectrum.dim(); ++i) {
    const double t = spectrum.eigenvalues(i);
    if (t <= cutoff) {
      p_eigs_(i) = 0.0;
    } else if (params.bounds.degenerate()) {
      p_eigs_(i) = t / params.bounds.lambda1();
    } else {
      p_eigs_(i) = precond_poly_eval(params.n_inner, params.bounds, t);
    }
  }
  u_star_ = -objective_->gradient(x_star);
}

double PreconditionedReference::precond_lambda_min_plus() const {
  double m = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < p_eigs_.size(); ++i) {
    if (p_eigs_(i) > 0.0) m = std::min(m, p_eigs_(i));
  }
  return m;
}

double PreconditionedReference::dual_norm_sq(const Vector& u) const {
  const Vector coeffs = basis_.transpose() * u;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < coeffs.size(); ++i) {
    if (p_eigs_(i) > 0.0) acc += coeffs(i) * coeffs(i) / p_eigs_(i);
  }
  return acc;
}

double PreconditionedReference::lyapunov(const SolverState& s) const {
  const double eta = params_.eta, theta = params_.theta, alpha = params_.alpha, tau = params_.tau;
  const Vector du = s.dual - u_star_;
  // ‖Kᵀy'‖² with K = √P and u = √P y' is just ‖u‖².
  double psi = (s.x - x_star_).squaredNorm() / eta + dual_norm_sq(du) / theta - eta / (1.0 + eta * alpha) * du.squaredNorm();
  if (tau < 1.0) psi += 2.0 * (1.0 - tau) / tau * bregman(*objective_, s.x_f, x_star_);
  return psi;
}

double PreconditionedReference::envelope_lhs(const SolverState& s) const {
  const double tau = params_.tau;
  double v = (s.x - x_star_).squaredNorm() / params_.eta;
  if (tau < 1.0) v += 2.0 * (1.0 - tau) / tau * bregman(*objective_, s.x_f, x_star_);
  return v;
}

double PreconditionedReference::envelope_constant(const Vector& x0) const {
  const double tau = params_.tau;
  double c = (x0 - x_star_).squaredNorm() / params_.eta + dual_norm_sq(u_star_) / params_.theta;
  if (tau < 1.0) c += 2.0 * (1.0 - tau) / tau * bregman(*objective_, x0, x_star_);
  return c;
}

RateCertificate rate_prop1(double kappa, double chi) {
  if (!(kappa >= 1.0) || !(chi >= 1.0)) throw InputError("rate_prop1 needs kappa, chi >= 1");
  const double m = std::min(1.0 / std::sqrt(kappa * chi), 1.0 / chi);
  return {1.0 / (1.0 + 0.25 * m), RateSource::prop1};
}

RateCertificate rate_thm2(double kappa) {
  if (!(kappa >= 1.0)) throw InputError("rate_thm2 needs kappa >= 1");
  const double m = std::min(15.0 / 19.0, std::sqrt(15.0 / (19.0 * kappa)));
  return {1.0 / (1.0 + 0.25 * m), RateSource::thm2};
}

RateCertificate rate_lemma2(double mu, double lip, const SpectralBounds& bounds) {
  const double ratio = bounds.lambda2() / bounds.lambda1();
  const double m = std::min(std::sqrt(mu / lip * ratio), ratio);
  return {1.0 / (1.0 + 0.25 * m), RateSource::lemma2};
}

ContractionReport contraction_check(std::span<const double> psi, const RateCertificate& cert, double slack) {
  ContractionReport rep;
  for (std::size_t k = 0; k + 1 < psi.size(); ++k) {
    const double bound = cert.rate_inverse * psi[k];
    if (bound > 0.0) rep.worst_ratio = std::max(rep.worst_ratio, psi[k + 1] / bound);
    if (psi[k + 1] > bound * (1.0 + slack)) {
      if (rep.ok) rep.first_violation = k;
      rep.ok = false;
    }
  }
  return rep;
}

}  // namespace affineopt
