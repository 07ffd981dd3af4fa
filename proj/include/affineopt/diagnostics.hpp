#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "affineopt/solvers.hpp"
#include "affineopt/spectral.hpp"

namespace affineopt {

/// One row of a convergence trace. Optional columns need an oracle solution.
struct TraceRecord {
  std::int64_t k = 0;
  std::optional<double> err_sq;     ///< ‖xᵏ − x⋆‖²
  std::optional<double> bregman_f;  ///< D_F(x_fᵏ, x⋆)
  std::optional<double> lyapunov;   ///< Ψᵏ
  double kkt_stat = 0.0;
  double kkt_feas = 0.0;
  std::uint64_t grads = 0;
  std::uint64_t matvecs_K = 0;
  std::uint64_t matvecs_Kt = 0;

  std::uint64_t matvecs() const { return matvecs_K + matvecs_Kt; }
};

using ConvergenceTrace = std::vector<TraceRecord>;

inline constexpr std::string_view kTraceHeader =
    "k,err_sq,bregman_f,lyapunov,kkt_stat,kkt_feas,grads,matvecs_K,matvecs_Kt";

void write_trace_csv(std::ostream& out, const ConvergenceTrace& trace);
ConvergenceTrace read_trace_csv(std::istream& in);

/**
 * @brief The metric ‖(x, y)‖²_Q = (1/η)‖x‖² + (1/θ)‖y‖² − (η/(1+ηα))‖Kᵀy‖².
 *
 * Construction checks ηθλmax(W) ≤ 1 (with 1e-12 relative slack), the
 * condition under which Q is positive definite; otherwise it throws
 * IndefiniteMetricError.
 */
class QMetric {
 public:
  QMetric(double eta, double theta, double alpha, const DenseMatrix& K, double lambda_max);

  double norm_sq(const Vector& x, const Vector& y) const;

 private:
  double eta_, theta_, alpha_;
  const DenseMatrix* K_;
};

/// Convenience form that computes λmax(W) itself.
double q_norm_sq(double eta, double theta, double alpha, const DenseMatrix& K, const Vector& x, const Vector& y);

/// Ψ = ‖(x − x⋆, y − y⋆)‖²_Q + (2(1−τ)/τ) D_F(x_f, x⋆) for an algo3 state.
double lyapunov(const SolverState& state, const PrimalDualPair& star, const Objective& obj, const QMetric& metric,
                double tau);

/**
 * @brief Diagnostics for algo1 in the preconditioned problem, where K is
 * replaced by √P(W) and the dual variable is y' = (√P(W))⁺u.
 *
 * Built once from the dense spectrum of W; every evaluation is then a few
 * matrix-vector products with the eigenvector basis.
 */
class PreconditionedReference {
 public:
  PreconditionedReference(const ProblemInstance& inst, const Spectrum& spectrum, const AccelParams& params,
                          const Vector& x_star, double rank_tol = kDefaultRankTol);

  const Vector& x_star() const { return x_star_; }
  /// u⋆ = −∇F(x⋆).
  const Vector& u_star() const { return u_star_; }
  /// Eigenvalues P(λ_i) of P(W) (zero on ker W).
  const Vector& precond_eigenvalues() const { return p_eigs_; }
  double precond_lambda_max() const { return p_eigs_.maxCoeff(); }
  double precond_lambda_min_plus() const;

  /// ‖y'‖² for y' = (√P)⁺u, i.e. uᵀP⁺u.
  double dual_norm_sq(const Vector& u) const;

  /// Ψ in the preconditioned problem.
  double lyapunov(const SolverState& state) const;
  /// (1/η)‖x − x⋆‖² + (2(1−τ)/τ) D_F(x_f, x⋆), the quantity bounded by the envelope.
  double envelope_lhs(const SolverState& state) const;
  /// The envelope constant C0 for x0 with y'0 = 0.
  double envelope_constant(const Vector& x0) const;

 private:
  std::shared_ptr<const Objective> objective_;
  AccelParams params_;
  Eigen::MatrixXd basis_;
  Vector p_eigs_;
  Vector x_star_;
  Vector u_star_;
};

enum class RateSource { prop1, thm2, lemma2 };

struct RateCertificate {
  double rate_inverse = 1.0;
  RateSource source = RateSource::prop1;
};

/// (1 + ¼min{1/√(κχ), 1/χ})⁻¹.
RateCertificate rate_prop1(double kappa, double chi);
/// (1 + ¼min{15/19, √(15/(19κ))})⁻¹.
RateCertificate rate_thm2(double kappa);
/// (1 + ¼min{√(μλ2/(Lλ1)), λ2/λ1})⁻¹; identical in value to rate_prop1(L/μ, λ1/λ2).
RateCertificate rate_lemma2(double mu, double lip, const SpectralBounds& bounds);

struct ContractionReport {
  bool ok = true;
  std::optional<std::size_t> first_violation;  ///< index k with Ψ^{k+1} > bound
  double worst_ratio = 0.0;                    ///< max over k of Ψ^{k+1} / (rate·Ψᵏ)
};

/// True iff Ψ^{k+1} ≤ rate_inverse·Ψᵏ·(1 + slack) for every k.
ContractionReport contraction_check(std::span<const double> psi, const RateCertificate& cert, double slack = 1e-9);

}  // namespace affineopt
