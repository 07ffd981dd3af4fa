#pragma once

#include <functional>

#include "affineopt/operators.hpp"

namespace affineopt {

inline constexpr double kDefaultRankTol = 1e-10;

/// λ1 ≥ λmax(W), 0 < λ2 ≤ λ⁺min(W), χ = λ1/λ2.
class SpectralBounds {
 public:
  SpectralBounds(double lambda1, double lambda2);

  double lambda1() const { return lambda1_; }
  double lambda2() const { return lambda2_; }
  double chi() const { return lambda1_ / lambda2_; }
  bool degenerate() const { return !(lambda1_ > lambda2_); }

 private:
  double lambda1_;
  double lambda2_;
};

/// Eigen-pairs of a symmetric PSD matrix, eigenvalues ascending.
struct Spectrum {
  Vector eigenvalues;
  Eigen::MatrixXd eigenvectors;  // columns

  Eigen::Index dim() const { return eigenvalues.size(); }
  double lambda_max() const { return eigenvalues(eigenvalues.size() - 1); }

  /// V diag(f(λ_i)) Vᵀ.
  Eigen::MatrixXd function_of(const std::function<double(double)>& f) const;
  /// Number of eigenvalues above rank_tol·λmax.
  Eigen::Index rank(double rank_tol = kDefaultRankTol) const;
  /// Orthogonal projector onto the span of eigenvectors with eigenvalue ≤ rank_tol·λmax.
  Eigen::MatrixXd kernel_projector(double rank_tol = kDefaultRankTol) const;
};

/// Full eigendecomposition of W = KᵀK, eigenvalues clamped to ≥ 0.
/// Reads the matrix directly; matvec counters are not touched.
Spectrum eigendecompose_gram(const DenseMatrix& K);
inline Spectrum eigendecompose_gram(const InstrumentedMap& map) { return eigendecompose_gram(map.matrix()); }

/// Throws DegenerateError when every eigenvalue is at or below rank_tol·λmax (K = 0).
SpectralBounds spectral_bounds(const Spectrum& spectrum, double rank_tol = kDefaultRankTol);

/// First-kind Chebyshev polynomial T_n(s) for any real s.
double chebyshev_t(int n, double s);

/// T̃_n(t) = T_n((λ1+λ2−2t)/(λ1−λ2)) / T_n((λ1+λ2)/(λ1−λ2)), so T̃_n(0) = 1.
double shifted_chebyshev_eval(int n, const SpectralBounds& bounds, double t);

/// 2ζⁿ/(1+ζ²ⁿ) with ζ = (√χ−1)/(√χ+1): the sup of |T̃_n| over [λ2, λ1].
double cheb_sup_bound(int n, double chi);

/// P(t) = 1 − T̃_n(t).
double precond_poly_eval(int n, const SpectralBounds& bounds, double t);

/// Explicit P(W) = V diag(P(λ_i)) Vᵀ.
DenseMatrix precond_matrix(int n, const SpectralBounds& bounds, const Spectrum& spectrum);

/// Smallest N with N ≥ √χ, allowing 1e-9 relative slack for rounding in χ.
int inner_iterations_for(double chi);

/// K K⁺ y computed from the eigendecomposition of K Kᵀ.
Vector project_onto_range(const DenseMatrix& K, const Vector& y, double rank_tol = kDefaultRankTol);

}  // namespace affineopt
