#include "affineopt/spectral.hpp"

#include <cmath>

#include <fmt/format.h>

#include "affineopt/errors.hpp"

namespace affineopt {

namespace {

// 1/cosh(x) for x ≥ 0 without overflow.
double sech(double x) {
  const double e = std::exp(-x);
  return 2.0 * e / (1.0 + e * e);
}

Eigen::MatrixXd symmetric_eigenvectors(const Eigen::MatrixXd& m, Vector& eigenvalues) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) {
    throw DegenerateError("symmetric eigendecomposition did not converge");
  }
  eigenvalues = solver.eigenvalues().cwiseMax(0.0);
  return solver.eigenvectors();
}

}  // namespace

SpectralBounds::SpectralBounds(double lambda1, double lambda2) : lambda1_(lambda1), lambda2_(lambda2) {
  if (!(lambda2 > 0.0) || !(lambda1 >= lambda2) || !std::isfinite(lambda1)) {
    throw InputError(fmt::format("spectral bounds need lambda1 >= lambda2 > 0, got ({}, {})", lambda1, lambda2));
  }
}

Eigen::MatrixXd Spectrum::function_of(const std::function<double(double)>& f) const {
  Vector diag(eigenvalues.size());
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) diag(i) = f(eigenvalues(i));
  return eigenvectors * diag.asDiagonal() * eigenvectors.transpose();
}

Eigen::Index Spectrum::rank(double rank_tol) const {
  const double cutoff = rank_tol * lambda_max();
  return (eigenvalues.array() > cutoff).count();
}

Eigen::MatrixXd Spectrum::kernel_projector(double rank_tol) const {
  const double cutoff = rank_tol * lambda_max();
  return function_of([cutoff](double t) { return t > cutoff ? 0.0 : 1.0; });
}

Spectrum eigendecompose_gram(const DenseMatrix& K) {
  if (K.cols() > 2000) {
    throw InputError(fmt::format("dense eigendecomposition limited to d <= 2000, got {}", K.cols()));
  }
  const Eigen::MatrixXd k = K.entries();
  Eigen::MatrixXd w = k.transpose() * k;
  w = 0.5 * (w + w.transpose()).eval();
  Spectrum s;
  s.eigenvectors = symmetric_eigenvectors(w, s.eigenvalues);
  return s;
}

SpectralBounds spectral_bounds(const Spectrum& spectrum, double rank_tol) {
  const double lmax = spectrum.lambda_max();
  if (!(lmax > 0.0)) {
    throw DegenerateError("W = KᵀK is zero; K must be nonzero");
  }
  const double cutoff = rank_tol * lmax;
  for (Eigen::Index i = 0; i < spectrum.eigenvalues.size(); ++i) {
    if (spectrum.eigenvalues(i) > cutoff) return SpectralBounds(lmax, spectrum.eigenvalues(i));
  }
  throw DegenerateError("no eigenvalue of W above the rank tolerance");
}

double chebyshev_t(int n, double s) {
  if (n < 0) throw InputError("Chebyshev degree must be nonnegative");
  if (std::abs(s) <= 1.0) {
    double prev = 1.0, cur = s;
    if (n == 0) return prev;
    for (int k = 1; k < n; ++k) {
      const double next = 2.0 * s * cur - prev;
      prev = cur;
      cur = next;
    }
    return cur;
  }
  const double magnitude = std::cosh(n * std::acosh(std::abs(s)));
  return (s < 0.0 && n % 2 == 1) ? -magnitude : magnitude;
}

double shifted_chebyshev_eval(int n, const SpectralBounds& bounds, double t) {
  if (n < 1) throw InputError("shifted Chebyshev degree must be >= 1");
  if (bounds.degenerate()) {
    throw DegenerateError("shifted Chebyshev polynomial undefined for lambda1 == lambda2");
  }
  const double l1 = bounds.lambda1(), l2 = bounds.lambda2();
  const double spread = l1 - l2;
  const double outer = std::acosh((l1 + l2) / spread);
  const double s = (l1 + l2 - 2.0 * t) / spread;

  if (std::abs(s) <= 1.0) return chebyshev_t(n, s) * sech(n * outer);

  // Ratio of two cosh values, formed in log space so large n·acosh does not overflow.
  const double inner = std::acosh(std::abs(s));
  const double sign = (s < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
  const double ratio = std::exp(n * (inner - outer)) * (1.0 + std::exp(-2.0 * n * inner)) /
                       (1.0 + std::exp(-2.0 * n * outer));
  return sign * ratio;
}

double cheb_sup_bound(int n, double chi) {
  if (n < 1) throw InputError("degree must be >= 1");
  if (!(chi >= 1.0)) throw InputError("chi must be >= 1");
  const double root = std::sqrt(chi);
  const double zeta = (root - 1.0) / (root + 1.0);
  const double zn = std::pow(zeta, n);
  return 2.0 * zn / (1.0 + zn * zn);
}

double precond_poly_eval(int n, const SpectralBounds& bounds, double t) {
  return 1.0 - shifted_chebyshev_eval(n, bounds, t);
}

DenseMatrix precond_matrix(int n, const SpectralBounds& bounds, const Spectrum& spectrum) {
  Eigen::MatrixXd p = spectrum.function_of([&](double t) { return precond_poly_eval(n, bounds, t); });
  return DenseMatrix(RowMajorMatrix(p));
}

int inner_iterations_for(double chi) {
  if (!(chi >= 1.0)) throw InputError("chi must be >= 1");
  return std::max(1, static_cast<int>(std::ceil(std::sqrt(chi) * (1.0 - 1e-9))));
}

Vector project_onto_range(const DenseMatrix& K, const Vector& y, double rank_tol) {
  if (y.size() != K.rows()) {
    throw InputError(fmt::format("project_onto_range: expected length {}, got {}", K.rows(), y.size()));
  }
  const Eigen::MatrixXd k = K.entries();
  Eigen::MatrixXd kkt = k * k.transpose();
  kkt = 0.5 * (kkt + kkt.transpose()).eval();
  Vector evals;
  const Eigen::MatrixXd evecs = symmetric_eigenvectors(kkt, evals);
  const double cutoff = rank_tol * evals.maxCoeff();
  Vector out = Vector::Zero(y.size());
  for (Eigen::Index i = 0; i < evals.size(); ++i) {
    if (evals(i) > cutoff) out += evecs.col(i) * evecs.col(i).dot(y);
  }
  return out;
}

}  // namespace affineopt
