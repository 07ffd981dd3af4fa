#pragma once

// Test-only oracles. Each one recomputes a quantity by a route that shares
// no code with the library: naive loops, explicit block assembly, the
// trigonometric form of Chebyshev polynomials, finite differences.

#include <cmath>
#include <functional>
#include <random>

#include <Eigen/Dense>

#include "affineopt/problem.hpp"

namespace testsupport {

using affineopt::Vector;

inline Eigen::MatrixXd random_matrix(std::mt19937_64& gen, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = nd(gen);
  return m;
}

inline Vector random_vector(std::mt19937_64& gen, Eigen::Index n) {
  std::normal_distribution<double> nd;
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = nd(gen);
  return v;
}

inline affineopt::DenseMatrix dense(const Eigen::MatrixXd& m) {
  return affineopt::DenseMatrix(affineopt::RowMajorMatrix(m));
}

inline double rel_err(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

inline Vector naive_matvec(const Eigen::MatrixXd& k, const Vector& x) {
  Vector out = Vector::Zero(k.rows());
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j) out(i) += k(i, j) * x(j);
  return out;
}

inline Eigen::MatrixXd naive_gram(const Eigen::MatrixXd& k) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k.cols(), k.cols());
  for (Eigen::Index i = 0; i < k.cols(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j)
      for (Eigen::Index r = 0; r < k.rows(); ++r) w(i, j) += k(r, i) * k(r, j);
  return w;
}

// T_n via cos(n·acos s) / cosh(n·acosh s), valid for the sizes used in tests.
inline double cheb_trig(int n, double s) {
  if (std::abs(s) <= 1.0) return std::cos(n * std::acos(s));
  const double v = std::cosh(n * std::acosh(std::abs(s)));
  return (s < 0 && n % 2 == 1) ? -v : v;
}

inline double shifted_cheb_trig(int n, double l1, double l2, double t) {
  return cheb_trig(n, (l1 + l2 - 2.0 * t) / (l1 - l2)) / cheb_trig(n, (l1 + l2) / (l1 - l2));
}

// f(W) from a self-adjoint eigensolver run inside the test.
inline Eigen::MatrixXd matrix_function(const Eigen::MatrixXd& w, const std::function<double(double)>& f) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w);
  Vector lam = es.eigenvalues();
  const double top = lam.maxCoeff();
  for (Eigen::Index i = 0; i < lam.size(); ++i) lam(i) = lam(i) <= 1e-10 * top ? f(0.0) : f(lam(i));
  return es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
}

// Explicit Q = diag(I/η, I/θ − (η/(1+ηα)) K Kᵀ).
inline Eigen::MatrixXd q_matrix(double eta, double theta, double alpha, const Eigen::MatrixXd& k) {
  const auto d = k.cols(), p = k.rows();
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(d + p, d + p);
  q.topLeftCorner(d, d) = Eigen::MatrixXd::Identity(d, d) / eta;
  q.bottomRightCorner(p, p) =
      Eigen::MatrixXd::Identity(p, p) / theta - (eta / (1.0 + eta * alpha)) * k * k.transpose();
  return q;
}

inline Vector finite_diff_grad(const affineopt::Objective& obj, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Vector xp = x, xm = x;
    xp(i) += h;
    xm(i) -= h;
    g(i) = (obj.value(xp) - obj.value(xm)) / (2.0 * h);
  }
  return g;
}

// Small quadratic instance built directly, independent of the generators.
inline affineopt::ProblemInstance small_quadratic(std::mt19937_64& gen, Eigen::Index d, Eigen::Index p) {
  const Eigen::MatrixXd m = random_matrix(gen, d, d);
  const Eigen::MatrixXd a = m * m.transpose() + Eigen::MatrixXd::Identity(d, d);
  const Eigen::MatrixXd k = random_matrix(gen, p, d);
  const Vector b = k * random_vector(gen, d);
  auto obj = std::make_shared<affineopt::QuadraticObjective>(a, random_vector(gen, d));
  return affineopt::ProblemInstance(obj, {affineopt::InstrumentedMap(dense(k)), b});
}

}  // namespace testsupport
