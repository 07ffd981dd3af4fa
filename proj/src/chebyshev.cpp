#include "affineopt/chebyshev.hpp"

#include <fmt/format.h>

#include "affineopt/errors.hpp"

namespace affineopt {

ChebyshevConfig::ChebyshevConfig(int n, SpectralBounds b) : n_inner(n), bounds(b) {
  if (n < 1) throw InputError(fmt::format("Chebyshev needs N >= 1, got {}", n));
}

Vector chebyshev_iterate(const Vector& z0, InstrumentedMap& map, const Vector& b, const ChebyshevConfig& cfg) {
  if (z0.size() != map.cols() || b.size() != map.rows()) {
    throw InputError("chebyshev_iterate: dimension mismatch");
  }
  if (cfg.bounds.degenerate()) {
    throw DegenerateError("Chebyshev iteration needs lambda1 > lambda2");
  }
  const double l1 = cfg.bounds.lambda1(), l2 = cfg.bounds.lambda2();
  const double rho = (l1 - l2) * (l1 - l2) / 16.0;
  const double nu = (l1 + l2) / 2.0;

  double gamma = -nu / 2.0;
  Vector p = -map.apply_transpose(map.apply(z0) - b) / nu;
  Vector z = z0 + p;
  for (int i = 1; i < cfg.n_inner; ++i) {
    const double beta = rho / gamma;
    gamma = -(nu + beta);
    p = (map.apply_transpose(map.apply(z) - b) + beta * p) / gamma;
    z += p;
  }
  return z;
}

Vector precond_residual(const Vector& x, InstrumentedMap& map, const Vector& b, const ChebyshevConfig& cfg) {
  return x - chebyshev_iterate(x, map, b, cfg);
}

}  // namespace affineopt
