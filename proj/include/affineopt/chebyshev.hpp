#pragma once

#include "affineopt/operators.hpp"
#include "affineopt/spectral.hpp"

namespace affineopt {

struct ChebyshevConfig {
  ChebyshevConfig(int n_inner, SpectralBounds bounds);

  int n_inner;
  SpectralBounds bounds;

  /// N ≥ √χ, the regime in which P(W) clusters the spectrum of W.
  bool meets_sqrt_chi() const { return n_inner >= inner_iterations_for(bounds.chi()); }
};

/**
 * @brief N steps of the Chebyshev semi-iteration for Kz = b started at z0.
 *
 * Returns z^N with Kᵀ(Kz^N − b) = T̃_N(W) Kᵀ(Kz^0 − b). Always runs exactly
 * N steps and costs exactly N applications each of K and Kᵀ.
 */
Vector chebyshev_iterate(const Vector& z0, InstrumentedMap& map, const Vector& b, const ChebyshevConfig& cfg);

/// x − chebyshev_iterate(x), which equals P(W)(x − x⋆) for any x⋆ with Kx⋆ = b.
Vector precond_residual(const Vector& x, InstrumentedMap& map, const Vector& b, const ChebyshevConfig& cfg);

}  // namespace affineopt
