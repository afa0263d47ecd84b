#pragma once

#include "etalab/common.hpp"

namespace etalab::special {

/// Complementary error function, (2/sqrt(pi)) * integral_x^inf exp(-u^2) du.
/// Power series for small |x|, Lentz continued fraction for the tail;
/// relative accuracy better than 1e-14 over the double range.
Real erfc(Real x);

/// exp(x^2) * erfc(x) for x >= 0; stays finite where erfc underflows.
Real erfcx(Real x);

/// Normalized C-infinity bump exp(-1/(1-u^2)) / I, supported in (-1, 1),
/// with I chosen so the integral over the line equals 1.
Real bump(Real u);

/// Integral of the normalized bump from -1 to u (exactly 0 / 1 outside the support).
Real bump_cdf(Real u);

/// Smooth transition rho(a,b): 0 for u <= a, 1 for u >= b, C-infinity between.
Real smooth_rho(Real a, Real b, Real u);

/// d/du of smooth_rho(a,b).
Real smooth_rho_deriv(Real a, Real b, Real u);

}  // namespace etalab::special
