#include "etalab/special.hpp"

#include "etalab/quadrature.hpp"

namespace etalab::special {

namespace {

// erf by its Maclaurin series; used for |x| <= 1 where it converges fast.
Real erf_series(Real x) {
    const Real x2 = x * x;
    Real term = x;
    Real sum = x;
    for (int n = 1; n < 80; ++n) {
        term *= -x2 / n;
        const Real add = term / (2 * n + 1);
        sum += add;
        if (std::abs(add) < 1e-18 * std::abs(sum)) break;
    }
    return 2.0 / std::sqrt(kPi) * sum;
}

// Lentz evaluation of the continued fraction
//   erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + (2/2)/(x + ...)))
// valid for x > 0, rapidly convergent for x >= 1.
Real erfcx_cf(Real x) {
    const Real tiny = 1e-300;
    Real f = x, c = x, d = 0.0;
    for (int k = 1; k < 400; ++k) {
        const Real a = 0.5 * k;
        d = x + a * d;
        if (std::abs(d) < tiny) d = tiny;
        c = x + a / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const Real delta = c * d;
        f *= delta;
        if (std::abs(delta - 1.0) < 1e-17) break;
    }
    return 1.0 / (std::sqrt(kPi) * f);
}

Real bump_raw(Real u) {
    if (std::abs(u) >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - u * u));
}

Real bump_norm() {
    static const Real norm = quadrature::adaptive_simpson(
        [](Real u) { return bump_raw(u); }, -1.0, 1.0, 1e-15);
    return norm;
}

Real transition_B(Real x) {
    if (x <= 0.0) return 0.0;
    return std::exp(-1.0 / x);
}

}  // namespace

Real erfc(Real x) {
    if (x < 0.0) return 2.0 - erfc(-x);
    if (x <= 1.0) return 1.0 - erf_series(x);
    if (x > 27.0) return 0.0;  // below double underflow of exp(-x^2)
    return std::exp(-x * x) * erfcx_cf(x);
}

Real erfcx(Real x) {
    if (x <= 1.0) return std::exp(x * x) * erfc(x);
    return erfcx_cf(x);
}

Real bump(Real u) { return bump_raw(u) / bump_norm(); }

Real bump_cdf(Real u) {
    if (u <= -1.0) return 0.0;
    if (u >= 1.0) return 1.0;
    return quadrature::adaptive_simpson([](Real v) { return bump_raw(v); }, -1.0, u, 1e-14) /
           bump_norm();
}

Real smooth_rho(Real a, Real b, Real u) {
    const Real x = (u - a) / (b - a);
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const Real num = transition_B(x);
    return num / (num + transition_B(1.0 - x));
}

Real smooth_rho_deriv(Real a, Real b, Real u) {
    const Real x = (u - a) / (b - a);
    if (x <= 0.0 || x >= 1.0) return 0.0;
    const Real f = transition_B(x), g = transition_B(1.0 - x);
    const Real fp = f / (x * x), gp = g / ((1.0 - x) * (1.0 - x));
    return (fp * g + f * gp) / ((f + g) * (f + g)) / (b - a);
}

}  // namespace etalab::special
