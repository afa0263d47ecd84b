#include <doctest.h>

#include "etalab/quadrature.hpp"
#include "etalab/special.hpp"

using namespace etalab;

namespace {

// Independent oracle: the defining integral (2/sqrt(pi)) int_x^inf e^{-u^2} du
// by adaptive quadrature, computed in the rescaled form
// e^{-x^2} (2/sqrt(pi)) int_0^inf e^{-2xs - s^2} ds so the relative accuracy
// survives at large x.
Real erfcx_oracle(Real x) {
    return 2.0 / std::sqrt(kPi) *
           quadrature::adaptive_simpson(
               [x](Real s) { return std::exp(-2.0 * x * s - s * s); }, 0.0, 9.0, 1e-16);
}

Real erfc_oracle(Real x) { return std::exp(-x * x) * erfcx_oracle(x); }

}  // namespace

TEST_CASE("erfc basics") {
    CHECK(special::erfc(0.0) == doctest::Approx(1.0).epsilon(1e-15));
    for (Real x : {0.1, 0.7, 1.3, 2.9, 5.5}) {
        CHECK(special::erfc(-x) + special::erfc(x) == doctest::Approx(2.0).epsilon(1e-14));
    }
}

TEST_CASE("erfc against the quadrature oracle") {
    for (Real x : {0.05, 0.3, 1.0, 1.7, 2.5, 4.0, 6.0, 9.0}) {
        const Real ref = erfc_oracle(x);
        CHECK(special::erfc(x) == doctest::Approx(ref).epsilon(1e-13));
    }
    // frozen value computed from the oracle
    CHECK(special::erfc(1.0) == doctest::Approx(0.15729920705028513).epsilon(1e-13));
}

TEST_CASE("erfc decay bound used by the tail estimates") {
    for (Real x : {0.5, 1.0, 2.0, 4.0})
        CHECK(special::erfc(x) <= std::exp(-x * x));
}

TEST_CASE("erfcx consistency") {
    for (Real x : {0.2, 1.0, 3.0, 12.0})
        CHECK(special::erfcx(x) == doctest::Approx(erfcx_oracle(x)).epsilon(1e-12));
}

TEST_CASE("bump is even, supported in (-1,1), unit mass") {
    CHECK(special::bump(1.0) == 0.0);
    CHECK(special::bump(-1.2) == 0.0);
    CHECK(special::bump(0.35) == doctest::Approx(special::bump(-0.35)).epsilon(1e-14));
    const Real mass = quadrature::adaptive_simpson([](Real u) { return special::bump(u); },
                                                   -1.0, 1.0, 1e-13);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-11));
    CHECK(special::bump_cdf(-1.0) == 0.0);
    CHECK(special::bump_cdf(1.0) == 1.0);
    CHECK(special::bump_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("smooth transition endpoints and derivative") {
    CHECK(special::smooth_rho(3.0 / 7, 4.0 / 7, 0.3) == 0.0);
    CHECK(special::smooth_rho(3.0 / 7, 4.0 / 7, 0.9) == 1.0);
    const Real a = 0.2, b = 0.6;
    for (Real u : {0.25, 0.4, 0.55}) {
        const Real h = 1e-6;
        const Real fd = (special::smooth_rho(a, b, u + h) - special::smooth_rho(a, b, u - h)) / (2 * h);
        CHECK(special::smooth_rho_deriv(a, b, u) == doctest::Approx(fd).epsilon(1e-7));
    }
    Real prev = 0;
    for (int i = 0; i <= 50; ++i) {
        const Real v = special::smooth_rho(a, b, a + (b - a) * i / 50.0);
        CHECK(v >= prev - 1e-15);
        prev = v;
    }
}
