#include <doctest.h>

#include "etalab/heat.hpp"
#include "etalab/quadrature.hpp"
#include "etalab/special.hpp"

using namespace etalab;
using namespace etalab::heat;

namespace {

boundary::BoundaryEigendata data(Real flux, int K) {
    return boundary::eigendata({2 * kPi, flux}, K);
}

}  // namespace

TEST_CASE("half-cylinder kernels vanish on the killed rows at the boundary") {
    const auto d = data(0.0, 3);
    for (auto variant : {CylinderVariant::HalfPlus, CylinderVariant::HalfMinus}) {
        const Real sgn = (variant == CylinderVariant::HalfPlus) ? 1.0 : -1.0;
        CylinderKernelSpec spec{variant, &d, 4.0, 0.4};
        const auto diag = kernel_eval_diagonal(spec, 0.0, sgn * 0.8);
        for (int j = 0; j < d.dim(); ++j) {
            const auto& e = d.entries[j];
            const bool killed = e.lambda > 1e-12 ||
                                (std::abs(e.lambda) < 1e-12 && e.chirality > 0);
            if (killed) CHECK(std::abs(diag(j)) < 1e-14);
            else CHECK(std::abs(diag(j)) > 0.0);
        }
    }
}

TEST_CASE("half-cylinder diagonal coefficients vanish pairwise at the boundary point") {
    const auto d = data(0.0, 2);
    CylinderKernelSpec spec{CylinderVariant::HalfPlus, &d, 0.0, 0.25};
    const auto diag = kernel_eval_diagonal(spec, 0.0, 0.0);
    for (int j = 0; j < d.dim(); ++j)
        if (d.entries[j].lambda > 1e-12) CHECK(diag(j) == 0.0);
}

TEST_CASE("kernel domain guards") {
    const auto d = data(0.0, 2);
    CylinderKernelSpec spec{CylinderVariant::HalfPlus, &d, 1.0, 0.5};
    CHECK_THROWS_AS(kernel_eval_diagonal(spec, -0.1, 0.4), Error);
    spec.variant = CylinderVariant::HalfMinus;
    CHECK_THROWS_AS(kernel_eval_diagonal(spec, 0.1, -0.4), Error);
}

TEST_CASE("heat-equation residual of all kernel variants") {
    const auto d = data(0.0, 3);
    const Real m = 3.0, t = 0.35, v = 0.7, hu = 2e-3, ht = 2e-4;
    for (auto variant :
         {CylinderVariant::Infinite, CylinderVariant::HalfPlus, CylinderVariant::HalfMinus}) {
        const Real sgn = (variant == CylinderVariant::HalfMinus) ? -1.0 : 1.0;
        const Real u = sgn * 0.5, vv = sgn * v;
        for (int j = 0; j < d.dim(); ++j) {
            auto val = [&](Real uu, Real tt) {
                CylinderKernelSpec s{variant, &d, m, tt};
                return kernel_eval_diagonal(s, uu, vv)(j);
            };
            const Real lam = d.entries[j].lambda;
            const Real dt = (val(u, t + ht) - val(u, t - ht)) / (2 * ht);
            const Real duu = (val(u + hu, t) - 2 * val(u, t) + val(u - hu, t)) / (hu * hu);
            CHECK(std::abs(dt - duu + (lam * lam + m * m) * val(u, t)) < 1e-6);
        }
    }
}

TEST_CASE("infinite-cylinder chirality trace vanishes identically") {
    for (Real flux : {0.0, 0.5}) {
        const auto d = data(flux, 4);
        CylinderKernelSpec spec{CylinderVariant::Infinite, &d, 2.0, 0.7};
        for (Real u : {-1.2, 0.0, 2.3}) {
            const auto diag = kernel_eval_diagonal(spec, u, u);
            Real trace = 0;
            for (int j = 0; j < d.dim(); ++j) trace += d.entries[j].chirality * diag(j);
            CHECK(std::abs(trace) < 1e-15);
        }
    }
}

TEST_CASE("half-cylinder chirality trace reduces to the kernel Gaussian term") {
    // the lambda sums cancel in chirality pairs, leaving -2 n_+ Gaussian
    const auto d = data(0.0, 4);
    const Real m = 2.0, t = 0.6;
    CylinderKernelSpec spec{CylinderVariant::HalfPlus, &d, m, t};
    for (Real u : {0.3, 1.0, 2.5}) {
        const Real expect = -2.0 * d.n_plus * std::exp(-m * m * t - u * u / t) /
                            std::sqrt(4 * kPi * t);
        CHECK(gamma_trace_half(spec, u) == doctest::Approx(expect).epsilon(1e-12));
    }
    // and it decays to zero with height
    CHECK(std::abs(gamma_trace_half(spec, 40.0)) < 1e-300);
}

TEST_CASE("cutoff profiles partition unity with localized derivative") {
    Cutoffs cut{3.0};
    for (Real u : {0.0, 0.9, 1.5, 2.4, 3.0}) {
        CHECK(cut.psi1(u) + cut.psi2(u) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(cut.phi1(u) >= 0.0);
        CHECK(cut.phi2(u) <= 1.0);
    }
    // supp psi_1' in [3R/7, 4R/7]
    CHECK(cut.psi1_deriv(1.2) == 0.0);
    CHECK(cut.psi1_deriv(1.9) == 0.0);
    CHECK(cut.psi1_deriv(1.5) != 0.0);
}

TEST_CASE("a-factor tends to one with growing R") {
    const Real t = 0.5;
    const Real a2 = a_factor(2.0, t), a4 = a_factor(4.0, t), a8 = a_factor(8.0, t);
    CHECK(a2 < a4);
    CHECK(a4 < a8 + 1e-15);
    CHECK(std::abs(a8 - 1.0) < 1e-12);
    // against direct quadrature of the defining integral
    Cutoffs cut{2.0};
    const Real direct = quadrature::adaptive_simpson(
        [&](Real u) { return cut.psi1(u) * 2.0 * std::exp(-u * u / t) / std::sqrt(kPi * t); },
        0.0, 2.0, 1e-13);
    CHECK(a2 == doctest::Approx(direct).epsilon(1e-11));
}

TEST_CASE("Theta vanishes identically for integer and half-integer flux") {
    for (Real flux : {0.0, 0.5}) {
        const auto d = data(flux, 6);
        for (int i = 0; i <= 30; ++i) {
            const Real t = std::pow(10.0, -2.0 + 3.0 * i / 30.0);
            CHECK(std::abs(theta(d, 10.0, t)) < 1e-12);
        }
    }
}

TEST_CASE("integration-by-parts identity per lambda, to quadrature accuracy") {
    for (Real lam : {0.5, 1.0, 3.0}) {
        for (Real t : {0.1, 0.3, 1.0}) {
            const auto p = parts_identity(lam, 2.0, t);
            CHECK(p.lhs == doctest::Approx(p.rhs).epsilon(1e-10));
        }
    }
}

TEST_CASE("the two trace-defect forms agree and reach the large-R limit") {
    const auto d = data(0.0, 3);
    const auto r = delta_c_integral(d, 2.0, 5.0, 0.3);
    CHECK(r.direct == doctest::Approx(r.by_parts).epsilon(1e-10));
    // circle model: both reduce to the kernel-term; at R -> infinity the
    // integrated defect tends to Theta - m e^{-m^2 t} n_+ with Theta = 0
    const auto big = delta_c_integral(d, 10.0, 5.0, 0.3);
    const Real limit = -5.0 * std::exp(-25.0 * 0.3) * d.n_plus;
    CHECK(big.direct == doctest::Approx(limit).epsilon(1e-10));
}

TEST_CASE("g-factor obeys the support-rate Gaussian bound and vanishes with weights") {
    const auto d = data(0.0, 4);
    const Real t = 1.0;
    // the cutoff derivative is supported in [3R/7, 4R/7], so the factor
    // decays at least like e^{-(3R/7)^2/t} times the boundary heat trace
    const Real rate = 9.0 / 49.0;
    Real lam_sum = 0;
    for (const auto& e : d.entries)
        if (e.lambda > 1e-12) lam_sum += std::exp(-e.lambda * e.lambda * t);
    Real prev = std::numeric_limits<Real>::infinity();
    for (Real R : {2.0, 4.0, 8.0}) {
        const Real g_unit = std::abs(g_factor(d, R, t, true));
        CHECK(g_unit <= lam_sum * std::exp(-rate * R * R / t));
        CHECK(g_unit < prev);
        prev = g_unit;
        CHECK(std::abs(g_factor(d, R, t, false)) < 1e-15);  // chirality weights cancel
    }
}

TEST_CASE("xi vanishes on the circle model") {
    const auto d = data(0.0, 4);
    for (Real s : {0.0, 1e-3, 0.2}) CHECK(std::abs(xi_r(d, 5.0, 4.0, s)) < 1e-12);
}

TEST_CASE("regularized limit integrals reach the kernel dimension") {
    const auto d = data(0.0, 8);
    const auto lt = limit_terms(d, 2.0, 8.0, 1e-3);
    CHECK(std::abs(lt.a_term - d.n_plus) < 1e-3);
    CHECK(std::abs(lt.g_term) < 1e-3);
    // half-integer flux: no kernel, the a-term integral vanishes
    const auto dh = data(0.5, 8);
    const auto lth = limit_terms(dh, 2.0, 8.0, 1e-3);
    CHECK(lth.a_term == 0.0);
}
