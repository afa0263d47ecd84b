#include "etalab/heat.hpp"

#include "etalab/quadrature.hpp"
#include "etalab/special.hpp"

namespace etalab::heat {

namespace {

using special::erfc;
using special::erfcx;

Real gaussian(Real x, Real t) { return std::exp(-x * x / (4 * t)) / std::sqrt(4 * kPi * t); }

// e^{2 lambda u} erfc(u/sqrt t + lambda sqrt t), evaluated without overflow.
Real scaled_erfc(Real lambda, Real u, Real t) {
    const Real z = u / std::sqrt(t) + lambda * std::sqrt(t);
    if (z >= 0) return std::exp(-u * u / t - lambda * lambda * t) * erfcx(z);
    return std::exp(2 * lambda * u) * erfc(z);
}

void check_domain(const CylinderKernelSpec& spec, Real u, Real v) {
    if (spec.variant == CylinderVariant::HalfPlus && (u < 0 || v < 0))
        fail(ErrorCode::InvalidShape, "HalfPlus kernel requires u, v >= 0");
    if (spec.variant == CylinderVariant::HalfMinus && (u > 0 || v > 0))
        fail(ErrorCode::InvalidShape, "HalfMinus kernel requires u, v <= 0");
    if (spec.time <= 0) fail(ErrorCode::InvalidShape, "heat kernel needs t > 0");
    if (spec.eigendata == nullptr) fail(ErrorCode::InvalidShape, "missing boundary eigendata");
}

}  // namespace

Eigen::VectorXd kernel_eval_diagonal(const CylinderKernelSpec& spec, Real u, Real v) {
    check_domain(spec, u, v);
    const auto& data = *spec.eigendata;
    const Real t = spec.time;
    const Real mfac = std::exp(-spec.mass * spec.mass * t);
    Eigen::VectorXd diag(data.dim());
    for (int j = 0; j < data.dim(); ++j) {
        const Real lam = data.entries[j].lambda;
        const Real decay = std::exp(-lam * lam * t);
        if (spec.variant == CylinderVariant::Infinite) {
            diag(j) = mfac * decay * gaussian(u - v, t);
            continue;
        }
        const Real sign = (spec.variant == CylinderVariant::HalfPlus) ? 1.0 : -1.0;
        const Real us = sign * u, vs = sign * v;  // reduce HalfMinus to the u >= 0 formulas
        const Real g_minus = gaussian(us - vs, t) - gaussian(us + vs, t);
        const Real g_plus = gaussian(us - vs, t) + gaussian(us + vs, t);
        const bool kernel_section = std::abs(lam) < 1e-12;
        if (kernel_section) {
            // psi sections vanish at the boundary, gamma psi sections do not
            diag(j) = mfac * (data.entries[j].chirality > 0 ? g_minus : g_plus);
        } else if (lam > 0) {
            diag(j) = mfac * decay * g_minus;
        } else {
            const Real alam = -lam;
            diag(j) = mfac * (decay * g_plus - alam * scaled_erfc(alam, 0.5 * (us + vs), t));
        }
    }
    return diag;
}

Eigen::MatrixXd kernel_eval(const CylinderKernelSpec& spec, Real u, Real v) {
    return kernel_eval_diagonal(spec, u, v).asDiagonal();
}

Real gamma_trace_half(const CylinderKernelSpec& spec, Real u) {
    check_domain(spec, u, u);
    const auto& data = *spec.eigendata;
    const Real t = spec.time;
    const Real mfac = std::exp(-spec.mass * spec.mass * t);
    const Real sign = (spec.variant == CylinderVariant::HalfMinus) ? -1.0 : 1.0;
    const Real us = sign * u;
    Real sum = 0;
    for (const auto& e : data.entries) {
        if (e.lambda <= 1e-12) continue;  // positive eigensections carry the weights
        const Real w = e.chirality;  // <Gamma_S phi_lambda, phi_lambda>
        sum += w * (-2.0 * std::exp(-e.lambda * e.lambda * t) * std::exp(-us * us / t) /
                        std::sqrt(4 * kPi * t) +
                    e.lambda * scaled_erfc(e.lambda, us, t));
    }
    sum -= 2.0 * data.n_plus * std::exp(-us * us / t) / std::sqrt(4 * kPi * t);
    return mfac * sum;
}

Real Cutoffs::phi1(Real u) const { return 1.0 - special::smooth_rho(5.0 / 7, 6.0 / 7, std::abs(u) / R); }
Real Cutoffs::phi2(Real u) const { return special::smooth_rho(1.0 / 7, 2.0 / 7, std::abs(u) / R); }
Real Cutoffs::psi2(Real u) const { return special::smooth_rho(3.0 / 7, 4.0 / 7, std::abs(u) / R); }
Real Cutoffs::psi1(Real u) const { return 1.0 - psi2(u); }
Real Cutoffs::psi1_deriv(Real u) const {
    const Real s = (u >= 0) ? 1.0 : -1.0;
    return -s * special::smooth_rho_deriv(3.0 / 7, 4.0 / 7, std::abs(u) / R) / R;
}

Real a_factor(Real R, Real t) {
    const Cutoffs cut{R};
    // psi_1 = 1 on [0, 3R/7]; the erf part of that stretch is exact.
    const Real split = 3.0 * R / 7;
    const Real head = 1.0 - erfc(split / std::sqrt(t));
    const Real tail = quadrature::adaptive_simpson(
        [&](Real u) { return cut.psi1(u) * 2.0 * std::exp(-u * u / t) / std::sqrt(kPi * t); },
        split, 4.0 * R / 7, 1e-13);
    return head + tail;
}

Real g_factor(const boundary::BoundaryEigendata& data, Real R, Real t, bool unit_weights) {
    const Cutoffs cut{R};
    Real sum = 0;
    for (const auto& e : data.entries) {
        if (e.lambda <= 1e-12) continue;
        const Real w = unit_weights ? 1.0 : static_cast<Real>(e.chirality);
        const Real val = quadrature::adaptive_simpson(
            [&](Real u) { return cut.psi1_deriv(u) * scaled_erfc(e.lambda, u, t); },
            3.0 * R / 7, 4.0 * R / 7, 1e-14);
        sum += w * val;
    }
    return sum;
}

Real theta(const boundary::BoundaryEigendata& data, Real m, Real t) {
    Real sum = 0;
    for (const auto& e : data.entries)
        if (e.lambda > 1e-12) sum += e.chirality * erfc(e.lambda * std::sqrt(t));
    return -m * std::exp(-m * m * t) * sum;
}

DeltaCResult delta_c_integral(const boundary::BoundaryEigendata& data, Real R, Real m, Real t) {
    if (R <= 0 || t <= 0) fail(ErrorCode::InvalidShape, "delta_c needs R > 0, t > 0");
    const Cutoffs cut{R};
    const Real mfac = m * std::exp(-m * m * t);
    DeltaCResult out;

    // direct form: Gaussian and erfc integrands against psi_1
    Real lam_sum = 0;
    for (const auto& e : data.entries) {
        if (e.lambda <= 1e-12) continue;
        const Real w = e.chirality;
        const Real val = quadrature::adaptive_simpson(
            [&](Real u) {
                return cut.psi1(u) *
                       (-2.0 * std::exp(-e.lambda * e.lambda * t - u * u / t) /
                            std::sqrt(kPi * t) +
                        2.0 * e.lambda * scaled_erfc(e.lambda, u, t));
            },
            0.0, R, 1e-13);
        lam_sum += w * val;
    }
    const Real kernel_term = quadrature::adaptive_simpson(
        [&](Real u) { return cut.psi1(u) * std::exp(-u * u / t) / std::sqrt(4 * kPi * t); }, 0.0,
        R, 1e-13);
    out.direct = mfac * lam_sum - 4.0 * m * data.n_plus * std::exp(-m * m * t) * kernel_term;

    // integrated-by-parts form
    const Real aR = a_factor(R, t);
    Real lam_sum2 = 0;
    for (const auto& e : data.entries) {
        if (e.lambda <= 1e-12) continue;
        const Real w = e.chirality;
        const Real tail = quadrature::adaptive_simpson(
            [&](Real u) { return cut.psi1_deriv(u) * scaled_erfc(e.lambda, u, t); },
            3.0 * R / 7, 4.0 * R / 7, 1e-14);
        lam_sum2 += w * (-erfc(e.lambda * std::sqrt(t)) + std::exp(-e.lambda * e.lambda * t) * aR -
                         tail);
    }
    out.by_parts = mfac * lam_sum2 - m * data.n_plus * std::exp(-m * m * t) * aR;
    return out;
}

namespace {

// integral_0^T t^{(s-1)/2} f(t) dt via t = x^2, graded panels toward 0.
Real weighted_t_integral(const std::function<Real(Real)>& f, Real s, Real T, int panels = 48) {
    const Real xmax = std::sqrt(T);
    Real sum = 0;
    Real prev = 0;
    for (int p = 1; p <= panels; ++p) {
        const Real frac = static_cast<Real>(p) / panels;
        const Real x1 = xmax * frac * frac;  // quadratic grading toward t = 0
        sum += quadrature::gauss_panel(
            [&](Real x) { return 2.0 * std::pow(x, s) * f(x * x); }, prev, x1, 32);
        prev = x1;
    }
    return sum;
}

}  // namespace

Real xi_r(const boundary::BoundaryEigendata& data, Real m, Real R, Real s, Real eps) {
    if (!(eps > 0 && eps < 1)) fail(ErrorCode::InvalidShape, "xi_R needs 0 < eps < 1");
    const Real T = std::pow(R, 2.0 - eps);
    const Real value =
        weighted_t_integral([&](Real t) { return theta(data, m, t); }, s, T);
    return value / std::tgamma(0.5 * (s + 1.0));
}

LimitTerms limit_terms(const boundary::BoundaryEigendata& data, Real m, Real R, Real s, Real eps,
                       bool unit_weight_g) {
    const Real T = std::pow(R, 2.0 - eps);
    LimitTerms out;
    out.a_term = m * data.n_plus *
                 weighted_t_integral(
                     [&](Real t) { return std::exp(-m * m * t) * a_factor(R, t); }, s, T) /
                 std::tgamma(0.5 * (s + 1.0));
    out.g_term = m *
                 weighted_t_integral(
                     [&](Real t) {
                         return std::exp(-m * m * t) * g_factor(data, R, t, unit_weight_g);
                     },
                     s, T, 24) /
                 std::tgamma(0.5 * (s + 1.0));
    return out;
}

PartsIdentity parts_identity(Real lambda, Real R, Real t) {
    const Cutoffs cut{R};
    PartsIdentity out;
    out.lhs = quadrature::adaptive_simpson(
        [&](Real u) { return cut.psi1(u) * 2.0 * lambda * scaled_erfc(lambda, u, t); }, 0.0, R,
        1e-13);
    const Real tail = quadrature::adaptive_simpson(
        [&](Real u) { return cut.psi1_deriv(u) * scaled_erfc(lambda, u, t); }, 3.0 * R / 7,
        4.0 * R / 7, 1e-14);
    out.rhs = -special::erfc(lambda * std::sqrt(t)) +
              std::exp(-lambda * lambda * t) * a_factor(R, t) - tail;
    return out;
}

}  // namespace etalab::heat
