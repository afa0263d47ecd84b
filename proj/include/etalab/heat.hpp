#pragma once

#include <Eigen/Dense>

#include "etalab/boundary.hpp"
#include "etalab/common.hpp"

namespace etalab::heat {

enum class CylinderVariant { Infinite, HalfPlus, HalfMinus };

/// Closed-form heat kernel of the massive cylinder operator squared, with
/// the spectral boundary condition at u = 0 for the half variants.
struct CylinderKernelSpec {
    CylinderVariant variant = CylinderVariant::Infinite;
    const boundary::BoundaryEigendata* eigendata = nullptr;
    Real mass = 0;
    Real time = 1;
};

/// Diagonal coefficients of the kernel at heights (u, v) on the truncated
/// boundary basis (the kernel is diagonal section-by-section here).
Eigen::VectorXd kernel_eval_diagonal(const CylinderKernelSpec& spec, Real u, Real v);

Eigen::MatrixXd kernel_eval(const CylinderKernelSpec& spec, Real u, Real v);

/// Gamma_S-trace over the boundary of the diagonal kernel at height u,
/// the closed half-cylinder trace formulas.
Real gamma_trace_half(const CylinderKernelSpec& spec, Real u);

/// Cutoff profile family built from the smooth transition rho(a, b).
struct Cutoffs {
    Real R = 1;
    Real phi1(Real u) const;
    Real phi2(Real u) const;
    Real psi1(Real u) const;
    Real psi2(Real u) const;
    Real psi1_deriv(Real u) const;
};

/// a(R, t) = integral_0^R psi_1(u) 2 e^{-u^2/t} / sqrt(pi t) du.
Real a_factor(Real R, Real t);

/// G(R, t); unit_weights replaces the chirality weights by +1 (the shape the
/// exponential bound controls).
Real g_factor(const boundary::BoundaryEigendata& data, Real R, Real t, bool unit_weights = false);

/// Theta(t) = -m e^{-m^2 t} sum_lambda erfc(lambda sqrt t) <Gamma phi, phi>.
Real theta(const boundary::BoundaryEigendata& data, Real m, Real t);

struct DeltaCResult {
    Real direct = 0;      // the Gaussian-plus-erfc integrand form
    Real by_parts = 0;    // the integrated-by-parts form
};

/// Integrated cylinder trace defect over Y x [-R, R] at one (R, m, t),
/// evaluated through both equivalent forms for cross-validation.
DeltaCResult delta_c_integral(const boundary::BoundaryEigendata& data, Real R, Real m, Real t);

/// xi_R(s) = (1/Gamma((s+1)/2)) integral_0^{R^{2-eps}} t^{(s-1)/2} Theta(t) dt.
Real xi_r(const boundary::BoundaryEigendata& data, Real m, Real R, Real s, Real eps = 0.1);

struct LimitTerms {
    Real a_term = 0;  // -> n_plus as s -> 0, R -> infinity
    Real g_term = 0;  // -> 0
};

/// The two regularized t-integrals whose limits give the boundary
/// kernel correction.
LimitTerms limit_terms(const boundary::BoundaryEigendata& data, Real m, Real R, Real s,
                       Real eps = 0.1, bool unit_weight_g = true);

/// One-line checks used by tests: per-lambda integration-by-parts identity.
struct PartsIdentity {
    Real lhs = 0;   // integral of psi_1 * 2 lambda e^{2 lambda u} erfc(...)
    Real rhs = 0;   // -erfc(lambda sqrt t) + e^{-lambda^2 t} a(R,t) - integral psi_1' ...
};
PartsIdentity parts_identity(Real lambda, Real R, Real t);

}  // namespace etalab::heat
