#pragma once

#include "etalab/model.hpp"
#include "etalab/modes.hpp"

namespace etalab::eta {

struct EtaResult {
    Real value = 0;
    Real error_estimate = 0;  // quadrature refinement delta + analytic tail bound
    Real unpaired_gap = 0;    // smallest |mu| not cancelled by a -mu partner
    int zero_modes = 0;       // modes handled by the zero-mode sign rule
    int zero_mode_sign_sum = 0;
    Real t_max = 0;
};

/// Regularized eta difference of two kernel-free spectra through the heat
/// integral of the difference trace.
EtaResult eta_difference(const modes::Spectrum& a, const modes::Spectrum& b,
                         const model::EtaIntegration& opts, Real kernel_tol = 1e-8);

struct McKeanResult {
    int index = 0;
    Real residual = 0;       // distance of the supertrace from the rounded value
    Real max_deviation = 0;  // spread across the t samples
    std::vector<Real> values;
};

/// Supertrace of the heat operator from the discretized eigenbasis; must be
/// t-independent, and equals the index.
McKeanResult mckean_singer(const model::Scenario& scenario, const std::vector<Real>& t_samples);

struct DomainWallOptions {
    Real zero_band = 1e-4;  // |mu| below this is treated as a pinned zero mode
    Real gap_min = 0.5;     // required gap of the unpaired spectrum
};

/// Eta difference of a domain-wall operator against a reference operator on
/// the same bulk. Exact zero modes of the wall operator receive the sign of
/// their first-order shift under an infinitesimal -Gamma_S mass reduction.
EtaResult domain_wall_eta_difference(const model::Scenario& wall, const model::Scenario& reference,
                                     const DomainWallOptions& opts = {});

struct GluingDefect {
    Real R = 0, m = 0;
    Real delta = 0;
    Real delta_small = 0;  // t below R^{2-eps}
    Real delta_large = 0;
    Real error_estimate = 0;
    Real gap = 0;  // measured spectral gap c_0 over the three operators
    modes::Spectrum whole, piece_left, piece_right;
};

struct GluingConfig {
    model::BoundaryModel boundary;
    int mode_cutoff = 4;
    Real mu_window = 24;
    Real eps = 0.1;
    model::EtaIntegration integration;
    Real gap_min = 0.5;
};

/// delta_{m,R} = eta(whole) - eta(piece with Pi_V-) - eta(piece with Pi_V+),
/// with the whole a closed doubled cylinder of circumference 2R + 2 carrying
/// the constant mass -m, and the pieces the two finite cylinders of length
/// R + 1 obtained by cutting it.
GluingDefect gluing_defect(Real m, Real R, const GluingConfig& config);

/// Heat-trace sum S(t) = sum mu e^{-t mu^2} over a spectrum.
Real heat_trace_sum(const modes::Spectrum& s, Real t);

}  // namespace etalab::eta
