#pragma once

#include <functional>
#include <vector>

#include "etalab/common.hpp"

namespace etalab::quadrature {

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
struct GaussRule {
    std::vector<Real> nodes;
    std::vector<Real> weights;
};

const GaussRule& gauss_rule(int n);

/// Integrate f over [a, b] with one n-point Gauss panel.
Real gauss_panel(const std::function<Real(Real)>& f, Real a, Real b, int n = 24);

/// Integrate f over [a, b] split into `panels` equal Gauss panels.
Real gauss_composite(const std::function<Real(Real)>& f, Real a, Real b, int panels, int n = 24);

/// Adaptive Simpson quadrature; throws QuadratureNonConvergence if the
/// tolerance cannot be met within the recursion budget.
Real adaptive_simpson(const std::function<Real(Real)>& f, Real a, Real b,
                      Real tol = 1e-12, int max_depth = 48);

struct PanelResult {
    Real value = 0;
    Real error_estimate = 0;  // |refined - coarse| accumulated over panels
};

/// Composite Gauss integration with the panel count doubled once to
/// produce a refinement-based error estimate.
PanelResult gauss_with_refinement(const std::function<Real(Real)>& f, Real a, Real b,
                                  int panels, int n = 24);

}  // namespace etalab::quadrature
