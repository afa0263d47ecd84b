#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "etalab/common.hpp"

namespace etalab::model {

/// Boundary circle operator data: D_Y = diag(+1,-1) (-i d/dtheta - flux)
/// on 2-component periodic sections.
struct BoundaryModel {
    Real circumference = 2.0 * kPi;
    Real flux = 0.0;
    static constexpr int rank = 2;

    bool integer_flux() const { return nearly_integer(flux); }
};

struct FiniteCylinder {
    Real length = 1.0;  // coordinate u in [-length/2, length/2]
};

struct DoubledCylinder {
    Real circumference = 2.0;  // u-circle, gluing loci at +-circumference/4
};

struct HalfCylinder {
    enum class Side { Left, Right };
    Side side = Side::Left;  // Left: boundary at u=0, bulk [0, length]
    Real length = 8.0;
};

using BulkShape = std::variant<FiniteCylinder, DoubledCylinder, HalfCylinder>;

struct ConstantMass {
    Real value = 0.0;  // the operator D + value * Gamma_S
};

struct StepWall {
    Real m = 1.0;  // sign flip of the kappa profile at the wall loci
};

struct SmoothWall {
    Real m = 1.0;
    Real T = 10.0;  // wall half-width 1/T
};

using MassProfile = std::variant<ConstantMass, StepWall, SmoothWall>;

enum class BcLabel { PiVPlus, PiVMinus, PGeq, CustomLagrangian };

struct BoundaryCondition {
    BcLabel label = BcLabel::PiVPlus;
    // CustomLagrangian: one vector per kernel pair, coefficients (a, b) in the
    // (psi_i, gamma psi_i) basis. Normalized during validation.
    std::vector<Complex> lagrangian;
};

struct BoundaryConditionSpec {
    std::vector<BoundaryCondition> ends;  // ordered: ingoing end first, then outgoing
};

struct EtaIntegration {
    Real t_split = 1.0;
    int panels_small = 16;
    int panels_large = 24;
    int gauss_points = 24;
    Real tail_log_eps = 34.5;  // integrate up to t with e^{-t gap^2} ~ 1e-15
};

struct Numerics {
    int mode_cutoff = 4;       // K
    int grid_points = 256;     // N
    Real kernel_tolerance = 1e-8;
    Real mu_window = 16.0;     // |mu| window for analytic spectra
    EtaIntegration eta;
};

struct Scenario {
    BoundaryModel boundary;
    BulkShape bulk = FiniteCylinder{};
    MassProfile mass = ConstantMass{};
    BoundaryConditionSpec bcs;
    Numerics numerics;
};

/// Number of boundary components of the bulk shape (0, 1 or 2).
int boundary_components(const BulkShape& shape);

/// Fills defaults, checks invariants; throws Error on violation.
Scenario validate(Scenario scenario);

/// Mass profile evaluated at bulk coordinate u (validated scenarios only).
Real mass_at(const Scenario& scenario, Real u);

/// Smoothed domain-wall profile F_T: -1 for u <= -1/T, +1 for u >= 1/T, C-infinity.
Real smooth_step(Real u, Real T);

/// Canonical text form; identical validated scenarios serialize identically.
std::string serialize(const Scenario& scenario);

Scenario parse_scenario_text(const std::string& text);
Scenario load_scenario_file(const std::string& path);

}  // namespace etalab::model
