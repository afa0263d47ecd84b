#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "etalab/boundary.hpp"
#include "etalab/model.hpp"

namespace etalab::modes {

enum class Domain { Interval, Circle };

/// Boundary kill at one interval end, acting on the block's 2-component
/// boundary value (c1, c2) = (phi/psi coefficient, gamma-partner coefficient).
struct EndKill {
    bool c1 = false;
    bool c2 = false;
    // Direction kill a*c1 + b*c2 = 0 for custom Lagrangians (kernel blocks).
    std::optional<std::pair<Complex, Complex>> direction;
};

/// Piecewise-constant description of the block mass, when available.
struct MassRegion {
    Real u_begin = 0;
    Real u_end = 0;
    Real value = 0;
};

/// One 2x2 first-order system obtained by restricting to a boundary
/// eigen-pair (phi_lambda, gamma phi_lambda) or kernel pair (psi, gamma psi):
///   A = gamma_2 (d/du + lambda sigma_3) + M(u) Gamma_2,
/// written on coefficients as [[M_b, -d/du + lambda], [d/du + lambda, -M_b]]
/// with M_b(u) = chirality_c1 * M(u).
struct ModeBlock {
    int id = 0;
    Real lambda = 0;
    int chirality_c1 = +1;  // Gamma_S eigenvalue of the c1 basis section
    bool is_kernel = false;
    Domain domain = Domain::Interval;
    Real u_min = 0;
    Real length = 0;  // interval length or circle circumference
    std::function<Real(Real)> block_mass;  // M_b(u), includes the chirality sign
    std::vector<MassRegion> regions;       // empty when the mass is not piecewise constant
    EndKill kill_in, kill_out;             // interval domains only
};

std::vector<ModeBlock> reduce(const model::Scenario& scenario);

enum class Method { Analytic, Discretized };

struct SpectrumEntry {
    Real mu = 0;
    int multiplicity = 1;
    int block_id = 0;
    Real block_lambda = 0;
};

struct Spectrum {
    std::vector<SpectrumEntry> entries;  // sorted by (mu, block_id)
    std::vector<Real> chirality;         // per entry, Gamma_S expectation (discretized route)
    Method method = Method::Discretized;
    int cutoff = 0;       // K
    int grid_points = 0;  // N (discretized)
    Real window = 0;      // |mu| <= window (analytic); 0 = full matrix spectrum

    int total_count() const;
    Real min_abs_mu(Real exclude_below = 0) const;
};

/// Closed-form / transfer-matrix route; requires piecewise-constant mass.
Spectrum solve_analytic(const ModeBlock& block, Real mu_window);
Spectrum solve_analytic(const model::Scenario& scenario);

struct BlockEigensystem {
    std::vector<Real> mu;
    std::vector<Real> chirality;  // Gamma expectation per eigenvector
    Eigen::MatrixXd vectors;      // columns; dof layout [c1 dofs | c2 dofs]
    std::vector<Real> c1_grid, c2_grid;
    int n_c1 = 0;
};

/// Staggered-grid / trigonometric-spectral discretization of one block.
BlockEigensystem solve_block_discretized(const ModeBlock& block, int grid_points);
BlockEigensystem solve_block_discretized(const ModeBlock& block, int grid_points,
                                         bool with_vectors);

Spectrum solve_discretized(const model::Scenario& scenario);
Spectrum solve_discretized(const model::Scenario& scenario, int grid_points);
Spectrum solve_discretized(const model::Scenario& scenario, int grid_points, bool with_chirality);

struct KernelElement {
    int block_id = 0;
    Real block_lambda = 0;
    Real chirality = 0;
    std::vector<Real> u_samples, c1_profile, c2_profile;
};

struct KernelReport {
    int dimension = 0;
    Real chirality_trace_raw = 0;
    int chirality_trace = 0;
    std::vector<KernelElement> elements;
};

/// Kernel by discretized eigenvectors with |mu| < kernel_tolerance; throws
/// AmbiguousKernel when eigenvalues fall in [tol, 10 tol).
KernelReport kernel(const model::Scenario& scenario);

/// APS-type index of the massless operator: tr(Gamma_S | ker).
int index(const model::Scenario& scenario);

struct MatchResult {
    Real max_deviation = 0;
    std::vector<Real> unmatched_a, unmatched_b;
};

/// Greedy nearest-neighbour pairing of two sorted spectra within |mu| <= window.
MatchResult match_spectra(const Spectrum& a, const Spectrum& b, Real window, Real radius);

}  // namespace etalab::modes
