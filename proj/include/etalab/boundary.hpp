#pragma once

#include <Eigen/Dense>

#include "etalab/common.hpp"
#include "etalab/model.hpp"

namespace etalab::boundary {

/// One section of the truncated boundary basis: the Fourier mode
/// e^{i k theta} in one spinor component.
struct BoundaryEntry {
    Real lambda = 0;     // D_Y eigenvalue
    int fourier_k = 0;
    int component = 0;   // 0: chirality +1 slot, 1: chirality -1 slot
    int chirality = +1;  // Gamma_S eigenvalue of the section
};

struct BoundaryEigendata {
    model::BoundaryModel boundary;
    int cutoff = 0;  // K; sections kept iff |lambda| <= K + 1/2
    std::vector<BoundaryEntry> entries;  // sorted by (lambda, fourier_k, component)
    std::vector<int> kernel_indices;     // entries with lambda == 0
    int n_plus = 0;                      // dim V_+

    int dim() const { return static_cast<int>(entries.size()); }
};

BoundaryEigendata eigendata(const model::BoundaryModel& boundary, int cutoff);

enum class ProjLabel { PGreater, PLess, PZero, PGeq, PiVPlus, PiVMinus, PrVPlus, PrVMinus };

struct ProjectionMatrix {
    Eigen::MatrixXcd mat;
    std::string label;
};

/// Built-in spectral projections on the truncated basis.
ProjectionMatrix projection(const BoundaryEigendata& data, ProjLabel label);

/// pr_L for a custom Lagrangian given by (a, b) coefficients per kernel pair
/// in the (psi_i, gamma psi_i) basis.
ProjectionMatrix lagrangian_projection(const BoundaryEigendata& data,
                                       const std::vector<Complex>& pair_coeffs);

Eigen::MatrixXcd gamma_matrix(const BoundaryEigendata& data);    // gamma, skew unitary
Eigen::MatrixXcd gamma_s_matrix(const BoundaryEigendata& data);  // Gamma_S grading
Eigen::MatrixXcd dy_matrix(const BoundaryEigendata& data);       // D_Y, diagonal here

/// Phi(x, y) = <gamma x, y> for kernel vectors; NotInKernel if either input
/// has weight outside the kernel beyond tolerance.
Complex symplectic_form(const BoundaryEigendata& data, const Eigen::VectorXcd& x,
                        const Eigen::VectorXcd& y, Real tol = 1e-10);

struct VirtualCodimension {
    int index = 0;        // dim ker - dim coker of P2 P1 : ran P1 -> ran P2
    int rank = 0;
    Eigen::MatrixXcd kernel_basis;  // columns: ker of the restricted map, in ambient coords
};

/// i(P2, P1) computed by singular values of the restricted map; throws
/// IllConditioned when singular values cluster at the tolerance.
VirtualCodimension virtual_codimension(const ProjectionMatrix& p2, const ProjectionMatrix& p1,
                                       Real tol = 1e-8);

}  // namespace etalab::boundary
