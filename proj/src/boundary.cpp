#include "etalab/boundary.hpp"

#include <algorithm>

namespace etalab::boundary {

namespace {

constexpr Real kZeroTol = 1e-12;

int find_entry(const BoundaryEigendata& data, int fourier_k, int component) {
    for (int i = 0; i < data.dim(); ++i)
        if (data.entries[i].fourier_k == fourier_k && data.entries[i].component == component)
            return i;
    return -1;
}

}  // namespace

BoundaryEigendata eigendata(const model::BoundaryModel& boundary, int cutoff) {
    BoundaryEigendata data;
    data.boundary = boundary;
    data.cutoff = cutoff;
    const Real alpha = boundary.flux;
    const Real window = cutoff + 0.5;
    // Component 0 carries eigenvalue k - alpha, component 1 carries -(k - alpha);
    // the window in |lambda| keeps the truncation gamma- and Gamma_S-closed.
    const int k_lo = static_cast<int>(std::floor(alpha - window)) - 1;
    const int k_hi = static_cast<int>(std::ceil(alpha + window)) + 1;
    for (int k = k_lo; k <= k_hi; ++k) {
        const Real lam = k - alpha;
        if (std::abs(lam) > window) continue;
        data.entries.push_back({lam, k, 0, +1});
        data.entries.push_back({-lam, k, 1, -1});
    }
    std::sort(data.entries.begin(), data.entries.end(), [](const auto& a, const auto& b) {
        if (a.lambda != b.lambda) return a.lambda < b.lambda;
        if (a.fourier_k != b.fourier_k) return a.fourier_k < b.fourier_k;
        return a.component < b.component;
    });
    for (int i = 0; i < data.dim(); ++i) {
        if (std::abs(data.entries[i].lambda) < kZeroTol) {
            data.kernel_indices.push_back(i);
            if (data.entries[i].chirality > 0) ++data.n_plus;
        }
    }
    return data;
}

Eigen::MatrixXcd gamma_matrix(const BoundaryEigendata& data) {
    const int n = data.dim();
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(n, n);
    const Complex I(0, 1);
    for (int j = 0; j < n; ++j) {
        const auto& e = data.entries[j];
        const int partner = find_entry(data, e.fourier_k, 1 - e.component);
        if (partner < 0) fail(ErrorCode::InvalidShape, "truncation not gamma-closed");
        g(partner, j) = I;  // gamma e_{k,c} = i e_{k,1-c}
    }
    return g;
}

Eigen::MatrixXcd gamma_s_matrix(const BoundaryEigendata& data) {
    Eigen::MatrixXcd g = Eigen::MatrixXcd::Zero(data.dim(), data.dim());
    for (int j = 0; j < data.dim(); ++j) g(j, j) = data.entries[j].chirality;
    return g;
}

Eigen::MatrixXcd dy_matrix(const BoundaryEigendata& data) {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(data.dim(), data.dim());
    for (int j = 0; j < data.dim(); ++j) d(j, j) = data.entries[j].lambda;
    return d;
}

ProjectionMatrix projection(const BoundaryEigendata& data, ProjLabel label) {
    const int n = data.dim();
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
    auto diag = [&](auto pred, const char* name) {
        for (int j = 0; j < n; ++j)
            if (pred(data.entries[j])) p(j, j) = 1.0;
        return ProjectionMatrix{p, name};
    };
    switch (label) {
        case ProjLabel::PGreater:
            return diag([](const BoundaryEntry& e) { return e.lambda > kZeroTol; }, "P_>");
        case ProjLabel::PLess:
            return diag([](const BoundaryEntry& e) { return e.lambda < -kZeroTol; }, "P_<");
        case ProjLabel::PZero:
            return diag([](const BoundaryEntry& e) { return std::abs(e.lambda) < kZeroTol; }, "P_0");
        case ProjLabel::PGeq:
            return diag([](const BoundaryEntry& e) { return e.lambda > -kZeroTol; }, "P_>=");
        case ProjLabel::PiVPlus:
            return diag(
                [](const BoundaryEntry& e) {
                    return e.lambda > kZeroTol ||
                           (std::abs(e.lambda) < kZeroTol && e.chirality > 0);
                },
                "Pi_V+");
        case ProjLabel::PiVMinus:
            return diag(
                [](const BoundaryEntry& e) {
                    return e.lambda < -kZeroTol ||
                           (std::abs(e.lambda) < kZeroTol && e.chirality < 0);
                },
                "Pi_V-");
        case ProjLabel::PrVPlus:
            return diag(
                [](const BoundaryEntry& e) {
                    return std::abs(e.lambda) < kZeroTol && e.chirality > 0;
                },
                "pr_V+");
        case ProjLabel::PrVMinus:
            return diag(
                [](const BoundaryEntry& e) {
                    return std::abs(e.lambda) < kZeroTol && e.chirality < 0;
                },
                "pr_V-");
    }
    fail(ErrorCode::InvalidShape, "unhandled projection label");
}

ProjectionMatrix lagrangian_projection(const BoundaryEigendata& data,
                                       const std::vector<Complex>& pair_coeffs) {
    if (static_cast<int>(pair_coeffs.size()) != 2 * data.n_plus)
        fail(ErrorCode::InvalidLagrangian, "expected (a, b) coefficients per kernel pair");
    const int n = data.dim();
    Eigen::MatrixXcd p = Eigen::MatrixXcd::Zero(n, n);
    // Kernel pairs: (psi_i, gamma psi_i) with psi_i the chirality +1 kernel
    // sections in section_id order; gamma psi_i = i * (partner component).
    int pair = 0;
    for (int idx : data.kernel_indices) {
        if (data.entries[idx].chirality <= 0) continue;
        const int psi = idx;
        const int partner = find_entry(data, data.entries[idx].fourier_k, 1);
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(n);
        v(psi) = pair_coeffs[2 * pair];
        v(partner) = Complex(0, 1) * pair_coeffs[2 * pair + 1];  // b * gamma psi
        v.normalize();
        p += v * v.adjoint();
        ++pair;
    }
    return ProjectionMatrix{p, "pr_L"};
}

Complex symplectic_form(const BoundaryEigendata& data, const Eigen::VectorXcd& x,
                        const Eigen::VectorXcd& y, Real tol) {
    if (x.size() != data.dim() || y.size() != data.dim())
        fail(ErrorCode::NotInKernel, "vector dimension does not match the truncation");
    for (int j = 0; j < data.dim(); ++j) {
        if (std::abs(data.entries[j].lambda) >= kZeroTol &&
            (std::abs(x(j)) > tol || std::abs(y(j)) > tol))
            fail(ErrorCode::NotInKernel, "input has components outside ker D_Y");
    }
    const Eigen::MatrixXcd g = gamma_matrix(data);
    return (g * x).dot(y);  // Eigen's dot conjugates the left argument
}

VirtualCodimension virtual_codimension(const ProjectionMatrix& p2, const ProjectionMatrix& p1,
                                       Real tol) {
    if (p1.mat.rows() != p2.mat.rows())
        fail(ErrorCode::CutoffMismatch, "projections act on different truncations");
    auto range_basis = [&](const Eigen::MatrixXcd& p) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p);
        const int n = static_cast<int>(p.rows());
        std::vector<int> cols;
        for (int j = 0; j < n; ++j)
            if (es.eigenvalues()(j) > 0.5) cols.push_back(j);
        Eigen::MatrixXcd basis(n, cols.size());
        for (size_t c = 0; c < cols.size(); ++c) basis.col(c) = es.eigenvectors().col(cols[c]);
        return basis;
    };
    const Eigen::MatrixXcd u1 = range_basis(p1.mat);
    const Eigen::MatrixXcd u2 = range_basis(p2.mat);
    const Eigen::MatrixXcd m = u2.adjoint() * u1;  // P2 P1 : ran P1 -> ran P2
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeFullV);
    int rank = 0;
    for (int j = 0; j < svd.singularValues().size(); ++j) {
        const Real s = svd.singularValues()(j);
        if (s >= tol && s < 10.0 * tol)
            fail(ErrorCode::IllConditioned,
                 "singular value " + std::to_string(s) + " clusters at the tolerance");
        if (s >= 10.0 * tol) ++rank;
    }
    VirtualCodimension out;
    out.rank = rank;
    const int r1 = static_cast<int>(u1.cols()), r2 = static_cast<int>(u2.cols());
    out.index = (r1 - rank) - (r2 - rank);
    const int null_dim = r1 - rank;
    out.kernel_basis = Eigen::MatrixXcd(p1.mat.rows(), null_dim);
    for (int j = 0; j < null_dim; ++j)
        out.kernel_basis.col(j) = u1 * svd.matrixV().col(rank + j);
    return out;
}

}  // namespace etalab::boundary
