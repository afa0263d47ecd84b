#include "etalab/harness.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <algorithm>
#include <atomic>
#include <thread>

#include <json.hpp>

#include "etalab/eta.hpp"
#include "etalab/heat.hpp"
#include "etalab/quadrature.hpp"
#include "etalab/special.hpp"

namespace etalab::harness {

namespace {

using model::BcLabel;
using model::Scenario;

std::string fmt(Real x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

Scenario cylinder(Real alpha, int K, int N, model::MassProfile mass, BcLabel left, BcLabel right,
                  Real length = 1.0) {
    Scenario s;
    s.boundary.flux = alpha;
    s.bulk = model::FiniteCylinder{length};
    s.mass = mass;
    s.bcs.ends = {{left, {}}, {right, {}}};
    s.numerics.mode_cutoff = K;
    s.numerics.grid_points = N;
    return model::validate(s);
}

Scenario doubled(Real alpha, int K, int N, model::MassProfile mass, Real circumference = 2.0) {
    Scenario s;
    s.boundary.flux = alpha;
    s.bulk = model::DoubledCylinder{circumference};
    s.mass = mass;
    s.numerics.mode_cutoff = K;
    s.numerics.grid_points = N;
    return model::validate(s);
}

int n_plus_of(Real alpha, int K) { return boundary::eigendata({2 * kPi, alpha}, K).n_plus; }

ExperimentResult make_result(const std::string& id, const std::string& desc, Real lhs, Real rhs,
                             Real tol) {
    ExperimentResult r;
    r.id = id;
    r.description = desc;
    r.lhs = lhs;
    r.rhs = rhs;
    r.residual = std::abs(lhs - rhs);
    r.tolerance = tol;
    r.pass = r.residual <= tol;
    return r;
}

// ---------------------------------------------------------------------------

ExperimentResult run_aps_index(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    const int K = o.K.value_or(4), N = o.N.value_or(200);
    const auto scen = cylinder(alpha, K, N, model::ConstantMass{0.0}, BcLabel::PiVPlus,
                               BcLabel::PiVMinus);
    const int n_plus = n_plus_of(alpha, K);
    const auto report = modes::kernel(scen);
    const int ind = modes::index(scen);
    auto r = make_result("aps-index",
                         "index of the spectral-condition cylinder equals -dim V_+, kernel spanned "
                         "by the gamma psi directions",
                         ind, -n_plus, 0.0);
    Real worst = r.residual;
    worst = std::max(worst, std::abs<Real>(report.dimension - n_plus));
    for (const auto& el : report.elements) worst = std::max(worst, std::abs(el.chirality + 1.0));
    r.residual = worst;
    r.tolerance = 1e-6;
    r.pass = worst <= r.tolerance;
    r.params = {{"alpha", alpha}, {"K", Real(K)}, {"N", Real(N)}};
    r.notes.push_back("kernel dimension " + std::to_string(report.dimension) + ", trace raw " +
                      fmt(report.chirality_trace_raw));
    return r;
}

Real spectrum_residual(Real alpha, int K, int N, Real window, std::vector<std::string>* notes) {
    const auto scen =
        cylinder(alpha, K, N, model::ConstantMass{0.0}, BcLabel::PiVPlus, BcLabel::PiVMinus);
    auto scen_a = scen;
    scen_a.numerics.mu_window = window + 0.5;
    const auto analytic = modes::solve_analytic(scen_a);
    const auto disc = modes::solve_discretized(scen, N);
    const auto match = modes::match_spectra(analytic, disc, window, 5e-2);
    if (!match.unmatched_a.empty() || !match.unmatched_b.empty()) {
        if (notes)
            notes->push_back("unmatched eigenvalues: " + std::to_string(match.unmatched_a.size()) +
                             " analytic, " + std::to_string(match.unmatched_b.size()) +
                             " discretized");
        return 1.0;
    }
    if (notes) notes->push_back("N=" + std::to_string(N) + " max deviation " + fmt(match.max_deviation));
    return match.max_deviation;
}

ExperimentResult run_eq223(const Overrides& o) {
    const int N = o.N.value_or(400);
    ExperimentResult r = make_result(
        "eq-223-spectrum",
        "analytic and discretized spectra of the massless cylinder agree; kernel ladder mu = pi j",
        0, 0, 1e-3);
    r.residual = spectrum_residual(o.alpha.value_or(0.0), o.K.value_or(3), N, 10.0, &r.notes);
    r.lhs = r.residual;
    r.pass = r.residual <= r.tolerance;
    r.params = {{"K", Real(o.K.value_or(3))}, {"N", Real(N)}};
    return r;
}

ExperimentResult run_eq223_convergence(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    const int K = o.K.value_or(3);
    std::vector<std::string> notes;
    const Real r100 = spectrum_residual(alpha, K, 100, 10.0, &notes);
    const Real r200 = spectrum_residual(alpha, K, 200, 10.0, &notes);
    const Real r400 = spectrum_residual(alpha, K, 400, 10.0, &notes);
    const Real order1 = std::log2(r100 / r200);
    const Real order2 = std::log2(r200 / r400);
    auto r = make_result("eq-223-convergence",
                         "discretized spectra converge at second order in the grid spacing",
                         0.5 * (order1 + order2), 2.0, 0.5);
    r.notes = notes;
    r.notes.push_back("orders " + fmt(order1) + ", " + fmt(order2));
    r.params = {{"K", Real(K)}};
    return r;
}

ExperimentResult run_t2(const Overrides& o) {
    const Real m = o.m.value_or(5.0);
    const Real alpha = o.alpha.value_or(0.0);
    const int K = o.K.value_or(3), N = o.N.value_or(256);
    const auto plus =
        cylinder(alpha, K, N, model::ConstantMass{+m}, BcLabel::PiVPlus, BcLabel::PiVMinus);
    const auto minus =
        cylinder(alpha, K, N, model::ConstantMass{-m}, BcLabel::PiVPlus, BcLabel::PiVMinus);
    const auto sp = modes::solve_analytic(plus);
    const auto sm = modes::solve_analytic(minus);
    const auto diff = eta::eta_difference(sp, sm, plus.numerics.eta);
    const int ind = modes::index(
        cylinder(alpha, K, N, model::ConstantMass{0.0}, BcLabel::PiVPlus, BcLabel::PiVMinus));
    auto r = make_result("thm-t2-cylinder",
                         "half the Pauli-Villars eta difference equals the cylinder index",
                         0.5 * diff.value, ind, 1e-3);
    r.params = {{"m", m}, {"alpha", alpha}, {"K", Real(K)}};
    r.notes.push_back("eta difference error estimate " + fmt(diff.error_estimate));
    return r;
}

ExperimentResult run_t3(const Overrides& o, bool invertible) {
    const Real alpha = invertible ? o.alpha.value_or(0.5) : o.alpha.value_or(0.0);
    const Real m = o.m.value_or(10.0), T = o.T.value_or(20.0);
    const int K = o.K.value_or(2), N = o.N.value_or(512);
    const auto wall = doubled(alpha, K, N, model::SmoothWall{m, T});
    const auto pv = doubled(alpha, K, N, model::ConstantMass{-m});
    const auto diff = eta::domain_wall_eta_difference(wall, pv);
    const int n_plus = n_plus_of(alpha, K);
    const int ind = modes::index(
        cylinder(alpha, K, N, model::ConstantMass{0.0}, BcLabel::PiVPlus, BcLabel::PiVMinus));
    auto r = make_result(invertible ? "thm-t3-invertible" : "thm-t3-domainwall",
                         "half the domain-wall eta difference minus dim V_+ equals the index",
                         0.5 * diff.value - n_plus, ind, 2e-3);
    r.params = {{"alpha", alpha}, {"m", m}, {"T", T}, {"K", Real(K)}, {"N", Real(N)}};
    r.notes.push_back("wall zero modes " + std::to_string(diff.zero_modes) + ", sign sum " +
                      std::to_string(diff.zero_mode_sign_sum));
    r.notes.push_back("eta difference " + fmt(diff.value) + " +- " + fmt(diff.error_estimate));
    return r;
}

ExperimentResult run_t9(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    const Real m = o.m.value_or(10.0), T = o.T.value_or(20.0);
    const int K = o.K.value_or(2), N = o.N.value_or(500);
    const auto wall =
        cylinder(alpha, K, N, model::SmoothWall{m, T}, BcLabel::PiVPlus, BcLabel::PiVMinus);
    const auto cst =
        cylinder(alpha, K, N, model::ConstantMass{+m}, BcLabel::PiVPlus, BcLabel::PiVMinus);
    const auto diff = eta::domain_wall_eta_difference(wall, cst);
    const int ind = modes::index(
        cylinder(alpha, K, N, model::ConstantMass{0.0}, BcLabel::PiVPlus, BcLabel::PiVMinus));
    auto r = make_result("thm-t9-wall-vs-const",
                         "wall-versus-constant eta difference equals -2 times the cylinder index",
                         diff.value, -2.0 * ind, 2e-3);
    r.params = {{"alpha", alpha}, {"m", m}, {"T", T}, {"K", Real(K)}, {"N", Real(N)}};
    r.notes.push_back("wall zero modes " + std::to_string(diff.zero_modes) + ", sign sum " +
                      std::to_string(diff.zero_mode_sign_sum));
    return r;
}

ExperimentResult run_t9_stability(const Overrides& o) {
    Overrides a = o, b = o;
    a.T = o.T.value_or(10.0);
    b.T = 2.0 * a.T.value();
    const auto ra = run_t9(a);
    const auto rb = run_t9(b);
    auto r = make_result("thm-t9-t-stability",
                         "the wall eta difference is stable under sharpening the wall profile",
                         ra.lhs, rb.lhs, 1e-3);
    r.params = {{"T1", a.T.value()}, {"T2", b.T.value()}};
    return r;
}

ExperimentResult run_l2_codim(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    std::vector<int> cutoffs = {4, 16, 64};
    if (o.K) cutoffs = {*o.K};
    Real worst = 0;
    int n_plus = 0;
    std::vector<std::string> notes;
    for (int K : cutoffs) {
        const auto data = boundary::eigendata({2 * kPi, alpha}, K);
        n_plus = data.n_plus;
        const auto piv = boundary::projection(data, boundary::ProjLabel::PiVPlus);
        const auto pgeq = boundary::projection(data, boundary::ProjLabel::PGeq);
        const auto vc = boundary::virtual_codimension(piv, pgeq);
        worst = std::max(worst, std::abs<Real>(vc.index - data.n_plus));
        // T = Pi_{V+} P_>= + (1 - Pi_{V+})(1 - P_>=) must equal 1 - pr_{V-}
        const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(data.dim(), data.dim());
        const Eigen::MatrixXcd tmat =
            piv.mat * pgeq.mat + (id - piv.mat) * (id - pgeq.mat);
        const Eigen::MatrixXcd expect =
            id - boundary::projection(data, boundary::ProjLabel::PrVMinus).mat;
        worst = std::max(worst, (tmat - expect).norm());
        // kernel of the restricted map is V_-
        const auto prvm = boundary::projection(data, boundary::ProjLabel::PrVMinus);
        for (int j = 0; j < vc.kernel_basis.cols(); ++j) {
            const Eigen::VectorXcd v = vc.kernel_basis.col(j);
            worst = std::max(worst, (prvm.mat * v - v).norm());
        }
        notes.push_back("K=" + std::to_string(K) + " codimension " + std::to_string(vc.index));
    }
    auto r = make_result("lemma-l2-codim",
                         "virtual codimension of the Lagrangian projection in the nonnegative "
                         "spectral projection equals dim V_+",
                         worst, 0.0, 1e-10);
    r.notes = notes;
    r.params = {{"alpha", alpha}, {"n_plus", Real(n_plus)}};
    return r;
}

ExperimentResult run_t5_pgeq(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    const int K = o.K.value_or(4), N = o.N.value_or(200);
    const int ind_v = modes::index(
        cylinder(alpha, K, N, model::ConstantMass{0.0}, BcLabel::PiVPlus, BcLabel::PiVMinus));
    const int ind_p = modes::index(
        cylinder(alpha, K, N, model::ConstantMass{0.0}, BcLabel::PGeq, BcLabel::PGeq));
    const int n_plus = n_plus_of(alpha, K);
    auto r = make_result("thm-t5-pgeq",
                         "switching the Lagrangian condition to the nonnegative spectral "
                         "projection shifts the index by dim V_+",
                         Real(ind_v - ind_p), -Real(n_plus), 0.0);
    r.params = {{"alpha", alpha}, {"K", Real(K)}};
    r.notes.push_back("index with Lagrangian condition " + std::to_string(ind_v) +
                      ", with nonnegative projection " + std::to_string(ind_p));
    return r;
}

eta::GluingConfig gluing_config(Real alpha, int K) {
    eta::GluingConfig cfg;
    cfg.boundary = {2 * kPi, alpha};
    cfg.mode_cutoff = K;
    cfg.mu_window = 24;
    return cfg;
}

ExperimentResult run_p1_rsweep(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    const Real m = o.m.value_or(10.0), R = o.R.value_or(1.0);
    const int K = o.K.value_or(3);
    const auto defect = eta::gluing_defect(m, R, gluing_config(alpha, K));
    const int n_plus = n_plus_of(alpha, K);
    auto r = make_result("prop-p1-rsweep",
                         "gluing defect of the cut doubled cylinder equals -dim V_+, "
                         "independent of the neck half-length",
                         defect.delta, -Real(n_plus), 2e-3);
    r.params = {{"alpha", alpha}, {"m", m}, {"R", R}, {"K", Real(K)}};
    r.notes.push_back("delta split " + fmt(defect.delta_small) + " + " + fmt(defect.delta_large) +
                      ", gap " + fmt(defect.gap));
    // large-time part against the gap bound, evaluated with the measured gap
    const Real eps = 0.1;
    const Real bound = std::pow(R, eps / 2) *
                       std::exp(-defect.gap * defect.gap * std::pow(R, 2.0 - eps));
    if (std::abs(defect.delta_large) > bound + 1e-12) {
        r.pass = false;
        r.notes.push_back("large-time part " + fmt(defect.delta_large) + " exceeds bound " +
                          fmt(bound));
    } else {
        r.notes.push_back("large-time part " + fmt(defect.delta_large) + " within bound " +
                          fmt(bound));
    }
    return r;
}

ExperimentResult run_p2_gap(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    const Real m = o.m.value_or(10.0);
    const int K = o.K.value_or(3);
    Real c0 = std::numeric_limits<Real>::infinity();
    std::vector<std::string> notes;
    for (Real R : {1.0, 2.0, 4.0}) {
        const auto defect = eta::gluing_defect(m, R, gluing_config(alpha, K));
        c0 = std::min(c0, defect.gap);
        notes.push_back("R=" + fmt(R) + " gap " + fmt(defect.gap));
    }
    ExperimentResult r;
    r.id = "prop-p2-gap";
    r.description = "stretched-neck spectra stay uniformly away from zero";
    r.lhs = c0;
    r.rhs = 0.5;
    r.residual = std::max<Real>(0.0, 0.5 - c0);
    r.tolerance = 0.0;
    r.pass = r.residual <= r.tolerance;
    r.notes = notes;
    r.params = {{"alpha", alpha}, {"m", m}, {"K", Real(K)}};
    return r;
}

ExperimentResult run_l1_limits(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    const Real m = o.m.value_or(2.0), R = o.R.value_or(8.0);
    const int K = o.K.value_or(8);
    const Real s = 1e-3;
    const auto data = boundary::eigendata({2 * kPi, alpha}, K);
    const auto terms = heat::limit_terms(data, m, R, s);
    auto r = make_result("lemma-l1-limits",
                         "the regularized boundary-kernel t-integral reaches dim V_+ and the "
                         "cutoff-derivative term is negligible",
                         terms.a_term, Real(data.n_plus), 1e-3);
    r.residual = std::max(r.residual, std::abs(terms.g_term));
    r.pass = r.residual <= r.tolerance;
    r.params = {{"alpha", alpha}, {"m", m}, {"R", R}, {"s", s}, {"K", Real(K)}};
    r.notes.push_back("a-term " + fmt(terms.a_term) + ", g-term " + fmt(terms.g_term));
    return r;
}

ExperimentResult run_trace_zero(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    const int K = o.K.value_or(8);
    const auto data = boundary::eigendata({2 * kPi, alpha}, K);
    Real worst = 0;
    // Gamma_S-trace of the infinite-cylinder diagonal kernel vanishes
    for (Real t : {0.1, 0.5, 2.0}) {
        heat::CylinderKernelSpec spec{heat::CylinderVariant::Infinite, &data, 5.0, t};
        for (Real u : {-1.0, 0.0, 0.7}) {
            const auto diag = heat::kernel_eval_diagonal(spec, u, u);
            Real trace = 0;
            for (int j = 0; j < data.dim(); ++j) trace += data.entries[j].chirality * diag(j);
            worst = std::max(worst, std::abs(trace));
        }
    }
    // Theta(t) vanishes identically on the circle model
    for (int i = 0; i <= 40; ++i) {
        const Real t = std::pow(10.0, -2.0 + 3.0 * i / 40.0);
        worst = std::max(worst, std::abs(heat::theta(data, 10.0, t)));
    }
    auto r = make_result("eq-150-trace-zero",
                         "chirality traces of the cylinder heat kernels cancel exactly on the "
                         "circle model",
                         worst, 0.0, 1e-12);
    r.params = {{"alpha", alpha}, {"K", Real(K)}};
    return r;
}

ExperimentResult run_heat_oracles(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    const int K = o.K.value_or(4);
    const auto data = boundary::eigendata({2 * kPi, alpha}, K);
    std::vector<std::string> notes;
    Real score = 0;  // max over checks of observed / threshold
    auto check = [&](const std::string& name, Real observed, Real threshold) {
        score = std::max(score, std::abs(observed) / threshold);
        notes.push_back(name + " " + fmt(observed) + " (threshold " + fmt(threshold) + ")");
    };

    const Real m = 5.0, t = 0.3;
    // boundary-condition residuals of the half-cylinder kernels
    for (auto variant : {heat::CylinderVariant::HalfPlus, heat::CylinderVariant::HalfMinus}) {
        const Real sgn = (variant == heat::CylinderVariant::HalfPlus) ? 1.0 : -1.0;
        heat::CylinderKernelSpec spec{variant, &data, m, t};
        Real bc = 0, deriv = 0;
        const Real h = 1e-5;
        for (Real v : {0.4, 1.1}) {
            const auto at0 = heat::kernel_eval_diagonal(spec, 0.0, sgn * v);
            const auto at1 = heat::kernel_eval_diagonal(spec, sgn * h, sgn * v);
            const auto at2 = heat::kernel_eval_diagonal(spec, sgn * 2 * h, sgn * v);
            for (int j = 0; j < data.dim(); ++j) {
                const auto& e = data.entries[j];
                const bool dirichlet_row =
                    e.lambda > 1e-12 || (std::abs(e.lambda) < 1e-12 && e.chirality > 0);
                if (dirichlet_row) {
                    bc = std::max(bc, std::abs(at0(j)));
                } else {
                    // derivative condition rows: (d/du +- (D_Y + m gamma Gamma_S)) at
                    // u = 0, the sign matching the half-cylinder orientation
                    const Real du = sgn * (-1.5 * at0(j) + 2 * at1(j) - 0.5 * at2(j)) / h;
                    int partner = -1;
                    for (int i = 0; i < data.dim(); ++i)
                        if (data.entries[i].fourier_k == e.fourier_k &&
                            data.entries[i].component != e.component)
                            partner = i;
                    const Real res =
                        du + sgn * e.lambda * at0(j) + sgn * m * at0(partner);
                    deriv = std::max(deriv, std::abs(res));
                }
            }
        }
        check("bc residual", bc, 1e-8);
        check("bc derivative residual", deriv, 1e-6);
    }

    // heat-equation residual of the kernels, finite differences
    {
        heat::CylinderKernelSpec spec{heat::CylinderVariant::HalfPlus, &data, m, t};
        const Real hu = 2e-3, ht = 2e-4, u = 0.6, v = 0.9;
        Real worst = 0;
        for (int j = 0; j < data.dim(); ++j) {
            auto val = [&](Real uu, Real tt) {
                heat::CylinderKernelSpec s2 = spec;
                s2.time = tt;
                return heat::kernel_eval_diagonal(s2, uu, v)(j);
            };
            const Real lam = data.entries[j].lambda;
            const Real dt = (val(u, t + ht) - val(u, t - ht)) / (2 * ht);
            const Real duu = (val(u + hu, t) - 2 * val(u, t) + val(u - hu, t)) / (hu * hu);
            const Real res = dt - duu + (lam * lam + m * m) * val(u, t);
            worst = std::max(worst, std::abs(res));
        }
        check("heat-equation residual", worst, 1e-6);
    }

    // the two forms of the integrated cylinder trace defect agree
    {
        const auto d = heat::delta_c_integral(data, 2.0, 5.0, 0.3);
        check("trace-defect forms", d.direct - d.by_parts, 1e-8);
        for (Real lam : {1.0, 2.0}) {
            const auto p = heat::parts_identity(lam, 2.0, 0.3);
            check("integration-by-parts identity", p.lhs - p.rhs, 1e-8);
        }
        // limit of the defect at growing R: Theta - m e^{-m^2 t}(G + n_+ a) with a -> 1
        const Real limit = heat::theta(data, 5.0, 0.3) -
                           5.0 * std::exp(-25.0 * 0.3) * Real(data.n_plus);
        const auto dbig = heat::delta_c_integral(data, 8.0, 5.0, 0.3);
        check("defect large-R limit", dbig.direct - limit, 1e-6);
    }

    // half-cylinder trace against a long finite cylinder from the mode solver
    {
        model::Scenario s;
        s.boundary.flux = alpha;
        s.bulk = model::HalfCylinder{model::HalfCylinder::Side::Left, 8.0};
        s.mass = model::ConstantMass{-m};
        s.bcs.ends = {{BcLabel::PiVPlus, {}}};
        s.numerics.mode_cutoff = 3;
        s.numerics.grid_points = 640;
        s = model::validate(s);
        const Real tt = 0.5;
        Real disc_trace = 0;
        for (const auto& block : modes::reduce(s)) {
            const auto sys = modes::solve_block_discretized(block, s.numerics.grid_points);
            const Real h = block.length / s.numerics.grid_points;
            (void)h;
            for (size_t j = 0; j < sys.mu.size(); ++j)
                disc_trace += sys.chirality[j] * std::exp(-tt * sys.mu[j] * sys.mu[j]);
        }
        const auto data3 = boundary::eigendata({2 * kPi, alpha}, 3);
        heat::CylinderKernelSpec spec{heat::CylinderVariant::HalfPlus, &data3, m, tt};
        const Real closed = quadrature::adaptive_simpson(
            [&](Real u) { return heat::gamma_trace_half(spec, u); }, 0.0, 8.0, 1e-10);
        check("half-cylinder trace vs mode solver", disc_trace - closed, 1e-4);
    }

    ExperimentResult r;
    r.id = "heat-oracles";
    r.description = "closed-form cylinder kernels satisfy their boundary conditions, the heat "
                    "equation, and the traced identities";
    r.lhs = score;
    r.rhs = 0;
    r.residual = score;
    r.tolerance = 1.0;
    r.pass = score <= 1.0;
    r.notes = notes;
    r.params = {{"alpha", alpha}, {"K", Real(K)}};
    return r;
}

ExperimentResult run_mckean(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    const int K = o.K.value_or(3), N = o.N.value_or(200);
    const std::vector<Real> ts = {0.05, 0.2, 1.0};
    const auto bnd = eta::mckean_singer(
        cylinder(alpha, K, N, model::ConstantMass{0.0}, BcLabel::PiVPlus, BcLabel::PiVMinus), ts);
    const auto closed = eta::mckean_singer(doubled(alpha, K, 255, model::ConstantMass{0.0}), ts);
    const int n_plus = n_plus_of(alpha, K);
    auto r = make_result("mckean-singer",
                         "heat supertraces are t-independent and count the index",
                         Real(bnd.index), -Real(n_plus), 0.0);
    Real worst = std::max({r.residual, bnd.max_deviation, closed.max_deviation,
                           std::abs<Real>(closed.index)});
    r.residual = worst;
    r.tolerance = 1e-6;
    r.pass = worst <= r.tolerance;
    r.notes.push_back("boundary supertrace deviation " + fmt(bnd.max_deviation));
    r.notes.push_back("closed supertrace deviation " + fmt(closed.max_deviation) + ", index " +
                      std::to_string(closed.index));
    r.params = {{"alpha", alpha}, {"K", Real(K)}, {"N", Real(N)}};
    return r;
}

ExperimentResult run_t1_closed(const Overrides& o) {
    const Real alpha = o.alpha.value_or(0.0);
    const Real m = o.m.value_or(5.0);
    const int K = o.K.value_or(3);
    const auto plus = doubled(alpha, K, 255, model::ConstantMass{+m});
    const auto minus = doubled(alpha, K, 255, model::ConstantMass{-m});
    const auto diff =
        eta::eta_difference(modes::solve_analytic(plus), modes::solve_analytic(minus),
                            plus.numerics.eta);
    auto r = make_result("thm-t1-closed",
                         "on the closed doubled cylinder the Pauli-Villars eta difference and the "
                         "index both vanish",
                         0.5 * diff.value, 0.0, 1e-3);
    r.params = {{"alpha", alpha}, {"m", m}, {"K", Real(K)}};
    return r;
}

}  // namespace

const std::vector<Experiment>& registry() {
    static const std::vector<Experiment> experiments = {
        {"aps-index", "ind = -dim V_+ with kernel the gamma psi line",
         "index and kernel of the massless spectral-condition cylinder", {"alpha", "K", "N"},
         run_aps_index},
        {"eq-223-spectrum", "mu^2 = lambda^2 + (pi j)^2 ladder against the grid oracle",
         "two-route agreement of the massless cylinder spectra", {"alpha", "K", "N"}, run_eq223},
        {"eq-223-convergence", "second-order convergence of the grid oracle",
         "convergence study of the discretized spectra", {"alpha", "K"}, run_eq223_convergence},
        {"thm-t2-cylinder", "(eta_+ - eta_-)/2 = ind on the cylinder",
         "massive eta difference against the index", {"m", "alpha", "K"}, run_t2},
        {"thm-t3-domainwall", "ind = (eta_wall - eta_PV)/2 - dim V_+",
         "domain-wall eta formula on the doubled cylinder", {"m", "T", "K", "N"},
         [](const Overrides& o) { return run_t3(o, false); }},
        {"thm-t3-invertible", "ind = (eta_wall - eta_PV)/2 at invertible boundary",
         "domain-wall eta formula at half-integer flux", {"m", "T", "K", "N"},
         [](const Overrides& o) { return run_t3(o, true); }},
        {"thm-t9-wall-vs-const", "eta_wall - eta_const = -2 ind on the cylinder",
         "wall-versus-constant eta difference", {"m", "T", "K", "N"}, run_t9},
        {"thm-t9-t-stability", "wall eta difference is T-stable",
         "stability of the wall eta difference under wall sharpening", {"m", "K", "N", "T"},
         run_t9_stability},
        {"lemma-l2-codim", "i(Pi_{V+}, P_>=) = dim V_+ at every truncation",
         "virtual codimension of the projection pair", {"alpha", "K"}, run_l2_codim},
        {"thm-t5-pgeq", "ind_{V+} - ind_{P>=} = dim V_+",
         "index shift between the two boundary conditions", {"alpha", "K", "N"}, run_t5_pgeq},
        {"prop-p1-rsweep", "delta_{m,R} = -dim V_+ independent of R",
         "gluing defect of the cut doubled cylinder", {"m", "R", "K"}, run_p1_rsweep},
        {"prop-p2-gap", "min |mu| >= c_0 across stretched necks",
         "uniform spectral gap of the gluing spectra", {"m", "K"}, run_p2_gap},
        {"lemma-l1-limits", "regularized a-term integral -> dim V_+, G-term -> 0",
         "boundary-kernel limit integrals", {"m", "R", "K"}, run_l1_limits},
        {"eq-150-trace-zero", "chirality traces of cylinder kernels vanish",
         "exact trace cancellations of the circle model", {"alpha", "K"}, run_trace_zero},
        {"heat-oracles", "closed-form kernels solve their boundary value problems",
         "heat kernel consistency battery", {"alpha", "K"}, run_heat_oracles},
        {"mckean-singer", "str e^{-t D^2} is t-independent and integer",
         "McKean-Singer supertraces", {"alpha", "K", "N"}, run_mckean},
        {"thm-t1-closed", "closed-manifold eta difference vanishes with the index",
         "Pauli-Villars eta difference on the closed doubled cylinder", {"m", "alpha", "K"},
         run_t1_closed},
    };
    return experiments;
}

ExperimentResult run_experiment(const std::string& id, const Overrides& overrides) {
    for (const auto& e : registry()) {
        if (e.id != id) continue;
        const auto start = std::chrono::steady_clock::now();
        ExperimentResult r = e.run(overrides);
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              start)
                        .count();
        return r;
    }
    fail(ErrorCode::UnknownExperiment, "no experiment named '" + id + "'");
}

std::vector<ExperimentResult> run_all(const Overrides& overrides, int threads) {
    const auto& reg = registry();
    std::vector<ExperimentResult> results(reg.size());
    if (threads <= 1) {
        for (size_t i = 0; i < reg.size(); ++i) results[i] = run_experiment(reg[i].id, overrides);
        return results;
    }
    std::vector<std::thread> pool;
    std::atomic<size_t> next{0};
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (size_t i = next.fetch_add(1); i < reg.size(); i = next.fetch_add(1))
                results[i] = run_experiment(reg[i].id, overrides);
        });
    }
    for (auto& th : pool) th.join();
    return results;
}

SweepTable sweep(const std::string& parameter, const std::vector<Real>& values,
                 const std::string& id) {
    const Experiment* exp = nullptr;
    for (const auto& e : registry())
        if (e.id == id) exp = &e;
    if (exp == nullptr) fail(ErrorCode::UnknownExperiment, "no experiment named '" + id + "'");
    if (std::find(exp->sweepable.begin(), exp->sweepable.end(), parameter) == exp->sweepable.end())
        fail(ErrorCode::UnknownExperiment,
             "parameter '" + parameter + "' is not sweepable for " + id);
    SweepTable table;
    table.parameter = parameter;
    table.experiment_id = id;
    for (Real v : values) {
        Overrides o;
        if (parameter == "m") o.m = v;
        else if (parameter == "R") o.R = v;
        else if (parameter == "T") o.T = v;
        else if (parameter == "alpha") o.alpha = v;
        else if (parameter == "K") o.K = static_cast<int>(std::llround(v));
        else if (parameter == "N") o.N = static_cast<int>(std::llround(v));
        table.rows.push_back({v, run_experiment(id, o)});
    }
    for (const auto& row : table.rows)
        table.max_spread = std::max(table.max_spread, std::abs(row.result.lhs - table.rows[0].result.lhs));
    return table;
}

std::string report_json(const std::vector<ExperimentResult>& results, bool include_wall) {
    nlohmann::ordered_json report;
    report["schema"] = "etalab-report-v1";
    bool all_pass = true;
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (const auto& r : results) {
        nlohmann::ordered_json e;
        e["id"] = r.id;
        e["description"] = r.description;
        e["lhs"] = r.lhs;
        e["rhs"] = r.rhs;
        e["residual"] = r.residual;
        e["tolerance"] = r.tolerance;
        e["pass"] = r.pass;
        e["params"] = r.params;
        e["notes"] = r.notes;
        if (include_wall) e["wall_ms"] = r.wall_ms;
        out.push_back(e);
        all_pass &= r.pass;
    }
    report["all_pass"] = all_pass;
    report["experiments"] = out;
    return report.dump(2) + "\n";
}

std::string report_csv(const std::vector<ExperimentResult>& results) {
    std::ostringstream out;
    out << "id,lhs,rhs,residual,tolerance,pass\n";
    for (const auto& r : results)
        out << r.id << "," << fmt(r.lhs) << "," << fmt(r.rhs) << "," << fmt(r.residual) << ","
            << fmt(r.tolerance) << "," << (r.pass ? 1 : 0) << "\n";
    return out.str();
}

void write_report_dir(const std::string& out_dir, const std::vector<ExperimentResult>& results,
                      const std::string& format) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(out_dir) / "plots");
    if (format == "json" || format == "both") {
        std::ofstream(fs::path(out_dir) / "report.json") << report_json(results);
    }
    if (format == "csv" || format == "both") {
        std::ofstream(fs::path(out_dir) / "report.csv") << report_csv(results);
    }
    for (const auto& r : results) {
        std::ostringstream body;
        body << "key,value\n";
        body << "lhs," << fmt(r.lhs) << "\n";
        body << "rhs," << fmt(r.rhs) << "\n";
        body << "residual," << fmt(r.residual) << "\n";
        body << "tolerance," << fmt(r.tolerance) << "\n";
        body << "pass," << (r.pass ? 1 : 0) << "\n";
        for (const auto& [k, v] : r.params) body << k << "," << fmt(v) << "\n";
        std::ofstream(fs::path(out_dir) / (r.id + ".csv")) << body.str();
    }
}

}  // namespace etalab::harness
