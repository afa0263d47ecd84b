#include "etalab/eta.hpp"

#include <algorithm>

#include "etalab/quadrature.hpp"
#include "etalab/special.hpp"

namespace etalab::eta {

namespace {

std::vector<Real> expanded(const modes::Spectrum& s) {
    std::vector<Real> v;
    for (const auto& e : s.entries)
        for (int m = 0; m < e.multiplicity; ++m) v.push_back(e.mu);
    std::sort(v.begin(), v.end());
    return v;
}

/// Smallest |mu| whose -mu partner is missing (infinity when the multiset is
/// symmetric); pair matching tolerance scales with |mu|.
Real unpaired_gap(const std::vector<Real>& all, Real zero_band) {
    std::vector<Real> neg, pos;
    for (Real mu : all) {
        if (std::abs(mu) <= zero_band) continue;
        (mu < 0 ? neg : pos).push_back(std::abs(mu));
    }
    std::sort(neg.begin(), neg.end());
    std::sort(pos.begin(), pos.end());
    Real gap = std::numeric_limits<Real>::infinity();
    size_t i = 0, j = 0;
    auto tol = [](Real x) { return 1e-6 * std::max<Real>(1, x); };
    while (i < neg.size() && j < pos.size()) {
        if (std::abs(neg[i] - pos[j]) <= tol(neg[i])) {
            ++i;
            ++j;
        } else if (neg[i] < pos[j]) {
            gap = std::min(gap, neg[i++]);
        } else {
            gap = std::min(gap, pos[j++]);
        }
    }
    while (i < neg.size()) gap = std::min(gap, neg[i++]);
    while (j < pos.size()) gap = std::min(gap, pos[j++]);
    return gap;
}

struct DifferenceIntegral {
    Real value = 0;
    Real error = 0;
    Real t_max = 0;
};

// (1/sqrt(pi)) integral_0^inf t^{-1/2} [ S_A(t) - S_B(t) ] dt, with the
// spectra supplied as weighted mu lists (weight +-1 per source spectrum).
DifferenceIntegral heat_difference_integral(const std::vector<std::pair<Real, Real>>& weighted_mu,
                                            const model::EtaIntegration& opts, Real gap) {
    auto delta = [&](Real t) {
        Real s = 0;
        for (const auto& [mu, w] : weighted_mu) s += w * mu * std::exp(-t * mu * mu);
        return s;
    };
    DifferenceIntegral out;
    const Real split = opts.t_split;
    // t in (0, split]: substitute t = x^2
    auto small_part = quadrature::gauss_with_refinement(
        [&](Real x) { return 2.0 * delta(x * x); }, 0.0, std::sqrt(split), opts.panels_small,
        opts.gauss_points);
    // t in [split, t_max]: log-spaced panels against the spectral-gap decay
    const Real gap_eff = std::min(std::max(gap, 0.35), 50.0);
    const Real t_max = std::max(split * 4, opts.tail_log_eps / (gap_eff * gap_eff));
    out.t_max = t_max;
    const Real ratio = std::pow(t_max / split, 1.0 / opts.panels_large);
    Real value_large = 0, err_large = 0;
    Real t0 = split;
    for (int p = 0; p < opts.panels_large; ++p) {
        const Real t1 = t0 * ratio;
        auto seg = quadrature::gauss_with_refinement(
            [&](Real t) { return delta(t) / std::sqrt(t); }, t0, t1, 1, opts.gauss_points);
        value_large += seg.value;
        err_large += seg.error_estimate;
        t0 = t1;
    }
    Real tail_bound = 0;
    for (const auto& [mu, w] : weighted_mu) {
        (void)w;
        if (std::abs(mu) > 1e-14) tail_bound += 0.5 * special::erfc(std::abs(mu) * std::sqrt(t_max));
    }
    out.value = (small_part.value + value_large) / std::sqrt(kPi);
    out.error = (small_part.error_estimate + err_large) / std::sqrt(kPi) + tail_bound;
    return out;
}

void check_compatible(const modes::Spectrum& a, const modes::Spectrum& b) {
    if (a.cutoff != b.cutoff)
        fail(ErrorCode::CutoffMismatch, "spectra computed at different mode cutoffs");
    if (a.method != b.method)
        fail(ErrorCode::CutoffMismatch, "spectra computed by different methods");
    if (a.method == modes::Method::Discretized && a.grid_points != b.grid_points)
        fail(ErrorCode::CutoffMismatch, "spectra computed at different grid resolutions");
    if (a.method == modes::Method::Analytic && a.window != b.window)
        fail(ErrorCode::CutoffMismatch, "spectra computed over different mu windows");
}

std::vector<std::pair<Real, Real>> weighted_union(const modes::Spectrum& a, Real wa,
                                                  const modes::Spectrum& b, Real wb,
                                                  Real drop_below) {
    std::vector<std::pair<Real, Real>> out;
    for (const auto& e : a.entries)
        if (std::abs(e.mu) > drop_below) out.emplace_back(e.mu, wa * e.multiplicity);
    for (const auto& e : b.entries)
        if (std::abs(e.mu) > drop_below) out.emplace_back(e.mu, wb * e.multiplicity);
    return out;
}

}  // namespace

Real heat_trace_sum(const modes::Spectrum& s, Real t) {
    Real sum = 0;
    for (const auto& e : s.entries) sum += e.multiplicity * e.mu * std::exp(-t * e.mu * e.mu);
    return sum;
}

EtaResult eta_difference(const modes::Spectrum& a, const modes::Spectrum& b,
                         const model::EtaIntegration& opts, Real kernel_tol) {
    check_compatible(a, b);
    for (const auto* s : {&a, &b})
        for (const auto& e : s->entries)
            if (std::abs(e.mu) < 10 * kernel_tol)
                fail(ErrorCode::KernelPresent,
                     "eigenvalue " + std::to_string(e.mu) + " too close to zero for eta");
    const auto mus_a = expanded(a), mus_b = expanded(b);
    std::vector<Real> all(mus_a);
    all.insert(all.end(), mus_b.begin(), mus_b.end());
    EtaResult res;
    res.unpaired_gap = std::min(unpaired_gap(mus_a, 0), unpaired_gap(mus_b, 0));
    const auto integral =
        heat_difference_integral(weighted_union(a, +1, b, -1, 0), opts, res.unpaired_gap);
    res.value = integral.value;
    res.error_estimate = integral.error;
    res.t_max = integral.t_max;
    return res;
}

McKeanResult mckean_singer(const model::Scenario& scenario, const std::vector<Real>& t_samples) {
    const auto* c = std::get_if<model::ConstantMass>(&scenario.mass);
    if (c == nullptr || c->value != 0.0)
        fail(ErrorCode::OddParityViolated, "McKean-Singer needs the massless odd-parity operator");
    if (t_samples.empty()) fail(ErrorCode::InvalidShape, "no t samples given");
    const modes::Spectrum spec = modes::solve_discretized(scenario);
    McKeanResult out;
    for (Real t : t_samples) {
        Real str = 0;
        for (size_t i = 0; i < spec.entries.size(); ++i)
            str += spec.chirality[i] * std::exp(-t * spec.entries[i].mu * spec.entries[i].mu);
        out.values.push_back(str);
    }
    const Real first = out.values.front();
    for (Real v : out.values) out.max_deviation = std::max(out.max_deviation, std::abs(v - first));
    if (out.max_deviation > 1e-6)
        fail(ErrorCode::NotConstantInT, "supertrace varies by " + std::to_string(out.max_deviation));
    out.index = static_cast<int>(std::llround(first));
    out.residual = std::abs(first - out.index);
    return out;
}

namespace {

/// Signs of the exact zero modes under an infinitesimal mass reduction
/// -eps Gamma_S: eigenvalues of the kernel-restricted matrix -<v_i, Gamma v_j>.
/// Per-block; degenerate multiplets are diagonalized together.
std::pair<int, int> zero_mode_signs(const model::Scenario& scenario, Real zero_band) {
    int count = 0, sign_sum = 0;
    for (const auto& block : modes::reduce(scenario)) {
        const auto probe =
            modes::solve_block_discretized(block, scenario.numerics.grid_points, false);
        bool any_zero = false;
        for (Real mu : probe.mu) any_zero |= (std::abs(mu) < zero_band);
        if (!any_zero) continue;
        const auto sys = modes::solve_block_discretized(block, scenario.numerics.grid_points);
        std::vector<int> zero_idx;
        for (size_t j = 0; j < sys.mu.size(); ++j)
            if (std::abs(sys.mu[j]) < zero_band) zero_idx.push_back(static_cast<int>(j));
        if (zero_idx.empty()) continue;
        const int nz = static_cast<int>(zero_idx.size());
        Eigen::MatrixXd gram(nz, nz);
        const int n1 = static_cast<int>(sys.c1_grid.size());
        const int dim = static_cast<int>(sys.vectors.rows());
        for (int a = 0; a < nz; ++a)
            for (int b = 0; b < nz; ++b) {
                Real g = 0;
                for (int i = 0; i < dim; ++i) {
                    const Real chir = (i < n1 ? 1.0 : -1.0) * block.chirality_c1;
                    g += -chir * sys.vectors(i, zero_idx[a]) * sys.vectors(i, zero_idx[b]);
                }
                gram(a, b) = g;
            }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        for (int a = 0; a < nz; ++a) {
            const Real s = es.eigenvalues()(a);
            ++count;
            if (s > 1e-9) ++sign_sum;
            else if (s < -1e-9) --sign_sum;
        }
    }
    return {count, sign_sum};
}

}  // namespace

EtaResult domain_wall_eta_difference(const model::Scenario& wall, const model::Scenario& reference,
                                     const DomainWallOptions& opts) {
    if (wall.bulk.index() != reference.bulk.index() ||
        wall.numerics.mode_cutoff != reference.numerics.mode_cutoff)
        fail(ErrorCode::CutoffMismatch, "wall and reference scenarios must share bulk and cutoff");

    const bool wall_smooth = std::holds_alternative<model::SmoothWall>(wall.mass);
    const bool ref_smooth = std::holds_alternative<model::SmoothWall>(reference.mass);
    modes::Spectrum sw, sr;
    if (wall_smooth || ref_smooth) {
        sw = modes::solve_discretized(wall, wall.numerics.grid_points, false);
        sr = modes::solve_discretized(reference, reference.numerics.grid_points, false);
    } else {
        sw = modes::solve_analytic(wall);
        sr = modes::solve_analytic(reference);
    }

    EtaResult res;
    const auto mus_w = expanded(sw), mus_r = expanded(sr);
    for (Real mu : mus_r)
        if (std::abs(mu) < opts.zero_band)
            fail(ErrorCode::KernelPresent, "reference operator is not gapped");
    res.unpaired_gap =
        std::min(unpaired_gap(mus_w, opts.zero_band), unpaired_gap(mus_r, opts.zero_band));
    if (res.unpaired_gap < opts.gap_min)
        fail(ErrorCode::SpectralGapAbsent,
             "unpaired eigenvalue at " + std::to_string(res.unpaired_gap) +
                 " spoils the heat tail; increase m");

    const auto integral = heat_difference_integral(
        weighted_union(sw, +1, sr, -1, opts.zero_band), wall.numerics.eta, res.unpaired_gap);
    const auto [nzero, sign_sum] = zero_mode_signs(wall, opts.zero_band);
    res.zero_modes = nzero;
    res.zero_mode_sign_sum = sign_sum;
    res.value = integral.value + sign_sum;
    res.error_estimate = integral.error;
    res.t_max = integral.t_max;
    return res;
}

GluingDefect gluing_defect(Real m, Real R, const GluingConfig& config) {
    if (m <= 0 || R <= 0) fail(ErrorCode::InvalidShape, "gluing defect needs m > 0, R > 0");
    GluingDefect out;
    out.R = R;
    out.m = m;

    auto make = [&](model::BulkShape shape, std::vector<model::BcLabel> labels) {
        model::Scenario s;
        s.boundary = config.boundary;
        s.bulk = shape;
        s.mass = model::ConstantMass{-m};
        for (model::BcLabel l : labels) s.bcs.ends.push_back({l, {}});
        s.numerics.mode_cutoff = config.mode_cutoff;
        s.numerics.mu_window = config.mu_window;
        s.numerics.eta = config.integration;
        return model::validate(s);
    };
    const Real piece_len = R + 1;
    const auto whole = make(model::DoubledCylinder{2 * R + 2}, {});
    const auto p1 = make(model::FiniteCylinder{piece_len},
                         {model::BcLabel::PiVMinus, model::BcLabel::PiVMinus});
    const auto p2 = make(model::FiniteCylinder{piece_len},
                         {model::BcLabel::PiVPlus, model::BcLabel::PiVMinus});

    out.whole = modes::solve_analytic(whole);
    out.piece_left = modes::solve_analytic(p1);
    out.piece_right = modes::solve_analytic(p2);

    Real gap = std::numeric_limits<Real>::infinity();
    for (const auto* s : {&out.whole, &out.piece_left, &out.piece_right})
        gap = std::min(gap, s->min_abs_mu());
    out.gap = gap;
    if (gap < config.gap_min)
        fail(ErrorCode::SpectralGapAbsent,
             "near-zero eigenvalue " + std::to_string(gap) + " in the gluing spectra");

    std::vector<std::pair<Real, Real>> weighted;
    for (const auto& e : out.whole.entries) weighted.emplace_back(e.mu, +1.0 * e.multiplicity);
    for (const auto& e : out.piece_left.entries) weighted.emplace_back(e.mu, -1.0 * e.multiplicity);
    for (const auto& e : out.piece_right.entries) weighted.emplace_back(e.mu, -1.0 * e.multiplicity);

    auto delta_fn = [&](Real t) {
        Real s = 0;
        for (const auto& [mu, w] : weighted) s += w * mu * std::exp(-t * mu * mu);
        return s;
    };
    const Real t_cut = std::pow(R, 2.0 - config.eps);
    auto small = quadrature::gauss_with_refinement(
        [&](Real x) { return 2.0 * delta_fn(x * x); }, 0.0, std::sqrt(t_cut),
        config.integration.panels_small, config.integration.gauss_points);
    out.delta_small = small.value / std::sqrt(kPi);

    const Real t_max = std::max(t_cut * 2, config.integration.tail_log_eps / (gap * gap));
    const Real ratio = std::pow(t_max / t_cut, 1.0 / config.integration.panels_large);
    Real large = 0, large_err = 0;
    Real t0 = t_cut;
    for (int p = 0; p < config.integration.panels_large; ++p) {
        const Real t1 = t0 * ratio;
        auto seg = quadrature::gauss_with_refinement(
            [&](Real t) { return delta_fn(t) / std::sqrt(t); }, t0, t1, 1,
            config.integration.gauss_points);
        large += seg.value;
        large_err += seg.error_estimate;
        t0 = t1;
    }
    out.delta_large = large / std::sqrt(kPi);
    out.delta = out.delta_small + out.delta_large;
    out.error_estimate = (small.error_estimate + large_err) / std::sqrt(kPi) +
                         special::erfc(gap * std::sqrt(t_max));
    return out;
}

}  // namespace etalab::eta
