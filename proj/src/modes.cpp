#include "etalab/modes.hpp"

#include "etalab/special.hpp"

#include <algorithm>
#include <cmath>

namespace etalab::modes {

namespace {

using model::BcLabel;
using model::Scenario;

struct DomainBox {
    Domain domain;
    Real u_min, length;
    std::vector<Real> wall_loci;  // interior breakpoints of piecewise masses
};

DomainBox domain_box(const Scenario& s) {
    if (const auto* fc = std::get_if<model::FiniteCylinder>(&s.bulk))
        return {Domain::Interval, -fc->length / 2, fc->length, {0.0}};
    if (const auto* dc = std::get_if<model::DoubledCylinder>(&s.bulk))
        return {Domain::Circle, -dc->circumference / 2, dc->circumference,
                {-dc->circumference / 4, dc->circumference / 4}};
    const auto& hc = std::get<model::HalfCylinder>(s.bulk);
    if (hc.side == model::HalfCylinder::Side::Left)
        return {Domain::Interval, 0.0, hc.length, {}};
    return {Domain::Interval, -hc.length, hc.length, {}};
}

// Kill pattern per block type and end orientation. Outgoing ends read the
// stated label through the orientation reversal (P_> <-> P_<, Lagrangian
// mapped through gamma); this is the Fredholm realization and reproduces the
// closed-form finite-cylinder spectra and kernel.
EndKill realize_kill(const model::BoundaryCondition& bc, bool ingoing, bool kernel_block) {
    EndKill k;
    if (!kernel_block) {
        // Continuous spectral part. At an ingoing end P_> kills the c1
        // coefficient and P_< kills c2; at an outgoing end every stated
        // label's continuous part reverses to a c2 kill.
        if (!ingoing) k.c2 = true;
        else if (bc.label == BcLabel::PiVMinus) k.c2 = true;
        else k.c1 = true;
        return k;
    }
    switch (bc.label) {
        case BcLabel::PiVPlus:
            (ingoing ? k.c1 : k.c2) = true;
            break;
        case BcLabel::PiVMinus:
            (ingoing ? k.c2 : k.c1) = true;
            break;
        case BcLabel::PGeq:
            k.c1 = true;
            k.c2 = true;
            break;
        case BcLabel::CustomLagrangian: {
            Complex a = bc.lagrangian[0], b = bc.lagrangian[1];
            if (!ingoing) {
                // gamma L: gamma(a psi + b gamma psi) = -b psi + a gamma psi
                const Complex a2 = -b, b2 = a;
                a = a2;
                b = b2;
            }
            // kill functional <v_L, value> = conj(a) c1 + conj(b) c2
            k.direction = std::make_pair(std::conj(a), std::conj(b));
            break;
        }
    }
    return k;
}

}  // namespace

std::vector<ModeBlock> reduce(const Scenario& s) {
    const auto data = boundary::eigendata(s.boundary, s.numerics.mode_cutoff);
    const DomainBox box = domain_box(s);

    model::BoundaryCondition bc_in, bc_out;
    if (box.domain == Domain::Interval) {
        if (const auto* hc = std::get_if<model::HalfCylinder>(&s.bulk)) {
            // The declared condition sits at the physical boundary; the far
            // end of the truncated half-cylinder gets the dual spectral
            // condition so the massive far tail is absorbed.
            if (hc->side == model::HalfCylinder::Side::Left) {
                bc_in = s.bcs.ends[0];
                bc_out.label = BcLabel::PiVMinus;
            } else {
                bc_out = s.bcs.ends[0];
                bc_in.label = BcLabel::PiVPlus;
            }
        } else {
            bc_in = s.bcs.ends[0];
            bc_out = s.bcs.ends[1];
        }
    }

    std::vector<ModeBlock> blocks;
    auto add_block = [&](Real lambda, int chirality_c1, bool is_kernel) {
        ModeBlock b;
        b.id = static_cast<int>(blocks.size());
        b.lambda = lambda;
        b.chirality_c1 = chirality_c1;
        b.is_kernel = is_kernel;
        b.domain = box.domain;
        b.u_min = box.u_min;
        b.length = box.length;
        const Scenario scen = s;  // copy for the closure
        const int sign = chirality_c1;
        b.block_mass = [scen, sign](Real u) { return sign * model::mass_at(scen, u); };
        if (!std::holds_alternative<model::SmoothWall>(s.mass)) {
            std::vector<Real> cuts = {box.u_min};
            for (Real w : box.wall_loci)
                if (w > box.u_min && w < box.u_min + box.length) cuts.push_back(w);
            cuts.push_back(box.u_min + box.length);
            for (size_t i = 0; i + 1 < cuts.size(); ++i) {
                MassRegion r{cuts[i], cuts[i + 1], 0};
                r.value = b.block_mass(0.5 * (r.u_begin + r.u_end));
                b.regions.push_back(r);
            }
        }
        if (box.domain == Domain::Interval) {
            b.kill_in = realize_kill(bc_in, true, is_kernel);
            b.kill_out = realize_kill(bc_out, false, is_kernel);
        }
        blocks.push_back(std::move(b));
    };

    for (const auto& e : data.entries)
        if (e.lambda > 1e-12) add_block(e.lambda, e.chirality, false);
    for (int i = 0; i < data.n_plus; ++i) add_block(0.0, +1, true);
    return blocks;
}

int Spectrum::total_count() const {
    int n = 0;
    for (const auto& e : entries) n += e.multiplicity;
    return n;
}

Real Spectrum::min_abs_mu(Real exclude_below) const {
    Real best = std::numeric_limits<Real>::infinity();
    for (const auto& e : entries)
        if (std::abs(e.mu) > exclude_below) best = std::min(best, std::abs(e.mu));
    return best;
}

// ---------------------------------------------------------------------------
// analytic route: transfer matrices and boundary determinants

namespace {

struct Mat2 {
    Real a11 = 1, a12 = 0, a21 = 0, a22 = 1;

    Mat2 operator*(const Mat2& o) const {
        return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
                a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
    }
    Real trace() const { return a11 + a22; }
    Real dist_from_identity() const {
        return std::sqrt((a11 - 1) * (a11 - 1) + a12 * a12 + a21 * a21 + (a22 - 1) * (a22 - 1));
    }
};

// exp(len * B) with B = [[-lambda, mu + M], [M - mu, lambda]], B^2 = w2 * Id.
Mat2 region_transfer(Real len, Real lambda, Real mass, Real mu) {
    const Real w2 = lambda * lambda + mass * mass - mu * mu;
    Real c, sl;  // cosh(w len), sinh(w len)/w continued through w^2 <= 0
    const Real x = w2 * len * len;
    if (std::abs(x) < 1e-10) {
        c = 1 + x / 2 + x * x / 24;
        sl = len * (1 + x / 6 + x * x / 120);
    } else if (w2 > 0) {
        const Real w = std::sqrt(w2);
        c = std::cosh(w * len);
        sl = std::sinh(w * len) / w;
    } else {
        const Real v = std::sqrt(-w2);
        c = std::cos(v * len);
        sl = std::sin(v * len) / v;
    }
    Mat2 t;
    t.a11 = c - sl * lambda;
    t.a12 = sl * (mu + mass);
    t.a21 = sl * (mass - mu);
    t.a22 = c + sl * lambda;
    return t;
}

Mat2 total_transfer(const ModeBlock& b, Real mu) {
    Mat2 t;
    for (const auto& r : b.regions)
        t = region_transfer(r.u_end - r.u_begin, b.lambda, r.value, mu) * t;
    return t;
}

// Allowed ingoing boundary direction and outgoing kill functional, realized
// as real 2-vectors (Lagrangian validation guarantees the phase freedom).
std::pair<Real, Real> realize_direction(const std::pair<Complex, Complex>& w) {
    Complex a = w.first, b = w.second;
    const Complex lead = (std::abs(a) >= std::abs(b)) ? a : b;
    const Complex phase = lead / std::abs(lead);
    a /= phase;
    b /= phase;
    return {a.real(), b.real()};
}

struct IntervalBoundaryData {
    Real vin1, vin2;  // allowed direction at the ingoing end
    Real rout1, rout2;  // kill functional at the outgoing end
};

IntervalBoundaryData interval_boundary_data(const ModeBlock& b) {
    IntervalBoundaryData d{};
    const EndKill& in = b.kill_in;
    if (in.direction) {
        auto [w1, w2] = realize_direction(*in.direction);
        d.vin1 = -w2;
        d.vin2 = w1;
    } else if (in.c1 && in.c2) {
        fail(ErrorCode::InvalidShape,
             "analytic route does not realize doubly-constrained ends; use the discretized oracle");
    } else if (in.c1) {
        d.vin1 = 0;
        d.vin2 = 1;
    } else {
        d.vin1 = 1;
        d.vin2 = 0;
    }
    const EndKill& out = b.kill_out;
    if (out.direction) {
        auto [w1, w2] = realize_direction(*out.direction);
        d.rout1 = w1;
        d.rout2 = w2;
    } else if (out.c1 && out.c2) {
        fail(ErrorCode::InvalidShape,
             "analytic route does not realize doubly-constrained ends; use the discretized oracle");
    } else if (out.c1) {
        d.rout1 = 1;
        d.rout2 = 0;
    } else {
        d.rout1 = 0;
        d.rout2 = 1;
    }
    return d;
}

Real bisect_root(const std::function<Real(Real)>& f, Real a, Real b, Real fa, Real fb) {
    if (fa == 0) return a;
    if (fb == 0) return b;
    if (fa * fb > 0) fail(ErrorCode::RootBracketFailure,
                          "no sign change in bracket [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]");
    for (int it = 0; it < 200; ++it) {
        const Real m = 0.5 * (a + b);
        const Real fm = f(m);
        if (fm == 0 || (b - a) < 1e-13 * std::max<Real>(1, std::abs(m))) return m;
        if (fa * fm <= 0) {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    return 0.5 * (a + b);
}

Real max_region_mass(const ModeBlock& b) {
    Real m = 0;
    for (const auto& r : b.regions) m = std::max(m, std::abs(r.value));
    return m;
}

void analytic_interval(const ModeBlock& b, Real window, std::vector<SpectrumEntry>& out) {
    // Massless kernel blocks have closed-form ladders; emit them exactly.
    const Real mmax = max_region_mass(b);
    const bool plain_kills = !b.kill_in.direction && !b.kill_out.direction &&
                             !(b.kill_in.c1 && b.kill_in.c2) && !(b.kill_out.c1 && b.kill_out.c2);
    if (b.is_kernel && mmax == 0 && plain_kills) {
        const bool same_component = (b.kill_in.c1 == b.kill_out.c1);
        const Real step = kPi / b.length;
        if (same_component) {
            for (int j = 0; std::abs(j * step) <= window; ++j) {
                out.push_back({j * step, 1, b.id, b.lambda});
                if (j > 0) out.push_back({-j * step, 1, b.id, b.lambda});
            }
        } else {
            for (int j = 0;; ++j) {
                const Real mu = (j + 0.5) * step;
                if (mu > window) break;
                out.push_back({mu, 1, b.id, b.lambda});
                out.push_back({-mu, 1, b.id, b.lambda});
            }
        }
        return;
    }

    const IntervalBoundaryData bd = interval_boundary_data(b);
    auto det = [&](Real mu) {
        const Mat2 t = total_transfer(b, mu);
        const Real x1 = t.a11 * bd.vin1 + t.a12 * bd.vin2;
        const Real x2 = t.a21 * bd.vin1 + t.a22 * bd.vin2;
        return bd.rout1 * x1 + bd.rout2 * x2;
    };
    // Eigenvalues cluster quadratically above each band edge sqrt(lambda^2 +
    // M^2); resolve the smallest such gap so the sign scan cannot skip pairs.
    const Real nu1 = kPi / b.length;
    const Real edge = std::sqrt(b.lambda * b.lambda + mmax * mmax);
    Real step = std::min(kPi / (4.0 * b.length), nu1 * nu1 / (4.0 * std::max<Real>(edge, 1.0)));
    if (mmax > 0) step = std::min(step, 1.0 / (4.0 * mmax));
    const int n_steps = static_cast<int>(std::ceil(2 * window / step));
    Real prev_mu = -window;
    Real prev_d = det(prev_mu);
    for (int i = 1; i <= n_steps; ++i) {
        const Real mu = -window + 2 * window * i / n_steps;
        const Real d = det(mu);
        if ((prev_d < 0 && d > 0) || (prev_d > 0 && d < 0) || d == 0) {
            const Real root = bisect_root(det, prev_mu, mu, prev_d, d);
            out.push_back({root, 1, b.id, b.lambda});
        }
        prev_mu = mu;
        prev_d = d;
    }
}

void analytic_circle(const ModeBlock& b, Real window, std::vector<SpectrumEntry>& out) {
    const Real C = b.length;
    bool constant_mass = b.regions.size() == 1;
    if (b.regions.size() > 1) {
        constant_mass = true;
        for (const auto& r : b.regions) constant_mass &= (r.value == b.regions[0].value);
    }
    if (constant_mass) {
        const Real M = b.regions[0].value;
        const Real base2 = b.lambda * b.lambda + M * M;
        const Real base = std::sqrt(base2);
        if (base <= window) {
            out.push_back({base, 1, b.id, b.lambda});
            out.push_back({-base, 1, b.id, b.lambda});
        }
        for (int j = 1;; ++j) {
            const Real freq = 2 * kPi * j / C;
            const Real mu = std::sqrt(base2 + freq * freq);
            if (mu > window) break;
            out.push_back({mu, 2, b.id, b.lambda});
            out.push_back({-mu, 2, b.id, b.lambda});
        }
        return;
    }

    auto gap = [&](Real mu) { return total_transfer(b, mu).trace() - 2.0; };
    const Real mmax = max_region_mass(b);
    const Real nu1 = 2 * kPi / C;
    const Real edge = std::sqrt(b.lambda * b.lambda + mmax * mmax);
    Real step = std::min(kPi / (8.0 * C), nu1 * nu1 / (8.0 * std::max<Real>(edge, 1.0)));
    if (mmax > 0) step = std::min(step, 1.0 / (8.0 * mmax));
    const int n_steps = static_cast<int>(std::ceil(2 * window / step));
    std::vector<Real> mus(n_steps + 1), gs(n_steps + 1);
    for (int i = 0; i <= n_steps; ++i) {
        mus[i] = -window + 2 * window * i / n_steps;
        gs[i] = gap(mus[i]);
    }
    auto emit = [&](Real root) {
        const Mat2 t = total_transfer(b, root);
        const int mult = (t.dist_from_identity() < 1e-5) ? 2 : 1;
        out.push_back({root, mult, b.id, b.lambda});
    };
    for (int i = 1; i <= n_steps; ++i) {
        if ((gs[i - 1] < 0 && gs[i] > 0) || (gs[i - 1] > 0 && gs[i] < 0)) {
            emit(bisect_root(gap, mus[i - 1], mus[i], gs[i - 1], gs[i]));
        } else if (i + 1 <= n_steps && gs[i] > gs[i - 1] && gs[i] >= gs[i + 1] && gs[i] < 0 &&
                   gs[i] > -1e-2) {
            // tangential approach to tr T = 2 from below: golden-section maximum
            Real a = mus[i - 1], c = mus[i + 1];
            const Real phi = 0.5 * (std::sqrt(5.0) - 1.0);
            Real x1 = c - phi * (c - a), x2 = a + phi * (c - a);
            Real f1 = gap(x1), f2 = gap(x2);
            for (int it = 0; it < 120; ++it) {
                if (f1 < f2) {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + phi * (c - a); f2 = gap(x2);
                } else {
                    c = x2; x2 = x1; f2 = f1;
                    x1 = c - phi * (c - a); f1 = gap(x1);
                }
            }
            const Real root = 0.5 * (a + c);
            if (std::abs(gap(root)) < 1e-8) emit(root);
        }
    }
}

}  // namespace

Spectrum solve_analytic(const ModeBlock& b, Real mu_window) {
    if (b.regions.empty())
        fail(ErrorCode::InvalidShape, "analytic route requires a piecewise-constant mass profile");
    Spectrum s;
    s.method = Method::Analytic;
    s.window = mu_window;
    if (b.domain == Domain::Interval) analytic_interval(b, mu_window, s.entries);
    else analytic_circle(b, mu_window, s.entries);
    std::sort(s.entries.begin(), s.entries.end(), [](const auto& a, const auto& c) {
        if (a.mu != c.mu) return a.mu < c.mu;
        return a.block_id < c.block_id;
    });
    // merge duplicated roots found by both the crossing and tangential scans
    std::vector<SpectrumEntry> merged;
    for (const auto& e : s.entries) {
        if (!merged.empty() && std::abs(e.mu - merged.back().mu) < 1e-7 &&
            e.block_id == merged.back().block_id) {
            merged.back().multiplicity = std::max(merged.back().multiplicity, e.multiplicity);
            continue;
        }
        merged.push_back(e);
    }
    s.entries = std::move(merged);
    return s;
}

Spectrum solve_analytic(const Scenario& scen) {
    Spectrum total;
    total.method = Method::Analytic;
    total.window = scen.numerics.mu_window;
    total.cutoff = scen.numerics.mode_cutoff;
    for (const auto& b : reduce(scen)) {
        Spectrum s = solve_analytic(b, scen.numerics.mu_window);
        total.entries.insert(total.entries.end(), s.entries.begin(), s.entries.end());
    }
    std::sort(total.entries.begin(), total.entries.end(), [](const auto& a, const auto& c) {
        if (a.mu != c.mu) return a.mu < c.mu;
        return a.block_id < c.block_id;
    });
    return total;
}

// ---------------------------------------------------------------------------
// discretized route

namespace {

struct StaggeredGrids {
    Real h = 0;
    std::vector<Real> c1, c2;
};

// Mass value attached to a dof: for piecewise-constant profiles the average
// over the dof cell, which keeps jump walls second-order even when they fall
// between grid points.
Real cell_mass(const ModeBlock& b, Real u, Real h) {
    if (b.regions.empty()) return b.block_mass(u);
    const Real lo = u - h / 2, hi = u + h / 2;
    Real acc = 0, len = 0;
    for (const auto& r : b.regions) {
        const Real a = std::max(lo, r.u_begin), c = std::min(hi, r.u_end);
        if (c > a) {
            acc += (c - a) * r.value;
            len += (c - a);
        }
    }
    if (len <= 0) return b.block_mass(u);
    return acc / len;
}

// Host at each end the component killed there so boundary conditions are
// plain degree-of-freedom deletions; mixed patterns use a half-cell grid.
StaggeredGrids interval_grids(const ModeBlock& b, int N) {
    auto host_c1 = [](const EndKill& k) { return k.direction.has_value() || (k.c1 && k.c2) || k.c1; };
    const bool h_in = host_c1(b.kill_in), h_out = host_c1(b.kill_out);
    StaggeredGrids g;
    const Real a = b.u_min;
    if (h_in == h_out) {
        g.h = b.length / N;
        std::vector<Real> nodes(N + 1), mids(N);
        for (int i = 0; i <= N; ++i) nodes[i] = a + g.h * i;
        for (int i = 0; i < N; ++i) mids[i] = a + g.h * (i + 0.5);
        g.c1 = h_in ? nodes : mids;
        g.c2 = h_in ? mids : nodes;
    } else {
        g.h = b.length / (N + 0.5);
        std::vector<Real> lo(N + 1), hi(N + 1);
        for (int i = 0; i <= N; ++i) {
            lo[i] = a + g.h * i;
            hi[i] = a + g.h * (i + 0.5);
        }
        g.c1 = h_in ? lo : hi;
        g.c2 = h_in ? hi : lo;
    }
    return g;
}

Eigen::MatrixXd assemble_interval(const ModeBlock& b, const StaggeredGrids& g,
                                  std::vector<int>& keep_c1, std::vector<int>& keep_c2) {
    const int n1 = static_cast<int>(g.c1.size());
    const int n2 = static_cast<int>(g.c2.size());
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n1, n2);
    for (int i = 0; i < n1; ++i) {
        const Real x = g.c1[i];
        const int jl = static_cast<int>(std::llround((x - g.h / 2 - g.c2[0]) / g.h));
        const int jr = static_cast<int>(std::llround((x + g.h / 2 - g.c2[0]) / g.h));
        if (0 <= jr && jr < n2) E(i, jr) += -1.0 / g.h + b.lambda / 2.0;
        if (0 <= jl && jl < n2) E(i, jl) += +1.0 / g.h + b.lambda / 2.0;
    }
    keep_c1.clear();
    keep_c2.clear();
    for (int i = 0; i < n1; ++i) keep_c1.push_back(i);
    for (int i = 0; i < n2; ++i) keep_c2.push_back(i);

    auto nearest_c2 = [&](Real x) {
        int best = 0;
        for (int j = 1; j < n2; ++j)
            if (std::abs(g.c2[j] - x) < std::abs(g.c2[best] - x)) best = j;
        return best;
    };
    auto drop = [](std::vector<int>& v, int idx) {
        v.erase(std::remove(v.begin(), v.end(), idx), v.end());
    };
    const Real u_lo = b.u_min, u_hi = b.u_min + b.length;
    auto apply_kill = [&](const EndKill& k, Real u_end) {
        if (k.direction) return;  // handled by the caller via constraints
        const bool c1_at_end = std::abs(g.c1.front() - u_end) < g.h / 4 ||
                               std::abs(g.c1.back() - u_end) < g.h / 4;
        if (k.c1 && k.c2) {
            // doubly-constrained end: delete the hosted node and its neighbour
            drop(keep_c1, std::abs(g.c1.front() - u_end) < g.h / 4 ? 0 : n1 - 1);
            drop(keep_c2, nearest_c2(u_end));
            return;
        }
        if (k.c1) {
            if (!c1_at_end) fail(ErrorCode::InvalidShape, "grid hosting mismatch (c1)");
            drop(keep_c1, std::abs(g.c1.front() - u_end) < g.h / 4 ? 0 : n1 - 1);
        } else if (k.c2) {
            const bool front = std::abs(g.c2.front() - u_end) < g.h / 4;
            const bool back = std::abs(g.c2.back() - u_end) < g.h / 4;
            if (!front && !back) fail(ErrorCode::InvalidShape, "grid hosting mismatch (c2)");
            drop(keep_c2, front ? 0 : n2 - 1);
        }
    };
    apply_kill(b.kill_in, u_lo);
    apply_kill(b.kill_out, u_hi);

    Eigen::MatrixXd A(n1 + n2, n1 + n2);
    A.setZero();
    for (int i = 0; i < n1; ++i) A(i, i) = cell_mass(b, g.c1[i], g.h);
    for (int j = 0; j < n2; ++j) A(n1 + j, n1 + j) = -cell_mass(b, g.c2[j], g.h);
    A.block(0, n1, n1, n2) = E;
    A.block(n1, 0, n2, n1) = E.transpose();
    return A;
}

Eigen::MatrixXd select_symmetric(const Eigen::MatrixXd& A, const std::vector<int>& keep) {
    Eigen::MatrixXd out(keep.size(), keep.size());
    for (size_t i = 0; i < keep.size(); ++i)
        for (size_t j = 0; j < keep.size(); ++j) out(i, j) = A(keep[i], keep[j]);
    return out;
}

// Direction kills (custom Lagrangians on kernel blocks) are handled by a
// position-dependent frame rotation y = R(-phi(u)) x that turns the killed
// direction at each end into the first component; in the rotated frame the
// condition is a plain dof deletion. The rotated operator picks up a scalar
// -phi'(u) shift and an off-diagonal mass coupling, both second-order
// discretizable on the staggered pair.
ModeBlock rotated_block(const ModeBlock& b) {
    ModeBlock rb = b;
    rb.kill_in = EndKill{true, false, std::nullopt};
    rb.kill_out = EndKill{true, false, std::nullopt};
    return rb;
}

Real kill_angle(const EndKill& k) {
    if (k.direction) {
        auto [w1, w2] = realize_direction(*k.direction);
        return std::atan2(w2, w1);
    }
    if (k.c1) return 0.0;
    return 0.5 * kPi;  // c2 kill
}

BlockEigensystem interval_eigensystem_rotated(const ModeBlock& b, int N, bool with_vectors) {
    const Real phi_in = kill_angle(b.kill_in);
    const Real phi_out = kill_angle(b.kill_out);
    const ModeBlock rb = rotated_block(b);
    const StaggeredGrids g = interval_grids(rb, N);
    const Real a = b.u_min, L = b.length;
    auto phi = [&](Real u) {
        return phi_in + (phi_out - phi_in) * special::smooth_rho(0.25, 0.75, (u - a) / L);
    };
    auto phi_deriv = [&](Real u) {
        return (phi_out - phi_in) * special::smooth_rho_deriv(0.25, 0.75, (u - a) / L);
    };
    const int n1 = static_cast<int>(g.c1.size());
    const int n2 = static_cast<int>(g.c2.size());
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n1, n2);
    for (int i = 0; i < n1; ++i) {
        const Real x = g.c1[i];
        const int jl = static_cast<int>(std::llround((x - g.h / 2 - g.c2[0]) / g.h));
        const int jr = static_cast<int>(std::llround((x + g.h / 2 - g.c2[0]) / g.h));
        auto couple = [&](int j, Real deriv_sign) {
            if (j < 0 || j >= n2) return;
            const Real um = 0.5 * (x + g.c2[j]);
            const Real off = b.lambda - cell_mass(b, um, g.h) * std::sin(2 * phi(um));
            E(i, j) += deriv_sign / g.h + off / 2.0;
        };
        couple(jr, -1.0);
        couple(jl, +1.0);
    }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
    for (int i = 0; i < n1; ++i)
        A(i, i) = cell_mass(b, g.c1[i], g.h) * std::cos(2 * phi(g.c1[i])) - phi_deriv(g.c1[i]);
    for (int j = 0; j < n2; ++j)
        A(n1 + j, n1 + j) =
            -cell_mass(b, g.c2[j], g.h) * std::cos(2 * phi(g.c2[j])) - phi_deriv(g.c2[j]);
    A.block(0, n1, n1, n2) = E;
    A.block(n1, 0, n2, n1) = E.transpose();

    std::vector<int> keep;
    for (int i = 1; i < n1 - 1; ++i) keep.push_back(i);  // rotated c1 killed at both ends
    for (int j = 0; j < n2; ++j) keep.push_back(n1 + j);
    const Eigen::MatrixXd Ak = select_symmetric(A, keep);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.compute(Ak, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    BlockEigensystem sys;
    sys.c1_grid.assign(g.c1.begin(), g.c1.end());
    sys.c2_grid.assign(g.c2.begin(), g.c2.end());
    sys.n_c1 = n1 - 2;
    const int dim = static_cast<int>(es.eigenvalues().size());
    sys.mu.resize(dim);
    if (!with_vectors) {
        for (int j = 0; j < dim; ++j) sys.mu[j] = es.eigenvalues()(j);
        return sys;
    }
    sys.chirality.resize(dim);
    sys.vectors = Eigen::MatrixXd::Zero(n1 + n2, dim);
    for (int j = 0; j < dim; ++j) {
        sys.mu[j] = es.eigenvalues()(j);
        // back-rotate x = R(phi) y to the original components; the partner
        // value at a staggered point is the neighbour average
        Eigen::VectorXd full = Eigen::VectorXd::Zero(n1 + n2);
        for (size_t i = 0; i < keep.size(); ++i) full(keep[i]) = es.eigenvectors()(i, j);
        auto interp = [&](const std::vector<Real>& grid_from, int offset, Real x) {
            Real acc = 0;
            int cnt = 0;
            for (int i = 0; i < static_cast<int>(grid_from.size()); ++i) {
                if (std::abs(grid_from[i] - x) < 0.75 * g.h) {
                    acc += full(offset + i);
                    ++cnt;
                }
            }
            return cnt > 0 ? acc / cnt : 0.0;
        };
        Real chi = 0;
        for (int i = 0; i < n1; ++i) {
            const Real c = std::cos(phi(g.c1[i])), s = std::sin(phi(g.c1[i]));
            const Real y1 = full(i);
            const Real y2 = interp(g.c2, n1, g.c1[i]);
            const Real x1 = c * y1 - s * y2;
            const Real x2 = s * y1 + c * y2;
            sys.vectors(i, j) = x1;
            chi += 0.5 * (x1 * x1 - x2 * x2);
        }
        for (int i = 0; i < n2; ++i) {
            const Real c = std::cos(phi(g.c2[i])), s = std::sin(phi(g.c2[i]));
            const Real y1 = interp(g.c1, 0, g.c2[i]);
            const Real y2 = full(n1 + i);
            const Real x1 = c * y1 - s * y2;
            const Real x2 = s * y1 + c * y2;
            sys.vectors(n1 + i, j) = x2;
            chi += 0.5 * (x1 * x1 - x2 * x2);
        }
        sys.chirality[j] = b.chirality_c1 * chi;
    }
    return sys;
}

BlockEigensystem interval_eigensystem(const ModeBlock& b, int N, bool with_vectors) {
    if (b.kill_in.direction.has_value() || b.kill_out.direction.has_value())
        return interval_eigensystem_rotated(b, N, with_vectors);
    const StaggeredGrids g = interval_grids(b, N);
    std::vector<int> keep_c1, keep_c2;
    const Eigen::MatrixXd A = assemble_interval(b, g, keep_c1, keep_c2);
    const int n1 = static_cast<int>(g.c1.size());

    std::vector<int> keep;
    for (int i : keep_c1) keep.push_back(i);
    for (int j : keep_c2) keep.push_back(n1 + j);

    const Eigen::MatrixXd Ak = select_symmetric(A, keep);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.compute(Ak, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    BlockEigensystem sys;
    sys.c1_grid.assign(g.c1.begin(), g.c1.end());
    sys.c2_grid.assign(g.c2.begin(), g.c2.end());
    sys.n_c1 = static_cast<int>(keep_c1.size());
    const int dim = static_cast<int>(es.eigenvalues().size());
    sys.mu.resize(dim);
    sys.chirality.resize(dim);
    if (!with_vectors) {
        for (int j = 0; j < dim; ++j) sys.mu[j] = es.eigenvalues()(j);
        sys.chirality.clear();
        return sys;
    }
    const Eigen::MatrixXd& vecs = es.eigenvectors();
    sys.vectors = Eigen::MatrixXd::Zero(static_cast<int>(g.c1.size() + g.c2.size()), dim);
    for (int j = 0; j < dim; ++j) {
        sys.mu[j] = es.eigenvalues()(j);
        Real chi = 0;
        for (size_t i = 0; i < keep.size(); ++i) {
            const Real v = vecs(i, j);
            chi += (keep[i] < n1 ? 1.0 : -1.0) * v * v;
            sys.vectors(keep[i], j) = v;
        }
        sys.chirality[j] = b.chirality_c1 * chi;
    }
    return sys;
}

BlockEigensystem circle_eigensystem(const ModeBlock& b, int N, bool with_vectors) {
    const bool step_mass = !b.regions.empty() && b.regions.size() > 1;
    BlockEigensystem sys;
    if (step_mass) {
        // periodic staggered pair; wall loci land on c1 nodes for N % 4 == 0
        int n = N;
        while (n % 4 != 0) ++n;
        const Real h = b.length / n;
        std::vector<Real> u1(n), u2(n);
        for (int i = 0; i < n; ++i) {
            u1[i] = b.u_min + h * i;
            u2[i] = u1[i] + h / 2;
        }
        Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) {
            E(i, i) += -1.0 / h + b.lambda / 2.0;
            E(i, (i + n - 1) % n) += +1.0 / h + b.lambda / 2.0;
        }
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
        for (int i = 0; i < n; ++i) {
            A(i, i) = cell_mass(b, u1[i], h);
            A(n + i, n + i) = -cell_mass(b, u2[i], h);
        }
        A.block(0, n, n, n) = E;
        A.block(n, 0, n, n) = E.transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.compute(A, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
        sys.n_c1 = n;
        sys.c1_grid = u1;
        sys.c2_grid = u2;
        for (int j = 0; j < 2 * n; ++j) sys.mu.push_back(es.eigenvalues()(j));
        if (with_vectors) {
            sys.vectors = es.eigenvectors();
            for (int j = 0; j < 2 * n; ++j) {
                Real chi = 0;
                for (int i = 0; i < 2 * n; ++i)
                    chi += (i < n ? 1.0 : -1.0) * es.eigenvectors()(i, j) * es.eigenvectors()(i, j);
                sys.chirality.push_back(b.chirality_c1 * chi);
            }
        }
        return sys;
    }

    // trigonometric spectral differentiation on an odd-point grid
    int n = N;
    if (n % 2 == 0) ++n;
    const Real h = b.length / n;
    std::vector<Real> u(n);
    for (int i = 0; i < n; ++i) u[i] = b.u_min + h * i;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            if (j != k) {
                const int d = j - k;
                const Real sign = (d % 2 == 0) ? 1.0 : -1.0;
                D(j, k) = (2 * kPi / b.length) * 0.5 * sign / std::tan(kPi * d / n);
            }
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        A(i, i) = b.block_mass(u[i]);
        A(n + i, n + i) = -b.block_mass(u[i]);
    }
    A.block(0, n, n, n) = -D + b.lambda * Eigen::MatrixXd::Identity(n, n);
    A.block(n, 0, n, n) = D + b.lambda * Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd As = 0.5 * (A + A.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.compute(As, with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    sys.n_c1 = n;
    sys.c1_grid = u;
    sys.c2_grid = u;
    for (int j = 0; j < 2 * n; ++j) sys.mu.push_back(es.eigenvalues()(j));
    if (with_vectors) {
        sys.vectors = es.eigenvectors();
        for (int j = 0; j < 2 * n; ++j) {
            Real chi = 0;
            for (int i = 0; i < 2 * n; ++i)
                chi += (i < n ? 1.0 : -1.0) * es.eigenvectors()(i, j) * es.eigenvectors()(i, j);
            sys.chirality.push_back(b.chirality_c1 * chi);
        }
    }
    return sys;
}

}  // namespace

BlockEigensystem solve_block_discretized(const ModeBlock& b, int grid_points) {
    return solve_block_discretized(b, grid_points, true);
}

BlockEigensystem solve_block_discretized(const ModeBlock& b, int grid_points, bool with_vectors) {
    if (grid_points < 16) fail(ErrorCode::InvalidShape, "grid_points must be >= 16");
    return (b.domain == Domain::Interval) ? interval_eigensystem(b, grid_points, with_vectors)
                                          : circle_eigensystem(b, grid_points, with_vectors);
}

Spectrum solve_discretized(const Scenario& scen) {
    return solve_discretized(scen, scen.numerics.grid_points);
}

Spectrum solve_discretized(const Scenario& scen, int grid_points) {
    return solve_discretized(scen, grid_points, true);
}

Spectrum solve_discretized(const Scenario& scen, int grid_points, bool with_chirality) {
    Spectrum total;
    total.method = Method::Discretized;
    total.cutoff = scen.numerics.mode_cutoff;
    total.grid_points = grid_points;
    total.window = 0;
    struct Row {
        SpectrumEntry e;
        Real chi;
    };
    std::vector<Row> rows;
    for (const auto& b : reduce(scen)) {
        const BlockEigensystem sys = solve_block_discretized(b, grid_points, with_chirality);
        for (size_t j = 0; j < sys.mu.size(); ++j)
            rows.push_back({{sys.mu[j], 1, b.id, b.lambda},
                            with_chirality ? sys.chirality[j] : 0.0});
    }
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& c) {
        if (a.e.mu != c.e.mu) return a.e.mu < c.e.mu;
        return a.e.block_id < c.e.block_id;
    });
    for (const Row& r : rows) {
        total.entries.push_back(r.e);
        if (with_chirality) total.chirality.push_back(r.chi);
    }
    return total;
}

namespace {

bool massless(const Scenario& scen) {
    const auto* c = std::get_if<model::ConstantMass>(&scen.mass);
    return c != nullptr && c->value == 0.0;
}

bool doubly_constrained(const ModeBlock& b) {
    return (b.kill_in.c1 && b.kill_in.c2) || (b.kill_out.c1 && b.kill_out.c2);
}

// The massless block decouples into single-component sectors with explicit
// solutions (c1: e^{-lambda u}, c2: e^{+lambda u}); a sector survives iff no
// end condition touches its component. Exact, and the only sound route for
// doubly-constrained ends, where the realized problem is over-determined.
void exact_massless_kernel(const ModeBlock& b, KernelReport& report) {
    auto sector_killed = [&](bool c1_sector) {
        for (const EndKill* k : {&b.kill_in, &b.kill_out}) {
            if (c1_sector && k->c1) return true;
            if (!c1_sector && k->c2) return true;
            if (k->direction) {
                const Complex w = c1_sector ? k->direction->first : k->direction->second;
                if (std::abs(w) > 1e-12) return true;
            }
        }
        return false;
    };
    if (b.domain == Domain::Circle) {
        // closed massless blocks: constants in each kernel sector, none for lambda > 0
        if (!b.is_kernel) return;
        for (int sector = 0; sector < 2; ++sector) {
            KernelElement el;
            el.block_id = b.id;
            el.block_lambda = b.lambda;
            el.chirality = b.chirality_c1 * (sector == 0 ? 1.0 : -1.0);
            report.elements.push_back(std::move(el));
            report.dimension += 1;
            report.chirality_trace_raw += report.elements.back().chirality;
        }
        return;
    }
    for (int sector = 0; sector < 2; ++sector) {
        const bool c1_sector = (sector == 0);
        if (sector_killed(c1_sector)) continue;
        KernelElement el;
        el.block_id = b.id;
        el.block_lambda = b.lambda;
        el.chirality = b.chirality_c1 * (c1_sector ? 1.0 : -1.0);
        const int samples = 33;
        Real norm2 = 0;
        for (int i = 0; i < samples; ++i) {
            const Real u = b.u_min + b.length * i / (samples - 1);
            const Real v = std::exp((c1_sector ? -b.lambda : b.lambda) * (u - b.u_min));
            el.u_samples.push_back(u);
            (c1_sector ? el.c1_profile : el.c2_profile).push_back(v);
            norm2 += v * v;
        }
        for (Real& v : el.c1_profile) v /= std::sqrt(norm2);
        for (Real& v : el.c2_profile) v /= std::sqrt(norm2);
        report.elements.push_back(std::move(el));
        report.dimension += 1;
        report.chirality_trace_raw += report.elements.back().chirality;
    }
}

}  // namespace

KernelReport kernel(const Scenario& scen) {
    const Real tol = scen.numerics.kernel_tolerance;
    KernelReport report;
    const auto blocks = reduce(scen);
    if (massless(scen)) {
        bool any_double = false;
        for (const auto& b : blocks) any_double |= doubly_constrained(b);
        if (any_double) {
            for (const auto& b : blocks) exact_massless_kernel(b, report);
            report.chirality_trace = static_cast<int>(std::llround(report.chirality_trace_raw));
            return report;
        }
    }
    for (const auto& b : blocks) {
        const BlockEigensystem sys = solve_block_discretized(b, scen.numerics.grid_points);
        for (size_t j = 0; j < sys.mu.size(); ++j) {
            const Real amu = std::abs(sys.mu[j]);
            if (amu >= tol && amu < 10 * tol)
                fail(ErrorCode::AmbiguousKernel,
                     "eigenvalue " + std::to_string(sys.mu[j]) +
                         " lies in the ambiguous band around kernel_tolerance");
            if (amu >= tol) continue;
            KernelElement el;
            el.block_id = b.id;
            el.block_lambda = b.lambda;
            el.chirality = sys.chirality[j];
            el.u_samples = sys.c1_grid;
            const int n1 = static_cast<int>(sys.c1_grid.size());
            for (int i = 0; i < n1; ++i) el.c1_profile.push_back(sys.vectors(i, j));
            for (int i = 0; i < static_cast<int>(sys.c2_grid.size()); ++i)
                el.c2_profile.push_back(sys.vectors(n1 + i, j));
            report.elements.push_back(std::move(el));
            report.dimension += 1;
            report.chirality_trace_raw += sys.chirality[j];
        }
    }
    report.chirality_trace = static_cast<int>(std::llround(report.chirality_trace_raw));
    if (std::abs(report.chirality_trace_raw - report.chirality_trace) > 1e-6)
        fail(ErrorCode::AmbiguousKernel, "kernel chirality trace does not round cleanly");
    return report;
}

int index(const Scenario& scen) {
    const auto* c = std::get_if<model::ConstantMass>(&scen.mass);
    if (c == nullptr || c->value != 0.0)
        fail(ErrorCode::OddParityViolated, "index requires the massless odd-parity operator");
    return kernel(scen).chirality_trace;
}

MatchResult match_spectra(const Spectrum& a, const Spectrum& b, Real window, Real radius) {
    // Collect slightly beyond the window so pairs straddling the edge still
    // meet; only unmatched eigenvalues safely inside the window count.
    const Real slack = std::max<Real>(0.5, 20 * radius);
    auto expand = [&](const Spectrum& s) {
        std::vector<Real> v;
        for (const auto& e : s.entries)
            if (std::abs(e.mu) <= window + slack)
                for (int m = 0; m < e.multiplicity; ++m) v.push_back(e.mu);
        std::sort(v.begin(), v.end());
        return v;
    };
    const std::vector<Real> va = expand(a), vb = expand(b);
    MatchResult res;
    auto note_unmatched = [&](std::vector<Real>& list, Real mu) {
        if (std::abs(mu) <= window) list.push_back(mu);
    };
    size_t i = 0, j = 0;
    while (i < va.size() && j < vb.size()) {
        const Real d = va[i] - vb[j];
        if (std::abs(d) <= radius) {
            if (std::min(std::abs(va[i]), std::abs(vb[j])) <= window)
                res.max_deviation = std::max(res.max_deviation, std::abs(d));
            ++i;
            ++j;
        } else if (d < 0) {
            note_unmatched(res.unmatched_a, va[i++]);
        } else {
            note_unmatched(res.unmatched_b, vb[j++]);
        }
    }
    while (i < va.size()) note_unmatched(res.unmatched_a, va[i++]);
    while (j < vb.size()) note_unmatched(res.unmatched_b, vb[j++]);
    return res;
}

}  // namespace etalab::modes
