// Acceptance suite: runs every verification criterion at its pinned tolerance
// and prints one pass/fail line per criterion. Exit code 0 iff all pass.

#include <chrono>
#include <cstdio>
#include <vector>

#include "etalab/eta.hpp"
#include "etalab/harness.hpp"
#include "etalab/heat.hpp"
#include "etalab/special.hpp"

using namespace etalab;
using model::BcLabel;

namespace {

int failures = 0;

void line(int number, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d  %-34s %s\n", pass ? "PASS" : "FAIL", number, name,
                detail.c_str());
    if (!pass) ++failures;
}

std::string fmt(Real x) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", x);
    return buf;
}

model::Scenario cylinder(Real alpha, int K, int N, model::MassProfile mass, BcLabel l, BcLabel r) {
    model::Scenario s;
    s.boundary.flux = alpha;
    s.bulk = model::FiniteCylinder{1.0};
    s.mass = mass;
    s.bcs.ends = {{l, {}}, {r, {}}};
    s.numerics.mode_cutoff = K;
    s.numerics.grid_points = N;
    return model::validate(s);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main() {
    using harness::Overrides;
    using harness::run_experiment;

    // 1. finite-cylinder index and kernel
    {
        const auto t0 = std::chrono::steady_clock::now();
        const auto scen =
            cylinder(0.0, 4, 200, model::ConstantMass{0.0}, BcLabel::PiVPlus, BcLabel::PiVMinus);
        const auto rep = modes::kernel(scen);
        const int ind = modes::index(scen);
        const double secs = seconds_since(t0);
        bool pass = (ind == -1) && (rep.dimension == 1) && rep.elements.size() == 1 &&
                    std::abs(rep.elements[0].chirality + 1.0) < 1e-6 && secs < 5.0;
        line(1, "cylinder index and kernel", pass,
             "index " + std::to_string(ind) + ", kernel dim " + std::to_string(rep.dimension) +
                 ", chirality " + fmt(rep.elements.empty() ? 0 : rep.elements[0].chirality) +
                 ", " + fmt(secs) + " s");
    }

    // 2. eigenvalue ladders: two-route agreement and convergence order
    {
        auto residual = [&](int N) {
            const auto scen = cylinder(0.0, 3, N, model::ConstantMass{0.0}, BcLabel::PiVPlus,
                                       BcLabel::PiVMinus);
            auto sa = scen;
            sa.numerics.mu_window = 10.5;
            const auto match =
                modes::match_spectra(modes::solve_analytic(sa), modes::solve_discretized(scen),
                                     10.0, 5e-2);
            if (!match.unmatched_a.empty() || !match.unmatched_b.empty()) return Real(1);
            return match.max_deviation;
        };
        const Real r100 = residual(100), r200 = residual(200), r400 = residual(400);
        const Real order = 0.5 * (std::log2(r100 / r200) + std::log2(r200 / r400));
        const bool pass = r400 < 1e-3 && std::abs(order - 2.0) < 0.5;
        line(2, "eigenvalue law, order-2 oracle", pass,
             "residual(N=400) " + fmt(r400) + ", observed order " + fmt(order));
    }

    // 3. massive eta difference equals the index, three masses
    {
        bool pass = true;
        std::string detail;
        for (Real m : {2.0, 5.0, 10.0}) {
            const auto t0 = std::chrono::steady_clock::now();
            Overrides o;
            o.m = m;
            const auto r = run_experiment("thm-t2-cylinder", o);
            const double secs = seconds_since(t0);
            pass &= r.pass && secs < 60.0;
            detail += "m=" + fmt(m) + ": " + fmt(r.residual) + " (" + fmt(secs) + " s)  ";
        }
        line(3, "eta difference vs index", pass, detail);
    }

    // 4. domain-wall eta formula, kernel and invertible boundary
    {
        const auto r0 = run_experiment("thm-t3-domainwall");
        const auto rh = run_experiment("thm-t3-invertible");
        line(4, "domain-wall index formula", r0.pass && rh.pass,
             "flux 0 residual " + fmt(r0.residual) + ", flux 1/2 residual " + fmt(rh.residual));
    }

    // 5. virtual codimension at three truncations, index shift
    {
        const auto rc = run_experiment("lemma-l2-codim");
        const auto rs = run_experiment("thm-t5-pgeq");
        line(5, "projection codimension and shift", rc.pass && rs.pass,
             "codimension residual " + fmt(rc.residual) + ", index shift residual " +
                 fmt(rs.residual));
    }

    // 6. wall against constant mass, T-stability
    {
        const auto r = run_experiment("thm-t9-wall-vs-const");
        const auto rt = run_experiment("thm-t9-t-stability");
        line(6, "wall vs constant eta difference", r.pass && rt.pass,
             "residual " + fmt(r.residual) + ", T spread " + fmt(rt.residual));
    }

    // 7. gluing defect: value, R-independence, vanishing Theta, tail bound
    {
        bool pass = true;
        std::string detail = "delta: ";
        std::vector<Real> deltas;
        for (Real R : {1.0, 2.0, 4.0}) {
            Overrides o;
            o.R = R;
            const auto r = run_experiment("prop-p1-rsweep", o);
            pass &= r.pass;
            deltas.push_back(r.lhs);
            detail += fmt(r.lhs) + " ";
        }
        for (Real d : deltas) pass &= std::abs(d - deltas[0]) < 2e-3;
        const auto data = boundary::eigendata({2 * kPi, 0.0}, 3);
        Real theta_max = 0;
        for (int i = 0; i <= 40; ++i) {
            const Real t = std::pow(10.0, -2.0 + 3.0 * i / 40.0);
            theta_max = std::max(theta_max, std::abs(heat::theta(data, 10.0, t)));
        }
        pass &= theta_max < 1e-12;
        detail += ", max|Theta| " + fmt(theta_max);
        line(7, "gluing defect and R-independence", pass, detail);
    }

    // 8. heat-kernel oracle battery and the limit integrals
    {
        const auto r = run_experiment("heat-oracles");
        const auto rl = run_experiment("lemma-l1-limits");
        line(8, "heat kernel oracles", r.pass && rl.pass,
             "battery score " + fmt(r.lhs) + ", limit residual " + fmt(rl.residual));
    }

    // 9. supertrace t-independence and the closed-manifold eta difference
    {
        const auto rm = run_experiment("mckean-singer");
        const auto rt = run_experiment("thm-t1-closed");
        line(9, "supertraces and closed manifold", rm.pass && rt.pass,
             "deviation " + fmt(rm.residual) + ", closed eta/2 " + fmt(rt.lhs));
    }

    // 10. uniform spectral gap across stretched necks
    {
        const auto r = run_experiment("prop-p2-gap");
        line(10, "uniform spectral gap", r.pass, "c0 = " + fmt(r.lhs) + " >= 0.5");
    }

    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                failures);
    return failures == 0 ? 0 : 1;
}
