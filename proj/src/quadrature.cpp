#include "etalab/quadrature.hpp"

#include <map>
#include <mutex>

namespace etalab::quadrature {

namespace {

// Legendre nodes by Newton iteration on P_n, seeded with the Chebyshev guess.
GaussRule compute_rule(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        Real x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        Real dp = 0;
        for (int it = 0; it < 100; ++it) {
            Real p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            Real dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_rule(int n) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_rule(n)).first;
    return it->second;
}

Real gauss_panel(const std::function<Real(Real)>& f, Real a, Real b, int n) {
    const GaussRule& rule = gauss_rule(n);
    const Real mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Real sum = 0;
    for (int i = 0; i < n; ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return half * sum;
}

Real gauss_composite(const std::function<Real(Real)>& f, Real a, Real b, int panels, int n) {
    Real sum = 0;
    const Real h = (b - a) / panels;
    for (int p = 0; p < panels; ++p) sum += gauss_panel(f, a + p * h, a + (p + 1) * h, n);
    return sum;
}

namespace {

Real simpson(Real a, Real fa, Real b, Real fb, Real fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

Real adaptive_step(const std::function<Real(Real)>& f, Real a, Real fa, Real b, Real fb, Real m,
                   Real fm, Real whole, Real tol, int depth) {
    const Real lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const Real flm = f(lm), frm = f(rm);
    const Real left = simpson(a, fa, m, fm, flm);
    const Real right = simpson(m, fm, b, fb, frm);
    const Real delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    if (depth <= 0)
        fail(ErrorCode::QuadratureNonConvergence, "adaptive Simpson recursion budget exhausted");
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

Real adaptive_simpson(const std::function<Real(Real)>& f, Real a, Real b, Real tol, int max_depth) {
    if (a == b) return 0.0;
    const Real m = 0.5 * (a + b);
    const Real fa = f(a), fb = f(b), fm = f(m);
    const Real whole = simpson(a, fa, b, fb, fm);
    return adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

PanelResult gauss_with_refinement(const std::function<Real(Real)>& f, Real a, Real b, int panels,
                                  int n) {
    PanelResult out;
    const Real coarse = gauss_composite(f, a, b, panels, n);
    out.value = gauss_composite(f, a, b, 2 * panels, n);
    out.error_estimate = std::abs(out.value - coarse);
    return out;
}

}  // namespace etalab::quadrature
