#include <doctest.h>

#include <set>

#include "etalab/harness.hpp"

using namespace etalab;
using namespace etalab::harness;

TEST_CASE("unknown experiments are rejected") {
    CHECK_THROWS_AS(run_experiment("unknown-id"), Error);
    try {
        run_experiment("unknown-id");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::UnknownExperiment);
    }
    CHECK_THROWS_AS(sweep("m", {1.0}, "unknown-id"), Error);
    CHECK_THROWS_AS(sweep("Q", {1.0}, "thm-t2-cylinder"), Error);
}

TEST_CASE("every in-scope identity is covered by a registered experiment") {
    // one entry per verified relation of the underlying formulas
    const std::vector<std::string> required = {
        "aps-index",          // index and kernel of the spectral-condition cylinder
        "eq-223-spectrum",    // interval eigenvalue ladders, two routes
        "thm-t2-cylinder",    // massive eta difference = 2 ind
        "thm-t3-domainwall",  // domain-wall formula with boundary kernel
        "thm-t3-invertible",  // invertible-boundary specialization
        "thm-t9-wall-vs-const",
        "lemma-l2-codim",     // virtual codimension identity
        "thm-t5-pgeq",        // index shift to the nonnegative projection
        "prop-p1-rsweep",     // gluing defect, R-independence
        "prop-p2-gap",        // uniform spectral gap
        "lemma-l1-limits",    // boundary kernel limit integrals
        "eq-150-trace-zero",  // trace cancellations
        "heat-oracles",       // closed-form kernels and traced identities
        "mckean-singer",      // supertrace t-independence
        "thm-t1-closed",      // closed-manifold eta difference
    };
    std::set<std::string> have;
    for (const auto& e : registry()) have.insert(e.id);
    for (const auto& id : required) {
        INFO("missing experiment ", id);
        CHECK(have.count(id) == 1);
    }
}

TEST_CASE("reports are deterministic across runs, wall clock aside") {
    const auto r1 = run_experiment("thm-t2-cylinder");
    const auto r2 = run_experiment("thm-t2-cylinder");
    CHECK(report_json({r1}, false) == report_json({r2}, false));
    CHECK(r1.pass);
}

TEST_CASE("sweeps run per value and report the spread") {
    const auto table = sweep("m", {2.0, 5.0}, "thm-t2-cylinder");
    REQUIRE(table.rows.size() == 2);
    for (const auto& row : table.rows) CHECK(row.result.pass);
    CHECK(table.max_spread < 1e-6);
}

TEST_CASE("experiment overrides reach the scenarios") {
    Overrides o;
    o.alpha = 0.5;
    const auto r = run_experiment("aps-index", o);
    CHECK(r.pass);
    CHECK(r.lhs == 0.0);  // invertible boundary: index 0
}
