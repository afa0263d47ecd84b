#include <doctest.h>

#include "etalab/model.hpp"

using namespace etalab;
using namespace etalab::model;

namespace {

Scenario base_cylinder() {
    Scenario s;
    s.bulk = FiniteCylinder{1.0};
    s.bcs.ends = {{BcLabel::PiVPlus, {}}, {BcLabel::PiVMinus, {}}};
    return s;
}

}  // namespace

TEST_CASE("finite cylinder with the spectral condition pair validates") {
    CHECK_NOTHROW(validate(base_cylinder()));
}

TEST_CASE("closed shapes reject boundary conditions") {
    Scenario s;
    s.bulk = DoubledCylinder{2.0};
    s.bcs.ends = {{BcLabel::PiVPlus, {}}};
    CHECK_THROWS_AS(validate(s), Error);
    try {
        validate(s);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::InvalidShape);
    }
}

TEST_CASE("custom Lagrangian span{psi + gamma psi} is accepted, the isotropic check rejects") {
    Scenario s = base_cylinder();
    s.bcs.ends[0] = {BcLabel::CustomLagrangian, {Complex(1, 0), Complex(1, 0)}};
    CHECK_NOTHROW(validate(s));  // Phi(psi + gamma psi, psi + gamma psi) = 0

    s.bcs.ends[0] = {BcLabel::CustomLagrangian, {Complex(1, 0), Complex(0, 1)}};
    CHECK_THROWS_AS(validate(s), Error);  // Phi does not vanish on span{psi + i gamma psi}

    s.boundary.flux = 0.5;  // empty kernel: no Lagrangian data possible
    s.bcs.ends[0] = {BcLabel::CustomLagrangian, {Complex(1, 0), Complex(1, 0)}};
    CHECK_THROWS_AS(validate(s), Error);
}

TEST_CASE("smooth wall profile is monotone and must fit the bulk") {
    Scenario s = base_cylinder();
    s.mass = SmoothWall{5.0, 10.0};
    CHECK_NOTHROW(validate(s));
    s.mass = SmoothWall{5.0, 1.5};  // width 2/T = 1.33 exceeds the cylinder
    CHECK_THROWS_AS(validate(s), Error);
}

TEST_CASE("smoothed wall agrees with the step profile away from the wall") {
    for (Real T : {10.0, 25.0}) {
        for (int i = 0; i <= 64; ++i) {
            const Real u = -0.5 + i / 64.0;
            if (std::abs(u) < 2.0 / T) continue;
            const Real step = (u >= 0) ? 1.0 : -1.0;
            CHECK(smooth_step(u, T) == step);
        }
    }
}

TEST_CASE("mass profiles evaluate by shape") {
    Scenario s = base_cylinder();
    s.mass = StepWall{3.0};
    s = validate(s);
    CHECK(mass_at(s, -0.25) == -3.0);
    CHECK(mass_at(s, 0.25) == 3.0);

    Scenario d;
    d.bulk = DoubledCylinder{4.0};  // gluing loci at +-1
    d.mass = StepWall{2.0};
    d = validate(d);
    CHECK(mass_at(d, 0.0) == 2.0);
    CHECK(mass_at(d, 1.5) == -2.0);
    CHECK(mass_at(d, -1.5) == -2.0);

    d.mass = SmoothWall{2.0, 20.0};
    d = validate(d);
    CHECK(mass_at(d, 0.0) == 2.0);
    CHECK(mass_at(d, 1.5) == -2.0);
    CHECK(mass_at(d, -1.0) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("serialization is canonical and round-trips") {
    Scenario s = base_cylinder();
    s.mass = SmoothWall{10.0, 20.0};
    s.numerics.mode_cutoff = 3;
    const Scenario v1 = validate(s);
    const Scenario v2 = validate(s);
    CHECK(serialize(v1) == serialize(v2));
    const Scenario parsed = parse_scenario_text(serialize(v1));
    CHECK(serialize(parsed) == serialize(v1));
}

TEST_CASE("parser rejects malformed input") {
    CHECK_THROWS_AS(parse_scenario_text("[bulk]\nshape = dodecahedron\n"), Error);
    CHECK_THROWS_AS(parse_scenario_text("[bulk]\nshape finite_cylinder\n"), Error);
}
