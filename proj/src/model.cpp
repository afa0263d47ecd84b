#include "etalab/model.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "etalab/special.hpp"

namespace etalab::model {

int boundary_components(const BulkShape& shape) {
    if (std::holds_alternative<FiniteCylinder>(shape)) return 2;
    if (std::holds_alternative<HalfCylinder>(shape)) return 1;
    return 0;
}

Real smooth_step(Real u, Real T) {
    if (u <= -1.0 / T) return -1.0;
    if (u >= 1.0 / T) return 1.0;
    return 2.0 * special::bump_cdf(T * u) - 1.0;
}

namespace {

Real wall_extent(const Scenario& s) {
    if (const auto* dc = std::get_if<DoubledCylinder>(&s.bulk)) return dc->circumference / 4.0;
    if (const auto* fc = std::get_if<FiniteCylinder>(&s.bulk)) return fc->length / 2.0;
    return std::get<HalfCylinder>(s.bulk).length;
}

void validate_custom_lagrangian(const BoundaryCondition& bc, const Scenario& s) {
    if (!s.boundary.integer_flux())
        fail(ErrorCode::InvalidLagrangian, "custom Lagrangian requires a nonempty boundary kernel");
    if (bc.lagrangian.size() != 2)
        fail(ErrorCode::InvalidLagrangian, "expected one (a, b) pair per kernel direction");
    const Complex a = bc.lagrangian[0], b = bc.lagrangian[1];
    const Real norm2 = std::norm(a) + std::norm(b);
    if (norm2 < s.numerics.kernel_tolerance)
        fail(ErrorCode::InvalidLagrangian, "zero Lagrangian vector");
    // Phi(v, v) = 2i Im(conj(a) b) must vanish; L + gamma L = V needs a^2 + b^2 != 0.
    if (std::abs(std::imag(std::conj(a) * b)) / norm2 > s.numerics.kernel_tolerance)
        fail(ErrorCode::InvalidLagrangian, "symplectic form does not vanish on L");
    if (std::abs(a * a + b * b) / norm2 < s.numerics.kernel_tolerance)
        fail(ErrorCode::InvalidLagrangian, "L + gamma L does not span the kernel");
}

}  // namespace

Scenario validate(Scenario s) {
    if (s.boundary.circumference <= 0)
        fail(ErrorCode::InvalidShape, "boundary circumference must be positive");
    if (s.numerics.mode_cutoff < 1) fail(ErrorCode::InvalidShape, "mode_cutoff must be >= 1");
    if (s.numerics.grid_points < 16) fail(ErrorCode::InvalidShape, "grid_points must be >= 16");
    if (s.numerics.kernel_tolerance <= 0 || s.numerics.mu_window <= 0)
        fail(ErrorCode::InvalidShape, "tolerances must be positive");

    if (const auto* fc = std::get_if<FiniteCylinder>(&s.bulk)) {
        if (fc->length <= 0) fail(ErrorCode::InvalidShape, "cylinder length must be positive");
    } else if (const auto* dc = std::get_if<DoubledCylinder>(&s.bulk)) {
        if (dc->circumference <= 0)
            fail(ErrorCode::InvalidShape, "doubled cylinder circumference must be positive");
    } else if (const auto* hc = std::get_if<HalfCylinder>(&s.bulk)) {
        if (hc->length <= 0) fail(ErrorCode::InvalidShape, "half cylinder length must be positive");
    }

    const int expected = boundary_components(s.bulk);
    if (expected == 0 && !s.bcs.ends.empty())
        fail(ErrorCode::InvalidShape, "closed manifold carries no boundary condition slots");
    if (expected > 0 && static_cast<int>(s.bcs.ends.size()) != expected)
        fail(ErrorCode::InvalidShape, "expected " + std::to_string(expected) +
                                          " boundary conditions, got " +
                                          std::to_string(s.bcs.ends.size()));

    for (auto& bc : s.bcs.ends) {
        if (bc.label == BcLabel::CustomLagrangian) {
            validate_custom_lagrangian(bc, s);
            const Real n = std::sqrt(std::norm(bc.lagrangian[0]) + std::norm(bc.lagrangian[1]));
            bc.lagrangian[0] /= n;
            bc.lagrangian[1] /= n;
        } else if (!bc.lagrangian.empty()) {
            fail(ErrorCode::InvalidShape, "Lagrangian data given for a built-in projection label");
        }
    }

    if (const auto* sw = std::get_if<SmoothWall>(&s.mass)) {
        if (sw->m <= 0 || sw->T <= 0) fail(ErrorCode::InvalidProfile, "SmoothWall needs m, T > 0");
        if (1.0 / sw->T >= wall_extent(s))
            fail(ErrorCode::InvalidProfile, "wall width 1/T does not fit inside the bulk");
        // Monotonicity of F_T across the transition.
        Real prev = -1.0;
        for (int i = 0; i <= 64; ++i) {
            const Real u = -1.0 / sw->T + 2.0 / sw->T * i / 64.0;
            const Real v = smooth_step(u, sw->T);
            if (v + 1e-14 < prev) fail(ErrorCode::InvalidProfile, "SmoothWall profile not monotone");
            prev = v;
        }
    } else if (const auto* st = std::get_if<StepWall>(&s.mass)) {
        if (st->m <= 0) fail(ErrorCode::InvalidProfile, "StepWall needs m > 0");
    }
    return s;
}

Real mass_at(const Scenario& s, Real u) {
    if (const auto* c = std::get_if<ConstantMass>(&s.mass)) return c->value;
    if (const auto* st = std::get_if<StepWall>(&s.mass)) {
        if (const auto* dc = std::get_if<DoubledCylinder>(&s.bulk)) {
            const Real locus = dc->circumference / 4.0;
            return (std::abs(u) < locus) ? st->m : -st->m;
        }
        return (u >= 0) ? st->m : -st->m;
    }
    const auto& sw = std::get<SmoothWall>(s.mass);
    if (const auto* dc = std::get_if<DoubledCylinder>(&s.bulk)) {
        const Real locus = dc->circumference / 4.0;
        if (u < 0) return sw.m * smooth_step(u + locus, sw.T);
        return -sw.m * smooth_step(u - locus, sw.T);
    }
    return sw.m * smooth_step(u, sw.T);
}

// ---------------------------------------------------------------------------
// serialization

namespace {

std::string fmt_real(Real x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

const char* label_name(BcLabel l) {
    switch (l) {
        case BcLabel::PiVPlus: return "pi_v_plus";
        case BcLabel::PiVMinus: return "pi_v_minus";
        case BcLabel::PGeq: return "p_geq";
        case BcLabel::CustomLagrangian: return "custom";
    }
    return "?";
}

BcLabel label_from(const std::string& name) {
    if (name == "pi_v_plus") return BcLabel::PiVPlus;
    if (name == "pi_v_minus") return BcLabel::PiVMinus;
    if (name == "p_geq") return BcLabel::PGeq;
    if (name == "custom") return BcLabel::CustomLagrangian;
    fail(ErrorCode::ParseError, "unknown boundary condition label '" + name + "'");
}

}  // namespace

std::string serialize(const Scenario& s) {
    std::ostringstream out;
    out << "[boundary]\n";
    out << "circumference = " << fmt_real(s.boundary.circumference) << "\n";
    out << "flux = " << fmt_real(s.boundary.flux) << "\n\n";

    out << "[bulk]\n";
    if (const auto* fc = std::get_if<FiniteCylinder>(&s.bulk)) {
        out << "shape = finite_cylinder\n";
        out << "length = " << fmt_real(fc->length) << "\n";
    } else if (const auto* dc = std::get_if<DoubledCylinder>(&s.bulk)) {
        out << "shape = doubled_cylinder\n";
        out << "circumference = " << fmt_real(dc->circumference) << "\n";
    } else {
        const auto& hc = std::get<HalfCylinder>(s.bulk);
        out << "shape = half_cylinder\n";
        out << "side = " << (hc.side == HalfCylinder::Side::Left ? "left" : "right") << "\n";
        out << "length = " << fmt_real(hc.length) << "\n";
    }
    out << "\n[mass]\n";
    if (const auto* c = std::get_if<ConstantMass>(&s.mass)) {
        out << "profile = constant\nvalue = " << fmt_real(c->value) << "\n";
    } else if (const auto* st = std::get_if<StepWall>(&s.mass)) {
        out << "profile = step_wall\nm = " << fmt_real(st->m) << "\n";
    } else {
        const auto& sw = std::get<SmoothWall>(s.mass);
        out << "profile = smooth_wall\nm = " << fmt_real(sw.m) << "\nT = " << fmt_real(sw.T) << "\n";
    }
    out << "\n[bcs]\n";
    static const char* end_names[2] = {"left", "right"};
    for (size_t i = 0; i < s.bcs.ends.size(); ++i) {
        const auto& bc = s.bcs.ends[i];
        out << end_names[i] << " = " << label_name(bc.label) << "\n";
        if (bc.label == BcLabel::CustomLagrangian) {
            out << end_names[i] << "_lagrangian =";
            for (const Complex& z : bc.lagrangian)
                out << " " << fmt_real(z.real()) << " " << fmt_real(z.imag());
            out << "\n";
        }
    }
    out << "\n[numerics]\n";
    out << "mode_cutoff = " << s.numerics.mode_cutoff << "\n";
    out << "grid_points = " << s.numerics.grid_points << "\n";
    out << "kernel_tolerance = " << fmt_real(s.numerics.kernel_tolerance) << "\n";
    out << "mu_window = " << fmt_real(s.numerics.mu_window) << "\n";
    out << "eta_t_split = " << fmt_real(s.numerics.eta.t_split) << "\n";
    out << "eta_panels_small = " << s.numerics.eta.panels_small << "\n";
    out << "eta_panels_large = " << s.numerics.eta.panels_large << "\n";
    out << "eta_gauss_points = " << s.numerics.eta.gauss_points << "\n";
    return out.str();
}

namespace {

struct IniData {
    std::map<std::string, std::map<std::string, std::string>> sections;

    bool has(const std::string& sec, const std::string& key) const {
        auto it = sections.find(sec);
        return it != sections.end() && it->second.count(key) > 0;
    }
    std::string get(const std::string& sec, const std::string& key) const {
        auto it = sections.find(sec);
        if (it == sections.end() || !it->second.count(key))
            fail(ErrorCode::ParseError, "missing key '" + key + "' in section [" + sec + "]");
        return it->second.at(key);
    }
    std::string get_or(const std::string& sec, const std::string& key,
                       const std::string& fallback) const {
        return has(sec, key) ? get(sec, key) : fallback;
    }
};

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    size_t b = s.find_last_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    return s.substr(a, b - a + 1);
}

IniData parse_ini(const std::string& text) {
    IniData ini;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                fail(ErrorCode::ParseError, "bad section header at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const size_t eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::ParseError, "expected key = value at line " + std::to_string(lineno));
        ini.sections[section][trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return ini;
}

Real parse_real(const std::string& s) {
    try {
        size_t pos = 0;
        const Real v = std::stod(s, &pos);
        if (pos != s.size()) fail(ErrorCode::ParseError, "trailing characters in number '" + s + "'");
        return v;
    } catch (const std::invalid_argument&) {
        fail(ErrorCode::ParseError, "not a number: '" + s + "'");
    } catch (const std::out_of_range&) {
        fail(ErrorCode::ParseError, "number out of range: '" + s + "'");
    }
}

int parse_int(const std::string& s) {
    const Real v = parse_real(s);
    if (!nearly_integer(v)) fail(ErrorCode::ParseError, "expected integer, got '" + s + "'");
    return static_cast<int>(std::llround(v));
}

std::vector<Complex> parse_complex_list(const std::string& s) {
    std::istringstream in(s);
    std::vector<Real> vals;
    Real v;
    while (in >> v) vals.push_back(v);
    if (vals.size() % 2 != 0)
        fail(ErrorCode::ParseError, "Lagrangian coefficients must come in re/im pairs");
    std::vector<Complex> out;
    for (size_t i = 0; i < vals.size(); i += 2) out.emplace_back(vals[i], vals[i + 1]);
    return out;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
    const IniData ini = parse_ini(text);
    Scenario s;
    s.boundary.circumference = parse_real(ini.get_or("boundary", "circumference", fmt_real(2 * kPi)));
    s.boundary.flux = parse_real(ini.get_or("boundary", "flux", "0"));

    const std::string shape = ini.get_or("bulk", "shape", "finite_cylinder");
    if (shape == "finite_cylinder") {
        s.bulk = FiniteCylinder{parse_real(ini.get_or("bulk", "length", "1"))};
    } else if (shape == "doubled_cylinder") {
        s.bulk = DoubledCylinder{parse_real(ini.get_or("bulk", "circumference", "2"))};
    } else if (shape == "half_cylinder") {
        HalfCylinder hc;
        const std::string side = ini.get_or("bulk", "side", "left");
        if (side == "left") hc.side = HalfCylinder::Side::Left;
        else if (side == "right") hc.side = HalfCylinder::Side::Right;
        else fail(ErrorCode::ParseError, "half_cylinder side must be left or right");
        hc.length = parse_real(ini.get_or("bulk", "length", "8"));
        s.bulk = hc;
    } else {
        fail(ErrorCode::ParseError, "unknown bulk shape '" + shape + "'");
    }

    const std::string profile = ini.get_or("mass", "profile", "constant");
    if (profile == "constant") {
        s.mass = ConstantMass{parse_real(ini.get_or("mass", "value", "0"))};
    } else if (profile == "step_wall") {
        s.mass = StepWall{parse_real(ini.get("mass", "m"))};
    } else if (profile == "smooth_wall") {
        s.mass = SmoothWall{parse_real(ini.get("mass", "m")), parse_real(ini.get("mass", "T"))};
    } else {
        fail(ErrorCode::ParseError, "unknown mass profile '" + profile + "'");
    }

    static const char* end_names[2] = {"left", "right"};
    for (int i = 0; i < boundary_components(s.bulk); ++i) {
        BoundaryCondition bc;
        bc.label = label_from(ini.get("bcs", end_names[i]));
        if (bc.label == BcLabel::CustomLagrangian)
            bc.lagrangian = parse_complex_list(ini.get("bcs", std::string(end_names[i]) + "_lagrangian"));
        s.bcs.ends.push_back(bc);
    }

    s.numerics.mode_cutoff = parse_int(ini.get_or("numerics", "mode_cutoff", "4"));
    s.numerics.grid_points = parse_int(ini.get_or("numerics", "grid_points", "256"));
    s.numerics.kernel_tolerance = parse_real(ini.get_or("numerics", "kernel_tolerance", "1e-8"));
    s.numerics.mu_window = parse_real(ini.get_or("numerics", "mu_window", "16"));
    s.numerics.eta.t_split = parse_real(ini.get_or("numerics", "eta_t_split", "1"));
    s.numerics.eta.panels_small = parse_int(ini.get_or("numerics", "eta_panels_small", "16"));
    s.numerics.eta.panels_large = parse_int(ini.get_or("numerics", "eta_panels_large", "24"));
    s.numerics.eta.gauss_points = parse_int(ini.get_or("numerics", "eta_gauss_points", "24"));
    return validate(s);
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ParseError, "cannot open scenario file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_text(ss.str());
}

}  // namespace etalab::model
