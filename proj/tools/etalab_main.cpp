#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "etalab/eta.hpp"
#include "etalab/harness.hpp"
#include "etalab/heat.hpp"

namespace {

using namespace etalab;

std::string fmt(Real x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& body) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    out << body;
}

std::string spectrum_csv(const modes::Spectrum& s) {
    std::ostringstream out;
    out << "mu,multiplicity,block_lambda,method\n";
    const char* method = (s.method == modes::Method::Analytic) ? "analytic" : "discretized";
    for (const auto& e : s.entries)
        out << fmt(e.mu) << "," << e.multiplicity << "," << fmt(e.block_lambda) << "," << method
            << "\n";
    return out.str();
}

int cmd_spectrum(const std::string& config, const std::string& out_dir, bool analytic) {
    const auto scen = model::load_scenario_file(config);
    const auto spec = analytic ? modes::solve_analytic(scen) : modes::solve_discretized(scen);
    const std::string csv = spectrum_csv(spec);
    write_file(std::filesystem::path(out_dir) / "spectrum.csv", csv);
    std::cout << csv;
    return 0;
}

int cmd_eta(const std::string& config, const std::string& against, const std::string& out_dir) {
    const auto a = model::load_scenario_file(config);
    const auto b = model::load_scenario_file(against);
    const auto res = eta::domain_wall_eta_difference(a, b);
    nlohmann::ordered_json j;
    j["eta_difference"] = res.value;
    j["error_estimate"] = res.error_estimate;
    j["unpaired_gap"] = res.unpaired_gap;
    j["zero_modes"] = res.zero_modes;
    j["zero_mode_sign_sum"] = res.zero_mode_sign_sum;
    j["t_max"] = res.t_max;
    const std::string body = j.dump(2) + "\n";
    std::cout << body;
    write_file(std::filesystem::path(out_dir) / "eta.json", body);
    return 0;
}

int cmd_boundary_data(const std::string& config, const std::string& out_dir) {
    const auto scen = model::load_scenario_file(config);
    const auto data = boundary::eigendata(scen.boundary, scen.numerics.mode_cutoff);
    std::ostringstream out;
    out << "eigenvalue,section_id,chirality\n";
    for (const auto& e : data.entries)
        out << fmt(e.lambda) << ",k" << e.fourier_k << "c" << e.component << "," << e.chirality
            << "\n";
    std::cout << out.str();
    write_file(std::filesystem::path(out_dir) / "boundary.csv", out.str());
    return 0;
}

int cmd_index(const std::string& config) {
    const auto scen = model::load_scenario_file(config);
    const auto report = modes::kernel(scen);
    std::cout << "index = " << modes::index(scen) << "\n"
              << "kernel_dimension = " << report.dimension << "\n"
              << "chirality_trace_raw = " << fmt(report.chirality_trace_raw) << "\n";
    return 0;
}

int cmd_heat_trace(const std::string& config, const std::string& out_dir, Real R, Real t_min,
                   Real t_max, int samples) {
    const auto scen = model::load_scenario_file(config);
    const auto data = boundary::eigendata(scen.boundary, scen.numerics.mode_cutoff);
    Real m = 0;
    if (const auto* c = std::get_if<model::ConstantMass>(&scen.mass)) m = std::abs(c->value);
    if (const auto* st = std::get_if<model::StepWall>(&scen.mass)) m = st->m;
    if (const auto* sw = std::get_if<model::SmoothWall>(&scen.mass)) m = sw->m;
    if (m == 0) m = 1.0;
    std::ostringstream out;
    out << "t,theta,delta_c_direct,delta_c_by_parts\n";
    for (int i = 0; i < samples; ++i) {
        const Real t = t_min * std::pow(t_max / t_min, Real(i) / (samples - 1));
        const auto dc = heat::delta_c_integral(data, R, m, t);
        out << fmt(t) << "," << fmt(heat::theta(data, m, t)) << "," << fmt(dc.direct) << ","
            << fmt(dc.by_parts) << "\n";
    }
    write_file(std::filesystem::path(out_dir) / "heat_trace.csv", out.str());
    std::cout << out.str();
    return 0;
}

int cmd_verify(const std::string& id, const std::string& out_dir, const std::string& format,
               int threads, const harness::Overrides& overrides) {
    std::vector<harness::ExperimentResult> results;
    if (id == "all") {
        results = harness::run_all(overrides, threads);
    } else {
        results.push_back(harness::run_experiment(id, overrides));
    }
    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.id << "  residual " << fmt(r.residual)
                  << " (tolerance " << fmt(r.tolerance) << ")\n";
        all_pass &= r.pass;
    }
    harness::write_report_dir(out_dir, results, format);
    return all_pass ? 0 : 1;
}

int cmd_sweep(const std::string& id, const std::string& param, const std::string& values_csv,
              const std::string& out_dir, const std::string& format) {
    std::vector<Real> values;
    std::stringstream ss(values_csv);
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(std::stod(item));
    const auto table = harness::sweep(param, values, id);
    std::ostringstream out;
    out << param << ",lhs,rhs,residual,pass\n";
    bool all_pass = true;
    for (const auto& row : table.rows) {
        out << fmt(row.value) << "," << fmt(row.result.lhs) << "," << fmt(row.result.rhs) << ","
            << fmt(row.result.residual) << "," << (row.result.pass ? 1 : 0) << "\n";
        all_pass &= row.result.pass;
    }
    out << "# max spread " << fmt(table.max_spread) << "\n";
    std::cout << out.str();
    std::vector<harness::ExperimentResult> results;
    for (const auto& row : table.rows) results.push_back(row.result);
    harness::write_report_dir(out_dir, results, format);
    write_file(std::filesystem::path(out_dir) / (id + "-sweep.csv"), out.str());
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical laboratory for cylinder Dirac spectra, eta invariants and "
                 "spectral-condition indices"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string out_dir = "etalab-out";
    std::string format = "json";
    int threads = 1;
    long seed = 0;  // reserved; the core paths are deterministic
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--format", format, "report format: json, csv or both");
    app.add_option("--threads", threads, "experiments run in parallel up to this count");
    app.add_option("--seed", seed, "reserved");

    std::string config, against, id = "all", param, values;
    bool analytic = false;
    Real R = 2.0, t_min = 0.05, t_max = 5.0;
    int samples = 33;
    harness::Overrides overrides;
    Real ov = 0;

    auto* sp = app.add_subcommand("spectrum", "solve a scenario spectrum and export CSV");
    sp->add_option("--config", config, "scenario file")->required();
    sp->add_flag("--analytic", analytic, "use the closed-form route");

    auto* et = app.add_subcommand("eta", "eta difference of two scenarios on the same bulk");
    et->add_option("--config", config, "scenario file")->required();
    et->add_option("--against", against, "reference scenario file")->required();

    auto* ix = app.add_subcommand("index", "index and kernel of a massless scenario");
    ix->add_option("--config", config, "scenario file")->required();

    auto* bd = app.add_subcommand("boundary-data", "export the truncated boundary eigendata");
    bd->add_option("--config", config, "scenario file")->required();

    auto* ht = app.add_subcommand("heat-trace", "export Theta(t) and trace-defect curves");
    ht->add_option("--config", config, "scenario file")->required();
    ht->add_option("--R", R, "cutoff half-length");
    ht->add_option("--t-min", t_min, "first t sample");
    ht->add_option("--t-max", t_max, "last t sample");
    ht->add_option("--samples", samples, "number of log-spaced samples");

    auto* vf = app.add_subcommand("verify", "run registered experiments");
    vf->add_option("id", id, "experiment id or 'all'");
    auto add_overrides = [&](CLI::App* cmd) {
        cmd->add_option_function<Real>("--m", [&](Real v) { overrides.m = v; }, "mass override");
        cmd->add_option_function<Real>("--R", [&](Real v) { overrides.R = v; }, "length override");
        cmd->add_option_function<Real>("--T", [&](Real v) { overrides.T = v; }, "wall sharpness");
        cmd->add_option_function<Real>("--alpha", [&](Real v) { overrides.alpha = v; }, "flux");
        cmd->add_option_function<int>("--K", [&](int v) { overrides.K = v; }, "mode cutoff");
        cmd->add_option_function<int>("--N", [&](int v) { overrides.N = v; }, "grid points");
    };
    add_overrides(vf);
    (void)ov;

    auto* sw = app.add_subcommand("sweep", "sweep one parameter of an experiment");
    sw->add_option("id", id, "experiment id")->required();
    sw->add_option("--param", param, "parameter: m, R, T, K, N or alpha")->required();
    sw->add_option("--values", values, "comma-separated values")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sp->parsed()) return cmd_spectrum(config, out_dir, analytic);
        if (et->parsed()) return cmd_eta(config, against, out_dir);
        if (ix->parsed()) return cmd_index(config);
        if (bd->parsed()) return cmd_boundary_data(config, out_dir);
        if (ht->parsed()) return cmd_heat_trace(config, out_dir, R, t_min, t_max, samples);
        if (vf->parsed()) return cmd_verify(id, out_dir, format, threads, overrides);
        if (sw->parsed()) return cmd_sweep(id, param, values, out_dir, format);
    } catch (const etalab::Error& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    return 0;
}
