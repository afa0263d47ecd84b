#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "etalab/common.hpp"

namespace etalab::harness {

/// Per-run parameter overrides; experiments consume the ones they understand.
struct Overrides {
    std::optional<Real> m, R, T, alpha;
    std::optional<int> K, N;
};

struct ExperimentResult {
    std::string id;
    std::string description;
    Real lhs = 0;
    Real rhs = 0;
    Real residual = 0;
    Real tolerance = 0;
    bool pass = false;
    double wall_ms = 0;
    std::map<std::string, Real> params;
    std::vector<std::string> notes;
};

struct Experiment {
    std::string id;
    std::string identity;     // the verified relation, stated mathematically
    std::string description;
    std::vector<std::string> sweepable;  // subset of {m, R, T, K, N, alpha}
    std::function<ExperimentResult(const Overrides&)> run;
};

const std::vector<Experiment>& registry();

ExperimentResult run_experiment(const std::string& id, const Overrides& overrides = {});
std::vector<ExperimentResult> run_all(const Overrides& overrides = {}, int threads = 1);

struct SweepRow {
    Real value = 0;
    ExperimentResult result;
};

struct SweepTable {
    std::string parameter;
    std::string experiment_id;
    std::vector<SweepRow> rows;
    Real max_spread = 0;  // max |lhs_i - lhs_0|
};

SweepTable sweep(const std::string& parameter, const std::vector<Real>& values,
                 const std::string& id);

/// Serialize results as the machine-readable report; wall-clock fields are
/// emitted separately so report bodies diff clean.
std::string report_json(const std::vector<ExperimentResult>& results, bool include_wall = true);
std::string report_csv(const std::vector<ExperimentResult>& results);

void write_report_dir(const std::string& out_dir, const std::vector<ExperimentResult>& results,
                      const std::string& format);

}  // namespace etalab::harness
