#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hnorm/hodge.hpp"
#include "hnorm/inequality.hpp"
#include "hnorm/manifold.hpp"

namespace hnorm {

struct RunConfig {
    std::vector<std::string> inputs;  // manifold files or directories of *.mfd files
    std::vector<double> heights;      // truncation log heights; empty selects log(3 L0) per manifold
    std::vector<int> levels{0, 1, 2}; // refinement levels, ascending
    int quadrature_order = 4;         // points per cell; the symmetric four-point rule is the only one
    double solver_tolerance = 1e-10;
    double l1_gap = 1e-4;
    int l1_iterations = 60;
    int ds_samples = 2000;
    int flux_levels = 16;
    std::string out_dir = "hnorm_out";
    bool sweeps = false;
    int workers = 1;
};

// Throws ValidationError describing the first violated constraint.
void validate_config(const RunConfig& cfg);
// JSON configuration (keys as in RunConfig). Unknown keys are rejected.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config_file(const std::string& path);
std::string config_json(const RunConfig& cfg);

// Files named directly are kept in order; directories contribute their *.mfd files sorted by name.
std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs);

struct ConvergenceRow {
    std::string sweep;  // "refinement" or "height"
    int level = 0;
    double height = 0.0;
    int tets = 0;
    double l2 = 0.0;
    double flux_discrepancy = 0.0;
    double mean_flux_error = 0.0;  // |mean flux - l2^2| / l2^2
    int cg_iterations = 0;
};

struct ClassConvergence {
    std::vector<long long> coords;
    std::vector<ConvergenceRow> rows;
    SweepFit height_fit;  // fitted only with three or more heights
};

struct ManifoldAnalysis {
    NormReport report;
    std::vector<ClassConvergence> convergence;
};

// Full pipeline for one manifold: harmonic representatives of the basis classes on every
// refinement level at the finest height (and on every height at the finest level), norms,
// flux identity, Thurston values, inequality records and the D functionals.
ManifoldAnalysis analyze_manifold(const TriangulatedManifold& M, const RunConfig& cfg);

std::string report_json(const NormReport& report, const RunConfig& cfg);
std::string convergence_csv(const ClassConvergence& c);

struct BatchEntry {
    std::string input;
    std::string name;
    std::string stem;    // file stem used for the output files
    bool ok = false;
    std::string error;
    std::optional<NormReport> report;
};

struct BatchResult {
    std::vector<BatchEntry> entries;
    std::vector<std::string> warnings;
    int failures() const;
};

std::string summary_csv(const BatchResult& result);

// Runs every input with a pool of cfg.workers threads and writes, under cfg.out_dir,
// <stem>.report.json, <stem>.class<i>.convergence.csv and summary.csv (plus the model sweeps when
// cfg.sweeps is set). Per-manifold failures are recorded in the summary.
BatchResult run_batch(const RunConfig& cfg);
int batch_exit_code(const BatchResult& result);

// ---- Model sweeps ----------------------------------------------------------------------------

struct SweepTable {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::string csv() const;
};

std::vector<SweepTable> model_sweeps();
void write_model_sweeps(const std::string& dir);

}  // namespace hnorm
