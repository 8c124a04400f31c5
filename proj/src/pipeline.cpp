#include "hnorm/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "hnorm/bessel.hpp"
#include "hnorm/cohomology.hpp"
#include "hnorm/cusp_analysis.hpp"
#include "hnorm/dec.hpp"
#include "hnorm/errors.hpp"
#include "hnorm/geometry.hpp"
#include "hnorm/mesh.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace hnorm {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

void write_atomic(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary);
        if (!os) throw Error("cannot write " + tmp.string());
        os << text;
        if (!os) throw Error("write failed for " + tmp.string());
    }
    fs::rename(tmp, path);
}

ordered_json config_to_json(const RunConfig& c) {
    ordered_json j;
    j["inputs"] = c.inputs;
    j["heights"] = c.heights;
    j["levels"] = c.levels;
    j["quadrature_order"] = c.quadrature_order;
    j["solver_tolerance"] = c.solver_tolerance;
    j["l1_gap"] = c.l1_gap;
    j["l1_iterations"] = c.l1_iterations;
    j["ds_samples"] = c.ds_samples;
    j["flux_levels"] = c.flux_levels;
    j["out_dir"] = c.out_dir;
    j["sweeps"] = c.sweeps;
    return j;
}

struct LevelSolution {
    MetricMesh mesh;
    std::vector<TetGeometry> geo;
    std::vector<HarmonicResult> harmonic;
};

LevelSolution solve_level(const TriangulatedManifold& M, const ClassSpace& S, double T, int level,
                          const RunConfig& cfg) {
    LevelSolution L;
    L.mesh = build_mesh_for(M, T, level);
    L.geo = mesh_geometry(L.mesh);
    HarmonicOptions opt;
    opt.tolerance = cfg.solver_tolerance;
    opt.bc = M.kind == ManifoldKind::FlatTorus ? BoundaryCondition::Absolute : BoundaryCondition::Relative;
    for (int i = 0; i < S.rank(); ++i) {
        std::vector<double> e(S.rank(), 0.0);
        e[i] = 1.0;
        L.harmonic.push_back(harmonic_representative(L.mesh, L.geo, transfer_cochain(L.mesh, S, e), opt));
    }
    return L;
}

ConvergenceRow convergence_row(const LevelSolution& L, int i, const RunConfig& cfg, const std::string& sweep,
                               int level, double T) {
    const HarmonicResult& h = L.harmonic[i];
    ConvergenceRow row;
    row.sweep = sweep;
    row.level = level;
    row.height = T;
    row.tets = L.mesh.num_tets();
    row.l2 = h.l2;
    row.cg_iterations = h.iterations;
    const FluxReport F = flux_check(L.mesh, L.geo, h.form, 1, cfg.flux_levels);
    row.flux_discrepancy = F.discrepancy;
    row.mean_flux_error = F.l2_squared > 0 ? std::abs(F.mean_flux - F.l2_squared) / F.l2_squared : 0.0;
    return row;
}

double smallest_cusp_eigenvalue(const TriangulatedManifold& M) {
    double lam = std::numeric_limits<double>::infinity();
    for (const CuspData& c : cusp_geometry(M)) lam = std::min(lam, torus_spectrum(c, 1).front().lambda);
    return lam;
}

}  // namespace

void validate_config(const RunConfig& c) {
    if (!(c.solver_tolerance > 0)) throw ValidationError("solver_tolerance must be positive");
    if (!(c.l1_gap > 0)) throw ValidationError("l1_gap must be positive");
    if (c.l1_iterations < 1) throw ValidationError("l1_iterations must be positive");
    if (c.ds_samples < 8) throw ValidationError("ds_samples must be at least 8");
    if (c.flux_levels < 1) throw ValidationError("flux_levels must be positive");
    if (c.workers < 1) throw ValidationError("workers must be positive");
    if (c.quadrature_order != 4) throw ValidationError("quadrature_order must be 4 (four-point rule)");
    if (c.levels.empty()) throw ValidationError("at least one refinement level is required");
    for (size_t i = 0; i < c.levels.size(); ++i) {
        if (c.levels[i] < 0) throw ValidationError("refinement levels must be nonnegative");
        if (i > 0 && c.levels[i] <= c.levels[i - 1]) throw ValidationError("refinement levels must increase");
    }
    for (size_t i = 0; i < c.heights.size(); ++i) {
        if (!std::isfinite(c.heights[i])) throw ValidationError("heights must be finite");
        if (i > 0 && c.heights[i] <= c.heights[i - 1]) throw ValidationError("heights must be sorted ascending");
    }
    if (c.out_dir.empty()) throw ValidationError("out_dir must not be empty");
}

RunConfig parse_config_text(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    RunConfig c;
    try {
        for (const auto& [key, v] : j.items()) {
            if (key == "inputs") c.inputs = v.get<std::vector<std::string>>();
            else if (key == "heights") c.heights = v.get<std::vector<double>>();
            else if (key == "levels") c.levels = v.get<std::vector<int>>();
            else if (key == "refine") {
                const int n = v.get<int>();
                if (n < 0) throw ValidationError("refine must be nonnegative");
                c.levels.clear();
                for (int k = 0; k <= n; ++k) c.levels.push_back(k);
            }
            else if (key == "quadrature_order") c.quadrature_order = v.get<int>();
            else if (key == "solver_tolerance") c.solver_tolerance = v.get<double>();
            else if (key == "l1_gap") c.l1_gap = v.get<double>();
            else if (key == "l1_iterations") c.l1_iterations = v.get<int>();
            else if (key == "ds_samples") c.ds_samples = v.get<int>();
            else if (key == "flux_levels") c.flux_levels = v.get<int>();
            else if (key == "out_dir") c.out_dir = v.get<std::string>();
            else if (key == "sweeps") c.sweeps = v.get<bool>();
            else throw ValidationError("unknown config key '" + key + "'");
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("config value has the wrong type: ") + e.what());
    }
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ValidationError("cannot read config file " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_json(const RunConfig& cfg) { return config_to_json(cfg).dump(2); }

std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<std::string> files;
            for (const auto& e : fs::directory_iterator(in))
                if (e.is_regular_file() && e.path().extension() == ".mfd") files.push_back(e.path().string());
            std::sort(files.begin(), files.end());
            out.insert(out.end(), files.begin(), files.end());
        } else {
            out.push_back(in);
        }
    }
    return out;
}

ManifoldAnalysis analyze_manifold(const TriangulatedManifold& M, const RunConfig& cfg) {
    validate_config(cfg);
    ManifoldAnalysis A;
    NormReport& R = A.report;
    R.name = M.name;
    const bool flat = M.kind == ManifoldKind::FlatTorus;
    R.kind = flat ? "flat_torus" : "ideal";
    R.hyperbolic = !flat;
    R.orientable = flat || analyze_combinatorics(M).orientable;
    if (!R.orientable) R.notes.push_back("non-orientable manifold");
    R.v_ln_sqrt2 = v_of_r(std::log(std::sqrt(2.0)));
    R.inv_sqrt_v = 1.0 / std::sqrt(R.v_ln_sqrt2);
    R.sys = M.systole;
    R.rhs = rhs_constants(M);
    R.d_max = R.rhs.d_max;
    R.vol = flat ? M.box[0] * M.box[1] * M.box[2] : volume(M);

    const ClassSpace S = class_space(M);
    R.rank = S.rank();
    if (R.rank == 0) {
        R.notes.push_back("no L2 harmonic forms: the image subspace is zero");
        return A;
    }

    std::vector<double> heights = cfg.heights;
    if (flat) heights = {0.0};
    else if (heights.empty()) heights = {truncation_constants(M, M.tau0).tau};
    const double T = heights.back();
    const int finest = cfg.levels.back();
    R.truncation_height = T;
    R.refinement = finest;

    A.convergence.resize(R.rank);
    for (int i = 0; i < R.rank; ++i) {
        A.convergence[i].coords.assign(R.rank, 0);
        A.convergence[i].coords[i] = 1;
    }

    std::vector<double> l2_prev(R.rank, std::numeric_limits<double>::quiet_NaN());
    LevelSolution fine;
    for (size_t k = 0; k < cfg.levels.size(); ++k) {
        LevelSolution L = solve_level(M, S, T, cfg.levels[k], cfg);
        for (int i = 0; i < R.rank; ++i) {
            A.convergence[i].rows.push_back(convergence_row(L, i, cfg, "refinement", cfg.levels[k], T));
            if (k + 1 < cfg.levels.size()) l2_prev[i] = L.harmonic[i].l2;
        }
        if (k + 1 == cfg.levels.size()) fine = std::move(L);
    }
    if (!flat && heights.size() > 1) {
        for (size_t k = 0; k + 1 < heights.size(); ++k) {
            LevelSolution L = solve_level(M, S, heights[k], finest, cfg);
            for (int i = 0; i < R.rank; ++i)
                A.convergence[i].rows.push_back(convergence_row(L, i, cfg, "height", finest, heights[k]));
        }
        const double lam = smallest_cusp_eigenvalue(M);
        for (int i = 0; i < R.rank; ++i) {
            std::vector<double> hs, vs;
            for (const auto& row : A.convergence[i].rows)
                if (row.sweep == "height") hs.push_back(row.height), vs.push_back(row.l2);
            hs.push_back(T);
            vs.push_back(fine.harmonic[i].l2);
            if (hs.size() >= 3) A.convergence[i].height_fit = fit_truncation_sweep(hs, vs, lam);
        }
    }
    R.mesh_tets = fine.mesh.num_tets();
    R.mesh_volume = mesh_volume(fine.mesh);

    const DecOperators ops = dec_operators(fine.mesh);
    R.gram.assign(R.rank, std::vector<double>(R.rank, 0.0));
    for (int i = 0; i < R.rank; ++i) {
        const Eigen::Map<const Eigen::VectorXd> hi(fine.harmonic[i].form.cochain.data(), fine.mesh.num_edges());
        const Eigen::VectorXd Mhi = ops.M1 * hi;
        for (int j = 0; j < R.rank; ++j) {
            const Eigen::Map<const Eigen::VectorXd> hj(fine.harmonic[j].form.cochain.data(), fine.mesh.num_edges());
            R.gram[i][j] = hj.dot(Mhi);
        }
    }

    ReportContext ctx{M.name, R.vol, R.rhs, R.hyperbolic};
    const double lam = flat ? 0.0 : smallest_cusp_eigenvalue(M);
    L1Options l1opt;
    l1opt.bc = flat ? BoundaryCondition::Absolute : BoundaryCondition::Relative;
    l1opt.relative_gap = cfg.l1_gap;
    l1opt.max_iterations = cfg.l1_iterations;
    for (int i = 0; i < R.rank; ++i) {
        const HarmonicResult& h = fine.harmonic[i];
        ClassNormInput in;
        in.coords = A.convergence[i].coords;
        const std::vector<double> x(in.coords.begin(), in.coords.end());
        const ThurstonValue th = thurston_norm(M, x, &fine.mesh, &S);
        in.thurston = th.value;
        in.provenance = th.provenance;
        in.l2 = h.l2;
        const L1Result l1 = l1_minimize(fine.mesh, fine.geo, h.form.cochain, l1opt);
        in.l1_min = l1.value;
        in.l1_lower = l1.lower_bound;
        in.linf = closed_form_norms(fine.geo, h.form).linf;
        in.cv = constant_length_cv(fine.mesh, fine.geo, h.form.cochain);
        in.budget.solver = h.residual * h.l2;
        in.budget.mesh = std::isnan(l2_prev[i]) ? 0.0 : std::abs(h.l2 - l2_prev[i]);
        if (A.convergence[i].height_fit.fitted) in.budget.truncation = std::abs(A.convergence[i].height_fit.A - h.l2);
        else if (!flat) in.budget.truncation = h.l2 * std::exp(-lam * std::exp(T));
        ClassRecord rec = evaluate_class(ctx, in);
        if (!l1.converged) rec.flags.push_back("l1 minimisation stopped at relative gap " + fmt(l1.gap));
        if (std::isnan(l2_prev[i])) rec.flags.push_back("single refinement level: mesh error not estimated");
        R.classes.push_back(std::move(rec));
    }

    try {
        std::function<double(const std::vector<double>&)> th = [&M](const std::vector<double>& x) {
            return thurston_norm(M, x).value;
        };
        R.D = functionals_DiDs(R.vol, R.gram, M.thurston_ball, th, cfg.ds_samples);
        R.has_D = true;
        if (!(R.D.Di > 0)) R.notes.push_back("D functionals vanish: the Thurston norm is zero on the image");
    } catch (const Error& e) {
        R.notes.push_back(std::string("D functionals unavailable: ") + e.what());
    }
    return A;
}

std::string report_json(const NormReport& R, const RunConfig& cfg) {
    ordered_json j;
    j["manifold"] = R.name;
    j["kind"] = R.kind;
    j["hyperbolic"] = R.hyperbolic;
    j["orientable"] = R.orientable;
    j["rank"] = R.rank;
    ordered_json c;
    c["vol"] = {{"value", R.vol}, {"provenance", R.kind == "flat_torus" ? "box volume" : "shape parameters"}};
    c["sys"] = {{"value", R.sys}, {"provenance", "ingested"}};
    c["d_max"] = {{"value", R.d_max}, {"provenance", "cusp lattices"}};
    c["v_ln_sqrt2"] = R.v_ln_sqrt2;
    c["inv_sqrt_v"] = R.inv_sqrt_v;
    c["rhs_main"] = R.rhs.main;
    c["rhs_linf"] = R.rhs.linf;
    c["rhs_branch"] = R.rhs.branch;
    j["constants"] = c;
    j["mesh"] = {{"truncation_height", R.truncation_height},
                 {"refinement", R.refinement},
                 {"tets", R.mesh_tets},
                 {"volume", R.mesh_volume}};
    ordered_json classes = ordered_json::array();
    for (const ClassRecord& r : R.classes) {
        const ClassNormInput& in = r.input;
        ordered_json e;
        e["coords"] = in.coords;
        e["thurston"] = {{"value", in.thurston}, {"provenance", in.provenance}};
        e["l2"] = in.l2 ? ordered_json(*in.l2) : ordered_json(nullptr);
        e["l1_min"] = in.l1_min ? ordered_json(*in.l1_min) : ordered_json(nullptr);
        e["l1_lower_bound"] = in.l1_lower;
        e["linf"] = in.linf ? ordered_json(*in.linf) : ordered_json(nullptr);
        e["skipped"] = r.skipped;
        e["left"] = {{"slack", r.left_slack}, {"holds", r.left_holds}, {"strict", r.left_strict}};
        e["right"] = {{"slack", r.right_slack}, {"holds", r.right_holds}};
        e["error_budget"] = {{"solver", in.budget.solver},
                             {"truncation", in.budget.truncation},
                             {"mesh", in.budget.mesh},
                             {"total", in.budget.total()}};
        e["chain"] = {{"checked", r.chain_checked},
                      {"pi_th_le_l1", r.chain_pi_l1},
                      {"l1_le_sqrtvol_l2", r.chain_l1_l2},
                      {"l2sq_le_2pi_linf_th", r.chain_l2_linf}};
        e["sharpness"] = {{"constant_length_cv", r.sharpness.cv},
                          {"l1_over_pi_th", r.sharpness.ratio_pi},
                          {"l1_over_2pi_th", r.sharpness.ratio_2pi},
                          {"sandwich", r.sharpness.sandwich}};
        e["flags"] = r.flags;
        classes.push_back(e);
    }
    j["classes"] = classes;
    j["gram"] = R.gram;
    if (R.has_D) {
        j["D"] = {{"Di", R.D.Di},   {"Ds", R.D.Ds},         {"exact", R.D.exact}, {"samples", R.D.samples},
                  {"resolution", R.D.resolution}, {"argmin", R.D.argmin}, {"argmax", R.D.argmax}};
    } else {
        j["D"] = nullptr;
    }
    j["notes"] = R.notes;
    j["config"] = config_to_json(cfg);
    return j.dump(2) + "\n";
}

std::string convergence_csv(const ClassConvergence& c) {
    std::ostringstream os;
    os << "sweep,level,height,tets,l2,flux_discrepancy,mean_flux_error,cg_iterations\n";
    for (const auto& r : c.rows)
        os << r.sweep << ',' << r.level << ',' << fmt(r.height) << ',' << r.tets << ',' << fmt(r.l2) << ','
           << fmt(r.flux_discrepancy) << ',' << fmt(r.mean_flux_error) << ',' << r.cg_iterations << '\n';
    if (c.height_fit.fitted) os << "# extrapolated_l2," << fmt(c.height_fit.A) << '\n';
    return os.str();
}

int BatchResult::failures() const {
    return static_cast<int>(std::count_if(entries.begin(), entries.end(), [](const BatchEntry& e) { return !e.ok; }));
}

std::string summary_csv(const BatchResult& result) {
    std::ostringstream os;
    os << "input,manifold,status,rank,vol,rhs_main,classes,left_all,right_all,strict_all,Di,Ds,error\n";
    for (const auto& e : result.entries) {
        os << e.input << ',' << e.name << ',' << (e.ok ? "ok" : "failed") << ',';
        if (e.report) {
            const NormReport& R = *e.report;
            bool l = true, r = true, s = true;
            for (const auto& c : R.classes) l &= c.left_holds, r &= c.right_holds, s &= c.left_strict;
            os << R.rank << ',' << fmt(R.vol) << ',' << fmt(R.rhs.main) << ',' << R.classes.size() << ','
               << (R.classes.empty() ? "" : (l ? "true" : "false")) << ','
               << (R.classes.empty() ? "" : (r ? "true" : "false")) << ','
               << (R.classes.empty() ? "" : (s ? "true" : "false")) << ','
               << (R.has_D ? fmt(R.D.Di) : "") << ',' << (R.has_D ? fmt(R.D.Ds) : "") << ',';
        } else {
            os << ",,,,,,,,,";
        }
        std::string err = e.error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        os << err << '\n';
    }
    return os.str();
}

BatchResult run_batch(const RunConfig& cfg) {
    validate_config(cfg);
    BatchResult result;
    const std::vector<std::string> files = expand_inputs(cfg.inputs);
    fs::create_directories(cfg.out_dir);
    if (files.empty()) result.warnings.push_back("no input manifolds");

    std::set<std::string> used;
    for (const auto& f : files) {
        BatchEntry e;
        e.input = f;
        std::string stem = fs::path(f).stem().string();
        std::string s = stem;
        for (int k = 2; used.count(s); ++k) s = stem + "_" + std::to_string(k);
        used.insert(s);
        e.stem = s;
        e.name = stem;
        result.entries.push_back(e);
    }

    std::atomic<size_t> next{0};
    std::mutex log_mutex;
    auto work = [&] {
        for (size_t k = next++; k < result.entries.size(); k = next++) {
            BatchEntry& e = result.entries[k];
            try {
                const TriangulatedManifold M = parse_manifold(e.input);
                e.name = M.name;
                validate_manifold(M);
                ManifoldAnalysis A = analyze_manifold(M, cfg);
                write_atomic(fs::path(cfg.out_dir) / (e.stem + ".report.json"), report_json(A.report, cfg));
                for (size_t i = 0; i < A.convergence.size(); ++i)
                    write_atomic(fs::path(cfg.out_dir) / (e.stem + ".class" + std::to_string(i) + ".convergence.csv"),
                                 convergence_csv(A.convergence[i]));
                e.report = std::move(A.report);
                e.ok = true;
            } catch (const std::exception& ex) {
                e.ok = false;
                e.error = ex.what();
                std::lock_guard<std::mutex> lock(log_mutex);
                std::cerr << "hnorm: " << e.input << ": " << ex.what() << '\n';
            }
        }
    };
    const int n = std::max(1, std::min<int>(cfg.workers, static_cast<int>(result.entries.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < n; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    write_atomic(fs::path(cfg.out_dir) / "summary.csv", summary_csv(result));
    if (cfg.sweeps) write_model_sweeps((fs::path(cfg.out_dir) / "sweeps").string());
    return result;
}

int batch_exit_code(const BatchResult& result) { return result.failures() > 0 ? 1 : 0; }

std::string SweepTable::csv() const {
    std::ostringstream os;
    for (size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
    os << '\n';
    for (const auto& r : rows) {
        for (size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << fmt(r[i]);
        os << '\n';
    }
    return os.str();
}

std::vector<SweepTable> model_sweeps() {
    std::vector<SweepTable> out;

    SweepTable v{"v_of_r", {"r", "v", "inv_sqrt_v"}, {}};
    for (int k = 0; k < 100; ++k) {
        const double r = 0.05 + (5.0 - 0.05) * k / 99.0;
        const double val = v_of_r(r);
        v.rows.push_back({r, val, 1.0 / std::sqrt(val)});
    }
    out.push_back(v);

    SweepTable torus{"torus_model", {"c", "norm_squared", "law", "ratio"}, {}};
    for (double c : {5.0, 10.0, 20.0, 40.0}) {
        const TorusModelValue m = torus_model_norm(c);
        torus.rows.push_back({m.c, m.norm_squared, m.law, m.ratio});
    }
    out.push_back(torus);

    const BlowupModel b = blowup_model({4.0, 8.0, 16.0, 32.0, 64.0});
    SweepTable blow{"blowup_model", {"Z", "log_Z", "norm_squared"}, {}};
    for (size_t k = 0; k < b.heights.size(); ++k)
        blow.rows.push_back({b.heights[k], std::log(b.heights[k]), b.norm_squared[k]});
    out.push_back(blow);

    // Single dominant mode of the unit-square cusp above height 1.
    CuspExpansion e;
    e.base_height = 1.0;
    e.area = 1.0;
    const CuspData sq = cusp_from_translations({1.0, 0.0}, {0.0, 1.0});
    ExpansionTerm term;
    term.mode = torus_spectrum(sq, 1).front();
    term.a = 1.0;
    e.terms.push_back(term);
    e.lambda1_defined = true;
    e.lambda1 = term.mode.lambda;
    SweepTable ret{"retraction", {"i", "support_height", "l2_error"}, {}};
    for (int i : {1, 2, 4, 8, 16}) {
        const RetractionResult r = retraction_compactify(e, i);
        ret.rows.push_back({static_cast<double>(i), r.support_height, r.l2_error});
    }
    out.push_back(ret);

    SweepTable bes{"bessel_residual", {"z", "residual"}, {}};
    for (const auto& row : bessel_identity_table(0.1, 10.0, 100)) bes.rows.push_back({row.z, row.residual});
    out.push_back(bes);
    return out;
}

void write_model_sweeps(const std::string& dir) {
    fs::create_directories(dir);
    for (const auto& t : model_sweeps()) write_atomic(fs::path(dir) / (t.name + ".csv"), t.csv());
}

}  // namespace hnorm
