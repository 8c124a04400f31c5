#include <cstdlib>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "hnorm/errors.hpp"
#include "hnorm/pipeline.hpp"

namespace {

std::vector<double> parse_heights(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || item.find_first_not_of(" \t", used) != std::string::npos)
            throw hnorm::ValidationError("invalid height '" + item + "'");
        out.push_back(v);
    }
    return out;
}

int worker_count() {
    const char* env = std::getenv("HNORM_WORKERS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1 || n > 256) throw hnorm::ValidationError("HNORM_WORKERS must be an integer in [1, 256]");
    return static_cast<int>(n);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Harmonic norm inequality batch driver"};
    std::vector<std::string> inputs;
    std::string heights, out_dir, config_path;
    int refine = -1;
    bool sweeps = false;
    app.add_option("--input", inputs, "manifold file or directory of .mfd files (repeatable)");
    app.add_option("--heights", heights, "comma-separated truncation log heights, ascending");
    app.add_option("--refine", refine, "finest refinement level N (levels 0..N are run)")->check(CLI::NonNegativeNumber);
    app.add_option("--out", out_dir, "output directory");
    app.add_flag("--sweeps", sweeps, "also write the model sweep tables");
    app.add_option("--config", config_path, "JSON run configuration; flags override its values");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    hnorm::RunConfig cfg;
    try {
        if (!config_path.empty()) cfg = hnorm::parse_config_file(config_path);
        if (!inputs.empty()) cfg.inputs = inputs;
        if (!heights.empty()) cfg.heights = parse_heights(heights);
        if (refine >= 0) {
            cfg.levels.clear();
            for (int k = 0; k <= refine; ++k) cfg.levels.push_back(k);
        }
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        if (sweeps) cfg.sweeps = true;
        cfg.workers = worker_count();
        hnorm::validate_config(cfg);
    } catch (const hnorm::Error& e) {
        std::cerr << "hnorm: configuration error: " << e.what() << '\n';
        return 2;
    }

    try {
        const hnorm::BatchResult result = hnorm::run_batch(cfg);
        for (const auto& w : result.warnings) std::cerr << "hnorm: warning: " << w << '\n';
        std::cout << result.entries.size() - result.failures() << " of " << result.entries.size()
                  << " manifolds processed; reports in " << cfg.out_dir << '\n';
        return hnorm::batch_exit_code(result);
    } catch (const std::exception& e) {
        std::cerr << "hnorm: " << e.what() << '\n';
        return 2;
    }
}
