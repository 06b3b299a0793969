#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "ctkrylov/pipeline.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::string output;
    std::string precision;
    std::string projections;
    int threads = -1;
    long long seed = -1;
    std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, CommonFlags& f, bool with_projections) {
    sub->add_option("--config", f.config, "flat key = value config file");
    sub->add_option("--output", f.output, "output directory");
    sub->add_option("--precision", f.precision, "working precision")
        ->check(CLI::IsMember({"single", "double"}));
    sub->add_option("--threads", f.threads, "operator thread count (0 = library default)");
    sub->add_option("--seed", f.seed, "noise RNG seed (overrides config)");
    sub->add_option("--set", f.overrides, "extra key=value override (repeatable)");
    if (with_projections)
        sub->add_option("projections", f.projections, "projection data file (raw + .hdr)");
}

ctk::RunConfig build_config(const CommonFlags& f) {
    ctk::RunConfig cfg;
    if (!f.config.empty()) cfg = ctk::load_config(f.config);
    if (!f.output.empty()) cfg.output_dir = f.output;
    if (!f.precision.empty()) cfg.precision = f.precision;
    if (!f.projections.empty()) cfg.projections = f.projections;
    if (f.threads >= 0) cfg.threads = f.threads;
    if (f.seed >= 0) cfg.seed = static_cast<std::uint64_t>(f.seed);
    for (const std::string& kv : f.overrides) {
        const std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw ctk::ParameterError("--set expects key=value, got '" + kv + "'");
        ctk::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Matrix-free Krylov reconstruction pipeline for simulated CT data"};
    app.require_subcommand(1);

    CommonFlags sim_f, rec_f, cmp_f;
    CLI::App* sim = app.add_subcommand("simulate", "generate phantom and measurements");
    CLI::App* rec = app.add_subcommand("reconstruct", "run one solver on projection data");
    CLI::App* cmp = app.add_subcommand("compare", "run several solvers on identical data");
    add_common(sim, sim_f, false);
    add_common(rec, rec_f, true);
    add_common(cmp, cmp_f, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) ctk::run_simulate(build_config(sim_f));
        if (rec->parsed()) ctk::run_reconstruct(build_config(rec_f));
        if (cmp->parsed()) ctk::run_compare(build_config(cmp_f));
        return 0;
    } catch (const ctk::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << " (iteration " << e.iteration << ")\n";
        return 1;
    } catch (const ctk::ParameterError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ctk::GeometryError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ctk::DimensionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ctk::DegenerateInputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
