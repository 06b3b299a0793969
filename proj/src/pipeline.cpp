#include "ctkrylov/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <numbers>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ctkrylov/gmres.hpp"
#include "ctkrylov/hybrid.hpp"
#include "ctkrylov/io.hpp"
#include "ctkrylov/metrics.hpp"
#include "ctkrylov/noise.hpp"
#include "ctkrylov/phantom.hpp"
#include "ctkrylov/pipeline.hpp"
#include "ctkrylov/solvers.hpp"
#include "ctkrylov/tv.hpp"

namespace ctk {

namespace {

namespace fs = std::filesystem;

constexpr double deg2rad = std::numbers::pi / 180.0;

void configure_threads(const RunConfig& cfg) {
#ifdef _OPENMP
    if (cfg.threads > 0) omp_set_num_threads(cfg.threads);
#else
    (void)cfg;
#endif
}

VolumeShape phantom_shape(const RunConfig& cfg) {
    const int n = cfg.size;
    const bool flat = cfg.phantom_kind() != PhantomKind::shepp_logan_3d;
    return {n, n, flat ? 1 : n, cfg.spacing};
}

void ensure_output_dir(const RunConfig& cfg) {
    fs::create_directories(cfg.output_dir);
    if (!fs::is_directory(cfg.output_dir))
        throw ParameterError("output directory is not writable: " + cfg.output_dir);
}

void write_metadata(const fs::path& path, const RunConfig& cfg,
                    std::map<std::string, std::string> info) {
    info["rng"] = noise_rng_id();
    std::ofstream f(path);
    if (!f) throw ParameterError("cannot write metadata: " + path.string());
    write_config(f, cfg, info);
}

std::string solver_label(const RunConfig& cfg, const std::string& name) {
    if (name == "lsmr") return name + "(lambda=" + std::to_string(cfg.lambda) + ")";
    if (name == "hybrid_lsqr" || name == "flsqr_tv") return name + "(" + cfg.strategy + ")";
    return name;
}

HybridStrategy strategy_from(const RunConfig& cfg) {
    if (cfg.strategy == "fixed") return HybridStrategy::fixed(cfg.lambda);
    if (cfg.strategy == "dp") return HybridStrategy::dp(cfg.noise_level);
    return HybridStrategy::gcv();
}

template <typename T>
SolverOptions<T> options_from(const RunConfig& cfg, const Volume<float>* gt) {
    SolverOptions<T> opts;
    opts.max_iters = cfg.max_iters;
    opts.stop_on_explicit_residual_increase = cfg.stop_on_residual_increase;
    opts.residual_tolerance = cfg.residual_tolerance;
    opts.reorth = cfg.reorth;
    opts.rng_seed = cfg.seed;
    if (gt) opts.ground_truth = volume_to<T>(*gt).data;
    return opts;
}

template <typename T>
SolveResult<T> run_named_solver(const std::string& name, const OperatorPair<T>& pair,
                                const std::vector<T>& b, const RunConfig& cfg,
                                const SolverOptions<T>& opts) {
    if (name == "cgls") return cgls(pair, cspan(b), opts);
    if (name == "lsqr") return lsqr(pair, cspan(b), opts);
    if (name == "lsmr") return lsmr(pair, cspan(b), cfg.lambda, opts);
    if (name == "sirt") return sirt(pair, cspan(b), opts);
    if (name == "ab_gmres") return ab_gmres(pair, cspan(b), opts);
    if (name == "ba_gmres") return ba_gmres(pair, cspan(b), opts);
    if (name == "hybrid_lsqr") return hybrid_lsqr(pair, cspan(b), strategy_from(cfg), opts);
    if (name == "cgls_tv")
        return cgls_tv(pair, cspan(b), cfg.lambda, cfg.outer_iters, cfg.inner_iters, opts,
                       cfg.warm_start);
    if (name == "flsqr_tv") return flsqr_tv(pair, cspan(b), strategy_from(cfg), opts);
    throw ParameterError("unknown solver: " + name);
}

void export_slices(const fs::path& dir, const Volume<float>& vol, double wmin, double wmax) {
    if (wmax <= wmin) {
        wmin = vol.data.empty() ? 0.0 : *std::min_element(vol.data.begin(), vol.data.end());
        wmax = vol.data.empty() ? 1.0 : *std::max_element(vol.data.begin(), vol.data.end());
    }
    // Central transversal plane (fixed z): nx x ny image.
    {
        const int k = vol.nz / 2;
        std::vector<float> img(std::size_t(vol.nx) * vol.ny);
        for (int j = 0; j < vol.ny; ++j)
            for (int i = 0; i < vol.nx; ++i)
                img[std::size_t(j) * vol.nx + i] = vol.at(i, j, k);
        write_pgm16(dir / "slice_transversal.pgm", vol.nx, vol.ny, img.data(), wmin, wmax);
    }
    // Central sagittal plane (fixed x): ny x nz image.
    {
        const int i = vol.nx / 2;
        std::vector<float> img(std::size_t(vol.ny) * vol.nz);
        for (int k = 0; k < vol.nz; ++k)
            for (int j = 0; j < vol.ny; ++j)
                img[std::size_t(k) * vol.ny + j] = vol.at(i, j, k);
        write_pgm16(dir / "slice_sagittal.pgm", vol.ny, vol.nz, img.data(), wmin, wmax);
    }
}

/// Geometry for reconstruction: distances and pixel size from the config, angles and
/// detector counts from the projection file itself.
ConeGeometry geometry_for_data(RunConfig& cfg, const ProjectionSet<float>& proj) {
    ConeGeometry g = resolve_geometry(cfg);
    g.angles = proj.angles;
    g.nu = proj.nu;
    g.nv = proj.nv;
    g.validate();
    return g;
}

template <typename T>
struct PreparedRun {
    ConeGeometry geom;
    OperatorPair<T> pair;
    std::vector<T> b;
    SolverOptions<T> opts;
};

template <typename T>
PreparedRun<T> prepare_run(RunConfig& cfg, const ProjectionSet<float>& proj,
                           const Volume<float>* gt) {
    PreparedRun<T> run;
    run.geom = geometry_for_data(cfg, proj);
    const auto variant = cfg.backprojector == "matched" ? BackprojectVariant::matched
                                                        : BackprojectVariant::voxel_driven;
    run.pair = projector_pair<T>(run.geom, variant);
    run.b = projections_to<T>(proj).data;
    run.opts = options_from<T>(cfg, gt);
    return run;
}

struct RunSummary {
    std::string label;
    int iterations = 0;
    std::string stop_reason;
    double min_error = std::numeric_limits<double>::quiet_NaN();
    int min_error_iter = -1;
    double rebound_ratio = std::numeric_limits<double>::quiet_NaN();
    double final_residual = std::numeric_limits<double>::quiet_NaN();
    double wall_seconds = 0.0;
    ConvergenceLog log;
};

template <typename T>
RunSummary summarize(const std::string& label, const SolveResult<T>& res, double wall_seconds) {
    RunSummary s;
    s.label = label;
    s.iterations = res.iterations_run;
    s.stop_reason = to_string(res.stop_reason);
    s.wall_seconds = wall_seconds;
    s.log = res.log;
    if (!res.log.explicit_residual.empty()) s.final_residual = res.log.explicit_residual.back();
    if (!res.log.relative_error.empty()) {
        const auto& err = res.log.relative_error;
        std::size_t best = 0;
        for (std::size_t i = 1; i < err.size(); ++i)
            if (err[i] < err[best]) best = i;
        s.min_error = err[best];
        s.min_error_iter = int(best) + 1;
        s.rebound_ratio = (err.back() - err[best]) / err[best];
    }
    return s;
}

template <typename T>
RunSummary execute_one(const std::string& name, RunConfig cfg, const ProjectionSet<float>& proj,
                       const Volume<float>* gt, Volume<float>* recon_out) {
    cfg.solver = name;
    PreparedRun<T> run = prepare_run<T>(cfg, proj, gt);
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult<T> res = run_named_solver<T>(name, run.pair, run.b, cfg, run.opts);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (recon_out) *recon_out = volume_from<T>(res.volume());
    return summarize(solver_label(cfg, name), res, secs);
}

RunSummary execute_dispatch(const std::string& name, const RunConfig& cfg,
                            const ProjectionSet<float>& proj, const Volume<float>* gt,
                            Volume<float>* recon_out) {
    if (cfg.precision_kind() == Precision::double_fp)
        return execute_one<double>(name, cfg, proj, gt, recon_out);
    return execute_one<float>(name, cfg, proj, gt, recon_out);
}

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

ConeGeometry resolve_geometry(RunConfig& cfg) {
    cfg.validate_common();
    const VolumeShape vol = phantom_shape(cfg);
    ConeGeometry g = default_geometry(cfg.beam_mode(), vol, cfg.n_angles,
                                      cfg.angle_range_deg * deg2rad);
    g.angles = equidistant_angles(cfg.n_angles, cfg.angle_start_deg * deg2rad,
                                  cfg.angle_range_deg * deg2rad);
    if (cfg.detector_pixels_u > 0) g.nu = cfg.detector_pixels_u;
    if (cfg.detector_pixels_v > 0) g.nv = cfg.detector_pixels_v;
    if (cfg.detector_pixel_size > 0) g.detector_pixel_size = cfg.detector_pixel_size;
    if (cfg.source_to_origin > 0) g.source_to_origin = cfg.source_to_origin;
    if (cfg.origin_to_detector > 0) g.origin_to_detector = cfg.origin_to_detector;
    g.validate();
    // Write the resolved values back so emitted metadata reproduces this geometry.
    cfg.detector_pixels_u = g.nu;
    cfg.detector_pixels_v = g.nv;
    cfg.detector_pixel_size = g.detector_pixel_size;
    cfg.source_to_origin = g.source_to_origin;
    cfg.origin_to_detector = g.origin_to_detector;
    return g;
}

void run_simulate(RunConfig cfg) {
    configure_threads(cfg);
    ensure_output_dir(cfg);
    const ConeGeometry geom = resolve_geometry(cfg);

    const Volume<float> phantom = make_phantom<float>(cfg.phantom_kind(), cfg.size);
    ProjectionSet<float> clean;
    if (cfg.precision_kind() == Precision::double_fp) {
        clean = projections_from(forward_project(volume_to<double>(phantom), geom));
    } else {
        clean = forward_project(phantom, geom);
    }
    NoiseModel noise{cfg.i0, cfg.sigma, cfg.seed};
    const ProjectionSet<float> noisy = add_noise(clean, noise);

    const fs::path dir = cfg.output_dir;
    save_volume(dir / "phantom.vol", phantom);
    save_projections(dir / "projections_clean.proj", clean);
    save_projections(dir / "projections_noisy.proj", noisy);
    cfg.projections = (dir / "projections_noisy.proj").string();
    cfg.ground_truth = (dir / "phantom.vol").string();
    write_metadata(dir / "simulate_meta.cfg", cfg, {{"command", "simulate"}});
}

void run_reconstruct(RunConfig cfg) {
    configure_threads(cfg);
    cfg.validate_common();
    if (cfg.projections.empty())
        throw ParameterError("reconstruct needs a projections file (projections = PATH)");
    ensure_output_dir(cfg);

    const ProjectionSet<float> proj = load_projections(cfg.projections);
    std::optional<Volume<float>> gt;
    if (!cfg.ground_truth.empty()) gt = load_volume(cfg.ground_truth);

    Volume<float> recon;
    const RunSummary s =
        execute_dispatch(cfg.solver, cfg, proj, gt ? &*gt : nullptr, &recon);

    const fs::path dir = cfg.output_dir;
    save_volume(dir / "recon.vol", recon);
    export_slices(dir, recon, cfg.window_min, cfg.window_max);
    std::ofstream csv(dir / "convergence.csv");
    write_csv(csv, s.log);
    write_metadata(dir / "reconstruct_meta.cfg", cfg,
                   {{"command", "reconstruct"},
                    {"stop_reason", s.stop_reason},
                    {"iterations", std::to_string(s.iterations)},
                    {"wall_seconds", fmt_g(s.wall_seconds)}});
}

void run_compare(RunConfig cfg) {
    configure_threads(cfg);
    cfg.validate_common();
    if (cfg.solvers.size() < 2)
        throw ParameterError("compare needs at least two solvers (solvers = a,b,...)");
    if (cfg.projections.empty())
        throw ParameterError("compare needs a projections file (projections = PATH)");
    ensure_output_dir(cfg);

    const ProjectionSet<float> proj = load_projections(cfg.projections);
    std::optional<Volume<float>> gt;
    if (!cfg.ground_truth.empty()) gt = load_volume(cfg.ground_truth);

    const fs::path dir = cfg.output_dir;
    std::vector<RunSummary> rows;
    for (const std::string& name : cfg.solvers) {
        RunSummary s = execute_dispatch(name, cfg, proj, gt ? &*gt : nullptr, nullptr);
        std::ofstream csv(dir / (name + ".csv"));
        write_csv(csv, s.log);
        rows.push_back(std::move(s));
    }

    // Merged wide CSV: one iter column, then the four history columns per solver.
    {
        std::ofstream wide(dir / "compare_wide.csv");
        wide << "iter";
        for (const auto& r : rows)
            for (const char* col :
                 {"implicit_residual", "explicit_residual", "relative_error", "lambda"})
                wide << ',' << r.label << '.' << col;
        wide << '\n';
        std::size_t max_iter = 0;
        for (const auto& r : rows) max_iter = std::max(max_iter, r.log.iterations());
        auto cell = [](const std::vector<double>& v, std::size_t i) {
            return i < v.size() ? detail::csv_number(v[i]) : std::string();
        };
        for (std::size_t i = 0; i < max_iter; ++i) {
            wide << (i + 1);
            for (const auto& r : rows) {
                wide << ',' << cell(r.log.implicit_residual, i)
                     << ',' << cell(r.log.explicit_residual, i)
                     << ',' << cell(r.log.relative_error, i)
                     << ',' << cell(r.log.lambda, i);
            }
            wide << '\n';
        }
    }

    {
        std::ofstream sum(dir / "summary.txt");
        sum << "solver  iterations  stop_reason  min_rel_error  min_error_iter  "
               "rebound_ratio  final_explicit_residual  wall_seconds\n";
        for (const auto& r : rows) {
            sum << r.label << "  " << r.iterations << "  " << r.stop_reason << "  "
                << fmt_g(r.min_error) << "  " << r.min_error_iter << "  "
                << fmt_g(r.rebound_ratio) << "  " << fmt_g(r.final_residual) << "  "
                << fmt_g(r.wall_seconds) << "\n";
        }
    }
    write_metadata(dir / "compare_meta.cfg", cfg, {{"command", "compare"}});
}

}  // namespace ctk
