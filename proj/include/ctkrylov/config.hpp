#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ctkrylov/geometry.hpp"
#include "ctkrylov/phantom.hpp"
#include "ctkrylov/types.hpp"

namespace ctk {

enum class Precision { single_fp, double_fp };

/// Everything a pipeline command needs, parsed from a flat `key = value` file
/// (one pair per line, `#` comments). Unset geometry fields (zeros) are resolved to
/// desk-scale defaults before a run; emitted metadata always carries resolved values.
struct RunConfig {
    // phantom / data
    std::string phantom = "shepp_logan_2d";
    int size = 64;

    // geometry
    std::string geometry = "parallel2d";
    int n_angles = 60;
    double angle_start_deg = 0.0;
    double angle_range_deg = 360.0;
    int detector_pixels_u = 0;       // 0 = auto
    int detector_pixels_v = 0;       // 0 = auto
    double detector_pixel_size = 0;  // 0 = auto
    double source_to_origin = 0;     // 0 = auto (cone3d)
    double origin_to_detector = 0;   // 0 = auto
    double spacing = 1.0;

    // noise
    double i0 = 1e5;
    double sigma = 0.5;
    std::uint64_t seed = 0;

    // solver
    std::string solver = "lsqr";
    std::vector<std::string> solvers;  // compare only
    double lambda = 0.0;
    std::string strategy = "fixed";  // fixed | dp | gcv
    double noise_level = 0.0;        // dp
    int outer_iters = 4;
    int inner_iters = 15;
    bool warm_start = false;
    std::string backprojector = "matched";  // matched | voxel_driven
    int max_iters = 30;
    double residual_tolerance = 1e-6;
    bool stop_on_residual_increase = true;
    bool reorth = true;
    std::string precision = "double";  // double | single

    // io
    std::string projections;   // input path for reconstruct/compare
    std::string ground_truth;  // optional volume path for error logging
    std::string output_dir = ".";
    double window_min = 0.0, window_max = 0.0;  // equal = auto (data min/max)
    int threads = 0;  // 0 = library default

    Precision precision_kind() const;
    PhantomKind phantom_kind() const { return phantom_kind_from_string(phantom); }
    BeamMode beam_mode() const;

    void validate_common() const;
};

/// Parse `key = value` lines; later keys override earlier ones. Unknown keys raise,
/// so typos fail loudly.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::filesystem::path& path);

/// Serialize every field, resolved, in a fixed order; parse(serialize(c)) == c.
void write_config(std::ostream& out, const RunConfig& cfg,
                  const std::map<std::string, std::string>& info = {});

/// Apply one `key=value` assignment (CLI overrides).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

}  // namespace ctk
