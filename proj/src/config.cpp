#include "ctkrylov/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

namespace ctk {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ParameterError("config: boolean expected for " + key + ", got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const double d = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ParameterError("config: number expected for " + key + ", got '" + v + "'");
    }
}

long long parse_int(const std::string& v, const std::string& key) {
    try {
        std::size_t pos = 0;
        const long long d = std::stoll(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ParameterError("config: integer expected for " + key + ", got '" + v + "'");
    }
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(v);
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::string join_list(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += v[i];
    }
    return out;
}

}  // namespace

Precision RunConfig::precision_kind() const {
    if (precision == "double") return Precision::double_fp;
    if (precision == "single") return Precision::single_fp;
    throw ParameterError("config: precision must be single or double, got '" + precision + "'");
}

BeamMode RunConfig::beam_mode() const {
    if (geometry == "parallel2d") return BeamMode::parallel2d;
    if (geometry == "parallel3d") return BeamMode::parallel3d;
    if (geometry == "cone3d") return BeamMode::cone3d;
    throw ParameterError("config: unknown geometry '" + geometry + "'");
}

void RunConfig::validate_common() const {
    phantom_kind();
    beam_mode();
    precision_kind();
    if (size < 8) throw ParameterError("config: size must be at least 8");
    if (n_angles < 1) throw ParameterError("config: n_angles must be at least 1");
    if (max_iters < 1) throw ParameterError("config: max_iters must be at least 1");
    if (residual_tolerance < 0) throw ParameterError("config: residual_tolerance must be >= 0");
    if (!(i0 > 0)) throw ParameterError("config: i0 must be positive");
    if (sigma < 0) throw ParameterError("config: sigma must be >= 0");
    if (lambda < 0) throw ParameterError("config: lambda must be >= 0");
    if (threads < 0) throw ParameterError("config: threads must be >= 0");
    if (backprojector != "matched" && backprojector != "voxel_driven")
        throw ParameterError("config: backprojector must be matched or voxel_driven");
    if (strategy != "fixed" && strategy != "dp" && strategy != "gcv")
        throw ParameterError("config: strategy must be fixed, dp or gcv");
}

void apply_override(RunConfig& c, const std::string& key, const std::string& value) {
    if (key == "phantom") c.phantom = value;
    else if (key == "size") c.size = int(parse_int(value, key));
    else if (key == "geometry") c.geometry = value;
    else if (key == "n_angles") c.n_angles = int(parse_int(value, key));
    else if (key == "angle_start_deg") c.angle_start_deg = parse_double(value, key);
    else if (key == "angle_range_deg") c.angle_range_deg = parse_double(value, key);
    else if (key == "detector_pixels_u") c.detector_pixels_u = int(parse_int(value, key));
    else if (key == "detector_pixels_v") c.detector_pixels_v = int(parse_int(value, key));
    else if (key == "detector_pixel_size") c.detector_pixel_size = parse_double(value, key);
    else if (key == "source_to_origin") c.source_to_origin = parse_double(value, key);
    else if (key == "origin_to_detector") c.origin_to_detector = parse_double(value, key);
    else if (key == "spacing") c.spacing = parse_double(value, key);
    else if (key == "i0") c.i0 = parse_double(value, key);
    else if (key == "sigma") c.sigma = parse_double(value, key);
    else if (key == "seed") c.seed = std::uint64_t(parse_int(value, key));
    else if (key == "solver") c.solver = value;
    else if (key == "solvers") c.solvers = split_list(value);
    else if (key == "lambda") c.lambda = parse_double(value, key);
    else if (key == "strategy") c.strategy = value;
    else if (key == "noise_level") c.noise_level = parse_double(value, key);
    else if (key == "outer_iters") c.outer_iters = int(parse_int(value, key));
    else if (key == "inner_iters") c.inner_iters = int(parse_int(value, key));
    else if (key == "warm_start") c.warm_start = parse_bool(value, key);
    else if (key == "backprojector") c.backprojector = value;
    else if (key == "max_iters") c.max_iters = int(parse_int(value, key));
    else if (key == "residual_tolerance") c.residual_tolerance = parse_double(value, key);
    else if (key == "stop_on_residual_increase") c.stop_on_residual_increase = parse_bool(value, key);
    else if (key == "reorth") c.reorth = parse_bool(value, key);
    else if (key == "precision") c.precision = value;
    else if (key == "projections") c.projections = value;
    else if (key == "ground_truth") c.ground_truth = value;
    else if (key == "output_dir") c.output_dir = value;
    else if (key == "window_min") c.window_min = parse_double(value, key);
    else if (key == "window_max") c.window_max = parse_double(value, key);
    else if (key == "threads") c.threads = int(parse_int(value, key));
    else throw ParameterError("config: unknown key '" + key + "'");
}

RunConfig parse_config(std::istream& in) {
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParameterError("config: line " + std::to_string(lineno) + " has no '='");
        apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ParameterError("cannot open config: " + path.string());
    return parse_config(f);
}

void write_config(std::ostream& out, const RunConfig& c,
                  const std::map<std::string, std::string>& info) {
    for (const auto& [k, v] : info) out << "# " << k << ": " << v << "\n";
    out << "phantom = " << c.phantom << "\n";
    out << "size = " << c.size << "\n";
    out << "geometry = " << c.geometry << "\n";
    out << "n_angles = " << c.n_angles << "\n";
    out << "angle_start_deg = " << format_double(c.angle_start_deg) << "\n";
    out << "angle_range_deg = " << format_double(c.angle_range_deg) << "\n";
    out << "detector_pixels_u = " << c.detector_pixels_u << "\n";
    out << "detector_pixels_v = " << c.detector_pixels_v << "\n";
    out << "detector_pixel_size = " << format_double(c.detector_pixel_size) << "\n";
    out << "source_to_origin = " << format_double(c.source_to_origin) << "\n";
    out << "origin_to_detector = " << format_double(c.origin_to_detector) << "\n";
    out << "spacing = " << format_double(c.spacing) << "\n";
    out << "i0 = " << format_double(c.i0) << "\n";
    out << "sigma = " << format_double(c.sigma) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "solver = " << c.solver << "\n";
    if (!c.solvers.empty()) out << "solvers = " << join_list(c.solvers) << "\n";
    out << "lambda = " << format_double(c.lambda) << "\n";
    out << "strategy = " << c.strategy << "\n";
    out << "noise_level = " << format_double(c.noise_level) << "\n";
    out << "outer_iters = " << c.outer_iters << "\n";
    out << "inner_iters = " << c.inner_iters << "\n";
    out << "warm_start = " << (c.warm_start ? "true" : "false") << "\n";
    out << "backprojector = " << c.backprojector << "\n";
    out << "max_iters = " << c.max_iters << "\n";
    out << "residual_tolerance = " << format_double(c.residual_tolerance) << "\n";
    out << "stop_on_residual_increase = " << (c.stop_on_residual_increase ? "true" : "false") << "\n";
    out << "reorth = " << (c.reorth ? "true" : "false") << "\n";
    out << "precision = " << c.precision << "\n";
    if (!c.projections.empty()) out << "projections = " << c.projections << "\n";
    if (!c.ground_truth.empty()) out << "ground_truth = " << c.ground_truth << "\n";
    out << "output_dir = " << c.output_dir << "\n";
    out << "window_min = " << format_double(c.window_min) << "\n";
    out << "window_max = " << format_double(c.window_max) << "\n";
    out << "threads = " << c.threads << "\n";
}

}  // namespace ctk
