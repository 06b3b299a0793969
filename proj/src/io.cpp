#include "ctkrylov/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

static_assert(__BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__,
              "raw file formats assume a little-endian host");

namespace ctk {

namespace {

std::filesystem::path header_path(const std::filesystem::path& p) {
    std::filesystem::path h = p;
    h += ".hdr";
    return h;
}

void write_raw(const std::filesystem::path& path, const float* data, std::size_t n) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParameterError("cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(data), std::streamsize(n * sizeof(float)));
    if (!f) throw ParameterError("write failed: " + path.string());
}

std::vector<float> read_raw(const std::filesystem::path& path, std::size_t n) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParameterError("cannot open for reading: " + path.string());
    std::vector<float> data(n);
    f.read(reinterpret_cast<char*>(data.data()), std::streamsize(n * sizeof(float)));
    if (std::size_t(f.gcount()) != n * sizeof(float))
        throw DimensionError("raw file shorter than its header promises: " + path.string());
    return data;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

void save_volume(const std::filesystem::path& path, const Volume<float>& vol) {
    vol.validate();
    write_raw(path, vol.data.data(), vol.data.size());
    std::ofstream h(header_path(path));
    if (!h) throw ParameterError("cannot open for writing: " + header_path(path).string());
    h << vol.nx << ' ' << vol.ny << ' ' << vol.nz << ' ' << format_double(vol.spacing) << '\n';
}

Volume<float> load_volume(const std::filesystem::path& path) {
    std::ifstream h(header_path(path));
    if (!h) throw ParameterError("missing header: " + header_path(path).string());
    int nx = 0, ny = 0, nz = 0;
    double spacing = 0.0;
    if (!(h >> nx >> ny >> nz >> spacing))
        throw ParameterError("malformed volume header: " + header_path(path).string());
    Volume<float> vol(nx, ny, nz, spacing);
    vol.data = read_raw(path, vol.size());
    return vol;
}

void save_projections(const std::filesystem::path& path, const ProjectionSet<float>& proj) {
    proj.validate();
    write_raw(path, proj.data.data(), proj.data.size());
    std::ofstream h(header_path(path));
    if (!h) throw ParameterError("cannot open for writing: " + header_path(path).string());
    h << proj.n_angles << ' ' << proj.nu << ' ' << proj.nv << '\n';
    for (double a : proj.angles) h << format_double(a) << '\n';
}

ProjectionSet<float> load_projections(const std::filesystem::path& path) {
    std::ifstream h(header_path(path));
    if (!h) throw ParameterError("missing header: " + header_path(path).string());
    int n_angles = 0, nu = 0, nv = 0;
    if (!(h >> n_angles >> nu >> nv))
        throw ParameterError("malformed projection header: " + header_path(path).string());
    std::vector<double> angles(std::size_t(std::max(n_angles, 0)));
    for (double& a : angles)
        if (!(h >> a)) throw ParameterError("projection header is missing angles");
    ProjectionSet<float> proj(std::move(angles), nu, nv);
    proj.data = read_raw(path, proj.size());
    return proj;
}

void write_pgm16(const std::filesystem::path& path, int width, int height,
                 const float* values, double wmin, double wmax) {
    if (width <= 0 || height <= 0) throw DimensionError("pgm dimensions must be positive");
    if (!(wmax > wmin)) wmax = wmin + 1.0;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ParameterError("cannot open for writing: " + path.string());
    f << "P5\n" << width << ' ' << height << "\n65535\n";
    const double scale = 65535.0 / (wmax - wmin);
    std::vector<unsigned char> row(std::size_t(width) * 2);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double v = (double(values[std::size_t(y) * width + x]) - wmin) * scale;
            v = std::clamp(v, 0.0, 65535.0);
            const unsigned int q = static_cast<unsigned int>(v + 0.5);
            row[std::size_t(x) * 2] = static_cast<unsigned char>(q >> 8);
            row[std::size_t(x) * 2 + 1] = static_cast<unsigned char>(q & 0xff);
        }
        f.write(reinterpret_cast<const char*>(row.data()), std::streamsize(row.size()));
    }
}

}  // namespace ctk
