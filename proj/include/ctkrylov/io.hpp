#pragma once

#include <filesystem>
#include <string>

#include "ctkrylov/types.hpp"

namespace ctk {

// On-disk formats are fixed at 32-bit little-endian floats regardless of the working
// precision. Each raw file has a text sidecar at <path>.hdr:
//   volume:      "nx ny nz spacing" on one line
//   projections: "n_angles nu nv" on the first line, then one angle (radians) per line

void save_volume(const std::filesystem::path& path, const Volume<float>& vol);
Volume<float> load_volume(const std::filesystem::path& path);

void save_projections(const std::filesystem::path& path, const ProjectionSet<float>& proj);
ProjectionSet<float> load_projections(const std::filesystem::path& path);

/// 16-bit binary portable graymap (P5, maxval 65535, most significant byte first).
/// Values are window-scaled from [wmin, wmax] and clamped.
void write_pgm16(const std::filesystem::path& path, int width, int height,
                 const float* values, double wmin, double wmax);

template <typename T>
Volume<T> volume_to(const Volume<float>& v) {
    Volume<T> out(v.shape());
    for (std::size_t i = 0; i < v.data.size(); ++i) out.data[i] = T(v.data[i]);
    return out;
}

template <typename T>
Volume<float> volume_from(const Volume<T>& v) {
    Volume<float> out(v.shape());
    for (std::size_t i = 0; i < v.data.size(); ++i) out.data[i] = float(v.data[i]);
    return out;
}

template <typename T>
ProjectionSet<T> projections_to(const ProjectionSet<float>& p) {
    ProjectionSet<T> out(p.angles, p.nu, p.nv);
    for (std::size_t i = 0; i < p.data.size(); ++i) out.data[i] = T(p.data[i]);
    return out;
}

template <typename T>
ProjectionSet<float> projections_from(const ProjectionSet<T>& p) {
    ProjectionSet<float> out(p.angles, p.nu, p.nv);
    for (std::size_t i = 0; i < p.data.size(); ++i) out.data[i] = float(p.data[i]);
    return out;
}

}  // namespace ctk
