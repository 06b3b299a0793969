#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "ctkrylov/types.hpp"

namespace ctk {

enum class BeamMode { parallel2d, parallel3d, cone3d };

inline const char* to_string(BeamMode m) {
    switch (m) {
        case BeamMode::parallel2d: return "parallel2d";
        case BeamMode::parallel3d: return "parallel3d";
        case BeamMode::cone3d: return "cone3d";
    }
    return "?";
}

/// Circular-trajectory acquisition description. The volume is centred on the origin,
/// the source rotates in the z = 0 plane, the detector v-axis is the world z-axis.
struct ConeGeometry {
    BeamMode mode = BeamMode::parallel2d;
    double source_to_origin = 0.0;    // mm, cone3d only
    double origin_to_detector = 0.0;  // mm
    double detector_pixel_size = 1.0; // mm, isotropic
    int nu = 0, nv = 0;               // detector pixel counts
    VolumeShape vol;                  // voxel grid the rays are defined against
    std::vector<double> angles;       // radians

    ProjShape proj_shape() const { return {int(angles.size()), nu, nv}; }

    void validate() const {
        if (angles.empty()) throw GeometryError("geometry needs at least one angle");
        if (nu <= 0 || nv <= 0) throw GeometryError("detector pixel counts must be positive");
        if (!(detector_pixel_size > 0.0)) throw GeometryError("detector pixel size must be positive");
        if (!(origin_to_detector > 0.0)) throw GeometryError("origin-to-detector distance must be positive");
        if (vol.nx <= 0 || vol.ny <= 0 || vol.nz <= 0 || !(vol.spacing > 0.0))
            throw GeometryError("geometry volume descriptor invalid");
        if (mode == BeamMode::parallel2d && (vol.nz != 1 || nv != 1))
            throw GeometryError("parallel2d requires nz = 1 and nv = 1");
        if (mode == BeamMode::cone3d) {
            if (!(source_to_origin > 0.0))
                throw GeometryError("cone3d requires a positive source-to-origin distance");
            const double hx = 0.5 * vol.nx * vol.spacing;
            const double hy = 0.5 * vol.ny * vol.spacing;
            const double hz = 0.5 * vol.nz * vol.spacing;
            const double half_diag = std::sqrt(hx * hx + hy * hy + hz * hz);
            if (source_to_origin <= half_diag)
                throw GeometryError("cone3d source lies inside the volume diagonal");
        }
    }
};

/// Equidistant angles over [start, start + range), reduced into [0, 2*pi).
inline std::vector<double> equidistant_angles(int n, double start_rad = 0.0,
                                              double range_rad = 2.0 * std::numbers::pi) {
    if (n <= 0) throw GeometryError("angle count must be positive");
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) a[i] = canonical_angle(start_rad + range_rad * i / n);
    return a;
}

/// Desk-scale default acquisition for an n-cube (or n x n single-slice) volume.
inline ConeGeometry default_geometry(BeamMode mode, const VolumeShape& vol, int n_angles,
                                     double range_rad = 2.0 * std::numbers::pi) {
    ConeGeometry g;
    g.mode = mode;
    g.vol = vol;
    g.angles = equidistant_angles(n_angles, 0.0, range_rad);
    const int n = std::max(vol.nx, std::max(vol.ny, vol.nz));
    if (mode == BeamMode::cone3d) {
        g.source_to_origin = 2.0 * n * vol.spacing;
        g.origin_to_detector = 1.0 * n * vol.spacing;
        g.detector_pixel_size = 1.5 * vol.spacing;
        g.nu = g.nv = (3 * n) / 2;
    } else {
        g.origin_to_detector = 1.0 * n * vol.spacing;
        g.detector_pixel_size = vol.spacing;
        g.nu = (3 * n) / 2;
        g.nv = (mode == BeamMode::parallel2d) ? 1 : (3 * vol.nz) / 2;
    }
    g.validate();
    return g;
}

}  // namespace ctk
