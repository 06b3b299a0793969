#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "ctkrylov/types.hpp"

namespace ctk {

enum class PhantomKind { shepp_logan_3d, shepp_logan_2d, piecewise_blocks };

inline const char* to_string(PhantomKind k) {
    switch (k) {
        case PhantomKind::shepp_logan_3d: return "shepp_logan_3d";
        case PhantomKind::shepp_logan_2d: return "shepp_logan_2d";
        case PhantomKind::piecewise_blocks: return "piecewise_blocks";
    }
    return "?";
}

/// Additive ellipsoid in normalized [-1,1] coordinates, rotated about the z axis.
struct Ellipsoid {
    double cx, cy, cz;
    double ax, ay, az;
    double phi_deg;
    double intensity;

    bool contains(double x, double y, double z) const {
        const double phi = phi_deg * std::numbers::pi / 180.0;
        const double c = std::cos(phi), s = std::sin(phi);
        const double dx = x - cx, dy = y - cy, dz = z - cz;
        const double xr = c * dx + s * dy;
        const double yr = -s * dx + c * dy;
        const double u = xr / ax, v = yr / ay, w = dz / az;
        return u * u + v * v + w * w <= 1.0;
    }
};

struct EllipsoidPhantom {
    std::vector<Ellipsoid> parts;
    VolumeShape grid;

    void validate() const {
        if (grid.nx < 1 || grid.ny < 1 || grid.nz < 1) throw ParameterError("phantom grid invalid");
        for (const auto& e : parts) {
            if (!(e.ax > 0.0 && e.ay > 0.0 && e.az > 0.0))
                throw ParameterError("ellipsoid semi-axes must be positive");
            if (!std::isfinite(e.intensity)) throw ParameterError("ellipsoid intensity not finite");
        }
    }
};

/// Classic head phantom, original intensities. Columns: intensity, x/y semi-axes,
/// centre, rotation (degrees).
inline const std::vector<Ellipsoid>& shepp_logan_ellipses_2d() {
    static const std::vector<Ellipsoid> table = {
        {0.0, 0.0, 0.0, 0.69, 0.92, 1.0, 0.0, 2.0},
        {0.0, -0.0184, 0.0, 0.6624, 0.874, 1.0, 0.0, -0.98},
        {0.22, 0.0, 0.0, 0.11, 0.31, 1.0, -18.0, -0.02},
        {-0.22, 0.0, 0.0, 0.16, 0.41, 1.0, 18.0, -0.02},
        {0.0, 0.35, 0.0, 0.21, 0.25, 1.0, 0.0, 0.01},
        {0.0, 0.1, 0.0, 0.046, 0.046, 1.0, 0.0, 0.01},
        {0.0, -0.1, 0.0, 0.046, 0.046, 1.0, 0.0, 0.01},
        {-0.08, -0.605, 0.0, 0.046, 0.023, 1.0, 0.0, 0.01},
        {0.0, -0.605, 0.0, 0.023, 0.023, 1.0, 0.0, 0.01},
        {0.06, -0.605, 0.0, 0.023, 0.046, 1.0, 0.0, 0.01},
    };
    return table;
}

/// Standard 3D extension of the head phantom (ten ellipsoids).
inline const std::vector<Ellipsoid>& shepp_logan_ellipsoids_3d() {
    static const std::vector<Ellipsoid> table = {
        {0.0, 0.0, 0.0, 0.69, 0.92, 0.81, 0.0, 2.0},
        {0.0, -0.0184, 0.0, 0.6624, 0.874, 0.78, 0.0, -0.8},
        {0.22, 0.0, 0.0, 0.11, 0.31, 0.22, -18.0, -0.2},
        {-0.22, 0.0, 0.0, 0.16, 0.41, 0.28, 18.0, -0.2},
        {0.0, 0.35, -0.15, 0.21, 0.25, 0.41, 0.0, 0.1},
        {0.0, 0.1, 0.25, 0.046, 0.046, 0.05, 0.0, 0.1},
        {0.0, -0.1, 0.25, 0.046, 0.046, 0.05, 0.0, 0.1},
        {-0.08, -0.605, 0.0, 0.046, 0.023, 0.05, 0.0, 0.1},
        {0.0, -0.605, 0.0, 0.023, 0.023, 0.02, 0.0, 0.1},
        {0.06, -0.605, 0.0, 0.023, 0.046, 0.02, 0.0, 0.1},
    };
    return table;
}

/// Rasterize on cell centres: voxel (i,j,k) samples the normalized point
/// ((2i+1-n)/n, ...), so index mirroring i <-> n-1-i negates the coordinate exactly.
template <typename T>
Volume<T> rasterize(const EllipsoidPhantom& ph) {
    ph.validate();
    Volume<T> vol(ph.grid);
    const int nx = ph.grid.nx, ny = ph.grid.ny, nz = ph.grid.nz;
    for (int k = 0; k < nz; ++k) {
        const double z = nz == 1 ? 0.0 : double(2 * k + 1 - nz) / nz;
        for (int j = 0; j < ny; ++j) {
            const double y = double(2 * j + 1 - ny) / ny;
            for (int i = 0; i < nx; ++i) {
                const double x = double(2 * i + 1 - nx) / nx;
                double v = 0.0;
                for (const auto& e : ph.parts)
                    if (e.contains(x, y, z)) v += e.intensity;
                vol.at(i, j, k) = T(v);
            }
        }
    }
    return vol;
}

/// Deterministic synthetic ground-truth images. shepp_logan_2d and piecewise_blocks
/// are single-slice (n x n x 1); shepp_logan_3d is an n-cube. piecewise_blocks nests
/// two axis-aligned squares (three distinct values), which makes TV behaviour easy to
/// read off.
template <typename T>
Volume<T> make_phantom(PhantomKind kind, int n) {
    if (n < 8) throw ParameterError("phantom size must be at least 8");
    switch (kind) {
        case PhantomKind::shepp_logan_2d: {
            EllipsoidPhantom ph{shepp_logan_ellipses_2d(), {n, n, 1, 1.0}};
            return rasterize<T>(ph);
        }
        case PhantomKind::shepp_logan_3d: {
            EllipsoidPhantom ph{shepp_logan_ellipsoids_3d(), {n, n, n, 1.0}};
            return rasterize<T>(ph);
        }
        case PhantomKind::piecewise_blocks: {
            Volume<T> vol(n, n, 1, 1.0);
            const int lo1 = n / 4, hi1 = (3 * n) / 4;
            const int lo2 = (3 * n) / 8, hi2 = (5 * n) / 8;
            for (int j = 0; j < n; ++j)
                for (int i = 0; i < n; ++i) {
                    T v = 0;
                    if (i >= lo1 && i < hi1 && j >= lo1 && j < hi1) v += T(0.5);
                    if (i >= lo2 && i < hi2 && j >= lo2 && j < hi2) v += T(0.5);
                    vol.at(i, j, 0) = v;
                }
            return vol;
        }
    }
    throw ParameterError("unknown phantom kind");
}

inline PhantomKind phantom_kind_from_string(const std::string& s) {
    if (s == "shepp_logan_3d") return PhantomKind::shepp_logan_3d;
    if (s == "shepp_logan_2d") return PhantomKind::shepp_logan_2d;
    if (s == "piecewise_blocks") return PhantomKind::piecewise_blocks;
    throw ParameterError("unknown phantom kind: " + s);
}

}  // namespace ctk
