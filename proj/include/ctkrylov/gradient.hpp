#pragma once

#include <cmath>

#include "ctkrylov/types.hpp"

namespace ctk {

/// Forward differences along x, y, z with a zero far boundary: the value outside the
/// grid is taken equal to the boundary voxel, so the last difference along each axis
/// is 0. Differences are plain value differences (not divided by spacing).
template <typename T>
GradientField<T> gradient(const Volume<T>& vol) {
    vol.validate();
    GradientField<T> g(vol.shape());
    const int nx = vol.nx, ny = vol.ny, nz = vol.nz;
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const std::size_t idx = std::size_t(i) + std::size_t(nx) * (j + std::size_t(ny) * k);
                const T v = vol.data[idx];
                g.dx[idx] = (i + 1 < nx) ? vol.at(i + 1, j, k) - v : T(0);
                g.dy[idx] = (j + 1 < ny) ? vol.at(i, j + 1, k) - v : T(0);
                g.dz[idx] = (k + 1 < nz) ? vol.at(i, j, k + 1) - v : T(0);
            }
    return g;
}

/// Exact transpose of gradient() under the same boundary convention (a negative
/// divergence with one-sided ends).
template <typename T>
Volume<T> gradient_adjoint(const GradientField<T>& g) {
    g.validate();
    Volume<T> out(g.shape);
    const int nx = g.shape.nx, ny = g.shape.ny, nz = g.shape.nz;
    auto idx = [&](int i, int j, int k) {
        return std::size_t(i) + std::size_t(nx) * (j + std::size_t(ny) * k);
    };
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                T acc = 0;
                // D^T row for voxel (i,j,k): +1 from the difference starting at the
                // previous voxel, -1 from the one starting here (absent on the far edge).
                if (i > 0) acc += g.dx[idx(i - 1, j, k)];
                if (i + 1 < nx) acc -= g.dx[idx(i, j, k)];
                if (j > 0) acc += g.dy[idx(i, j - 1, k)];
                if (j + 1 < ny) acc -= g.dy[idx(i, j, k)];
                if (k > 0) acc += g.dz[idx(i, j, k - 1)];
                if (k + 1 < nz) acc -= g.dz[idx(i, j, k)];
                out.data[idx(i, j, k)] = acc;
            }
    return out;
}

/// Discrete isotropic total variation: sum over voxels of the Euclidean norm of the
/// local forward-difference vector.
template <typename T>
double evaluate_tv(const Volume<T>& vol) {
    const GradientField<T> g = gradient(vol);
    double tv = 0.0;
    for (std::size_t i = 0; i < g.dx.size(); ++i) {
        const double a = g.dx[i], b = g.dy[i], c = g.dz[i];
        tv += std::sqrt(a * a + b * b + c * c);
    }
    return tv;
}

}  // namespace ctk
