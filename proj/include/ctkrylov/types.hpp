#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ctk {

// Error taxonomy used across the library. The CLI maps these onto exit codes.
struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ParameterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    NumericalError(const std::string& msg, int iteration)
        : std::runtime_error(msg), iteration(iteration) {}
    int iteration;
};

/// Shape metadata of a voxel grid, kept separate from the (possibly large) sample array
/// so operators can carry it around cheaply.
struct VolumeShape {
    int nx = 0, ny = 0, nz = 0;
    double spacing = 1.0;  // mm per voxel, isotropic

    std::size_t size() const { return std::size_t(nx) * ny * nz; }
    bool operator==(const VolumeShape&) const = default;
};

struct ProjShape {
    int n_angles = 0, nu = 0, nv = 0;

    std::size_t size() const { return std::size_t(n_angles) * nu * nv; }
    bool operator==(const ProjShape&) const = default;
};

/// 3D attenuation image (mm^-1). Sample order: x fastest, then y, then z.
template <typename T>
struct Volume {
    int nx = 0, ny = 0, nz = 0;
    double spacing = 1.0;
    std::vector<T> data;

    Volume() = default;
    Volume(int nx, int ny, int nz, double spacing)
        : nx(nx), ny(ny), nz(nz), spacing(spacing), data(std::size_t(nx) * ny * nz, T(0)) {
        validate();
    }
    Volume(VolumeShape s) : Volume(s.nx, s.ny, s.nz, s.spacing) {}

    VolumeShape shape() const { return {nx, ny, nz, spacing}; }
    std::size_t size() const { return data.size(); }
    T& at(int i, int j, int k) { return data[std::size_t(i) + std::size_t(nx) * (j + std::size_t(ny) * k)]; }
    const T& at(int i, int j, int k) const {
        return data[std::size_t(i) + std::size_t(nx) * (j + std::size_t(ny) * k)];
    }

    void validate() const {
        if (nx <= 0 || ny <= 0 || nz <= 0)
            throw DimensionError("volume dimensions must be positive");
        if (!(spacing > 0.0)) throw GeometryError("voxel spacing must be positive");
        if (data.size() != std::size_t(nx) * ny * nz)
            throw DimensionError("volume data length does not match nx*ny*nz");
    }
};

/// Stack of detector measurements (line integrals, mm^-1 * mm), one nu x nv frame per
/// angle. Sample order: u fastest, then v, then angle.
template <typename T>
struct ProjectionSet {
    int n_angles = 0, nu = 0, nv = 0;
    std::vector<double> angles;  // radians, strictly increasing in [0, 2*pi)
    std::vector<T> data;

    ProjectionSet() = default;
    ProjectionSet(std::vector<double> angles_, int nu, int nv)
        : n_angles(int(angles_.size())), nu(nu), nv(nv), angles(std::move(angles_)),
          data(std::size_t(n_angles) * nu * nv, T(0)) {
        validate();
    }

    ProjShape shape() const { return {n_angles, nu, nv}; }
    std::size_t size() const { return data.size(); }
    T& at(int a, int iu, int iv) {
        return data[std::size_t(iu) + std::size_t(nu) * (iv + std::size_t(nv) * a)];
    }
    const T& at(int a, int iu, int iv) const {
        return data[std::size_t(iu) + std::size_t(nu) * (iv + std::size_t(nv) * a)];
    }

    void validate() const {
        if (n_angles <= 0 || nu <= 0 || nv <= 0)
            throw DimensionError("projection dimensions must be positive");
        if (angles.size() != std::size_t(n_angles))
            throw DimensionError("angle list length does not match n_angles");
        if (data.size() != std::size_t(n_angles) * nu * nv)
            throw DimensionError("projection data length does not match n_angles*nu*nv");
        for (std::size_t i = 0; i < angles.size(); ++i) {
            if (!(angles[i] >= 0.0 && angles[i] < 2.0 * std::numbers::pi))
                throw GeometryError("angles must lie in [0, 2*pi)");
            if (i > 0 && !(angles[i] > angles[i - 1]))
                throw GeometryError("angles must be strictly increasing");
        }
    }
};

/// Per-voxel forward differences along the three axes.
template <typename T>
struct GradientField {
    VolumeShape shape;
    std::vector<T> dx, dy, dz;

    GradientField() = default;
    explicit GradientField(VolumeShape s)
        : shape(s), dx(s.size(), T(0)), dy(s.size(), T(0)), dz(s.size(), T(0)) {}

    void validate() const {
        if (dx.size() != shape.size() || dy.size() != dx.size() || dz.size() != dx.size())
            throw DimensionError("gradient component lengths do not match volume shape");
    }
};

// Small vector kernels. Accumulation happens in T on purpose: single-precision runs
// must show single-precision rounding behaviour.
template <typename T>
T dot(std::span<const T> a, std::span<const T> b) {
    T s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

template <typename T>
T nrm2(std::span<const T> a) {
    return std::sqrt(dot(a, a));
}

template <typename T>
void axpy(T alpha, std::span<const T> x, std::span<T> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

template <typename T>
void scal(T alpha, std::span<T> x) {
    for (auto& v : x) v *= alpha;
}

template <typename T>
std::span<const T> cspan(const std::vector<T>& v) {
    return {v.data(), v.size()};
}

template <typename T>
std::span<T> mspan(std::vector<T>& v) {
    return {v.data(), v.size()};
}

/// Reduce an arbitrary angle into [0, 2*pi). fmod is exact, so angles that enter as
/// theta + 2*pi*k with an exactly representable sum reduce back to theta bitwise.
inline double canonical_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(a, two_pi);
    if (r < 0.0) r += two_pi;
    return r;
}

}  // namespace ctk
