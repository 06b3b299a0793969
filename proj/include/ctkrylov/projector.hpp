#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ctkrylov/geometry.hpp"
#include "ctkrylov/types.hpp"

namespace ctk {

enum class BackprojectVariant { matched, voxel_driven };

namespace detail {

struct Vec3 {
    double x, y, z;
};

struct Ray {
    Vec3 origin;  // any point on the line (the source for cone beams)
    Vec3 dir;     // unit length
};

/// Ray through detector pixel (iu, iv) at view angle `theta`.
/// Detector u-axis is (-sin t, cos t, 0), v-axis is world z; the detector centre sits
/// at distance origin_to_detector from the origin, opposite the source.
inline Ray make_ray(const ConeGeometry& g, double theta, int iu, int iv) {
    const double ct = std::cos(theta), st = std::sin(theta);
    const double du = g.detector_pixel_size;
    const double u = (iu - 0.5 * (g.nu - 1)) * du;
    const double v = (iv - 0.5 * (g.nv - 1)) * du;
    const Vec3 center{-g.origin_to_detector * ct, -g.origin_to_detector * st, 0.0};
    const Vec3 pixel{center.x - u * st, center.y + u * ct, center.z + v};
    if (g.mode == BeamMode::cone3d) {
        const Vec3 src{g.source_to_origin * ct, g.source_to_origin * st, 0.0};
        Vec3 d{pixel.x - src.x, pixel.y - src.y, pixel.z - src.z};
        const double n = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
        return {src, {d.x / n, d.y / n, d.z / n}};
    }
    return {pixel, {-ct, -st, 0.0}};
}

// Slice-interpolated (Joseph) traversal plan for one ray: walk the volume one plane at
// a time along the ray's dominant axis and interpolate bilinearly inside each plane.
struct JosephWalk {
    int axis;          // 0 = x, 1 = y, 2 = z
    int n_slices;      // voxel count along the dominant axis
    double step;       // path length per slice, spacing / |dir_axis|
    double fb0, fb_d;  // fractional index along first in-plane axis: fb0 + s * fb_d
    double fc0, fc_d;  // fractional index along second in-plane axis
    int nb, nc;
    std::size_t stride_a, stride_b, stride_c;
};

inline JosephWalk plan_walk(const VolumeShape& vol, const Ray& ray) {
    const double ad[3] = {std::abs(ray.dir.x), std::abs(ray.dir.y), std::abs(ray.dir.z)};
    int axis = 0;
    if (ad[1] > ad[axis]) axis = 1;
    if (ad[2] > ad[axis]) axis = 2;

    const int n[3] = {vol.nx, vol.ny, vol.nz};
    const std::size_t strides[3] = {1, std::size_t(vol.nx), std::size_t(vol.nx) * vol.ny};
    const double o[3] = {ray.origin.x, ray.origin.y, ray.origin.z};
    const double d[3] = {ray.dir.x, ray.dir.y, ray.dir.z};
    const int b = (axis + 1) % 3, c = (axis + 2) % 3;
    const double h = vol.spacing;

    JosephWalk w;
    w.axis = axis;
    w.n_slices = n[axis];
    w.step = h / ad[axis];
    w.nb = n[b];
    w.nc = n[c];
    w.stride_a = strides[axis];
    w.stride_b = strides[b];
    w.stride_c = strides[c];
    // Parameter t of the plane through slice s: t(s) = (p_a(s) - o_a) / d_a, with
    // p_a(s) = (s - (n_a - 1)/2) * h. Fractional in-plane indices are affine in s.
    const double t0 = ((0 - 0.5 * (n[axis] - 1)) * h - o[axis]) / d[axis];
    const double dt = h / d[axis];
    w.fb0 = (o[b] + t0 * d[b]) / h + 0.5 * (n[b] - 1);
    w.fb_d = dt * d[b] / h;
    w.fc0 = (o[c] + t0 * d[c]) / h + 0.5 * (n[c] - 1);
    w.fc_d = dt * d[c] / h;
    return w;
}

/// Visit the (up to four) voxels the ray touches in slice s with bilinear weights.
/// fn(index, weight) is called in a fixed order.
template <typename Fn>
inline void for_slice_stencil(const JosephWalk& w, int s, Fn&& fn) {
    const double fb = w.fb0 + s * w.fb_d;
    const double fc = w.fc0 + s * w.fc_d;
    const int ib = int(std::floor(fb));
    const int ic = int(std::floor(fc));
    const double tb = fb - ib, tc = fc - ic;
    const std::size_t base_a = w.stride_a * std::size_t(s);
    const double wgt[4] = {(1 - tb) * (1 - tc), tb * (1 - tc), (1 - tb) * tc, tb * tc};
    const int ob[4] = {0, 1, 0, 1};
    const int oc[4] = {0, 0, 1, 1};
    for (int q = 0; q < 4; ++q) {
        const int jb = ib + ob[q], jc = ic + oc[q];
        if (jb < 0 || jb >= w.nb || jc < 0 || jc >= w.nc || wgt[q] == 0.0) continue;
        fn(base_a + w.stride_b * std::size_t(jb) + w.stride_c * std::size_t(jc), wgt[q]);
    }
}

template <typename T>
T integrate_ray(const JosephWalk& w, const T* vol) {
    T acc = 0;
    for (int s = 0; s < w.n_slices; ++s) {
        T sample = 0;
        for_slice_stencil(w, s, [&](std::size_t idx, double wgt) { sample += T(wgt) * vol[idx]; });
        acc += sample;
    }
    return T(w.step) * acc;
}

template <typename T>
void scatter_ray(const JosephWalk& w, T value, T* vol) {
    const T scaled = T(w.step) * value;
    for (int s = 0; s < w.n_slices; ++s) {
        for_slice_stencil(w, s, [&](std::size_t idx, double wgt) { vol[idx] += T(wgt) * scaled; });
    }
}

}  // namespace detail

/// Ray integral of `vol` along every source-to-pixel ray of `geom`.
template <typename T>
ProjectionSet<T> forward_project(const Volume<T>& vol, const ConeGeometry& geom) {
    geom.validate();
    vol.validate();
    if (vol.shape() != geom.vol)
        throw DimensionError("volume shape does not match geometry descriptor");

    std::vector<double> canon(geom.angles.size());
    for (std::size_t i = 0; i < canon.size(); ++i) canon[i] = canonical_angle(geom.angles[i]);
    ProjectionSet<T> proj(std::move(canon), geom.nu, geom.nv);
    const int n_angles = proj.n_angles;
    const T* vdata = vol.data.data();
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int a = 0; a < n_angles; ++a) {
        const double theta = canonical_angle(geom.angles[std::size_t(a)]);
        T* frame = &proj.data[std::size_t(a) * geom.nu * geom.nv];
        for (int iv = 0; iv < geom.nv; ++iv) {
            for (int iu = 0; iu < geom.nu; ++iu) {
                const auto walk = detail::plan_walk(geom.vol, detail::make_ray(geom, theta, iu, iv));
                frame[std::size_t(iu) + std::size_t(geom.nu) * iv] =
                    detail::integrate_ray(walk, vdata);
            }
        }
    }
    return proj;
}

namespace detail {

// Exact transpose of forward_project: scatter each measurement back through the same
// interpolation stencils. Angles are dealt round-robin to threads and the per-thread
// partial volumes are summed in thread order, so results are reproducible for a fixed
// thread count.
template <typename T>
void back_project_matched(const ProjectionSet<T>& proj, const ConeGeometry& g, Volume<T>& out) {
    int nthreads = 1;
#ifdef _OPENMP
    nthreads = std::max(1, std::min(omp_get_max_threads(), proj.n_angles));
#endif
    std::vector<std::vector<T>> partial(nthreads, std::vector<T>(out.size(), T(0)));
#ifdef _OPENMP
#pragma omp parallel num_threads(nthreads)
#endif
    {
#ifdef _OPENMP
        const int t = omp_get_thread_num();
#else
        const int t = 0;
#endif
        T* acc = partial[std::size_t(t)].data();
        for (int a = t; a < proj.n_angles; a += nthreads) {
            const double theta = canonical_angle(proj.angles[std::size_t(a)]);
            const T* frame = &proj.data[std::size_t(a) * g.nu * g.nv];
            for (int iv = 0; iv < g.nv; ++iv) {
                for (int iu = 0; iu < g.nu; ++iu) {
                    const T value = frame[std::size_t(iu) + std::size_t(g.nu) * iv];
                    if (value == T(0)) continue;
                    const auto walk = plan_walk(g.vol, make_ray(g, theta, iu, iv));
                    scatter_ray(walk, value, acc);
                }
            }
        }
    }
    for (int t = 0; t < nthreads; ++t)
        axpy(T(1), cspan(partial[std::size_t(t)]), mspan(out.data));
}

// Interpolating voxel-driven backprojection: project each voxel centre onto the
// detector and gather a bilinear sample. Deliberately not the transpose of the
// forward model (detector-side instead of volume-side interpolation), mimicking the
// approximate adjoints common in GPU toolkits.
template <typename T>
void back_project_voxel_driven(const ProjectionSet<T>& proj, const ConeGeometry& g,
                               Volume<T>& out) {
    struct View {
        double ct, st, step_scale;
    };
    std::vector<View> views(std::size_t(proj.n_angles));
    for (int a = 0; a < proj.n_angles; ++a) {
        const double theta = canonical_angle(proj.angles[std::size_t(a)]);
        views[std::size_t(a)] = {std::cos(theta), std::sin(theta), 0.0};
        if (g.mode != BeamMode::cone3d) {
            const double m = std::max(std::abs(views[std::size_t(a)].ct),
                                      std::abs(views[std::size_t(a)].st));
            views[std::size_t(a)].step_scale = g.vol.spacing / m;
        }
    }
    const double du = g.detector_pixel_size;
    const int nz = g.vol.nz;

#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int k = 0; k < nz; ++k) {
        const double z = (k - 0.5 * (g.vol.nz - 1)) * g.vol.spacing;
        for (int j = 0; j < g.vol.ny; ++j) {
            const double y = (j - 0.5 * (g.vol.ny - 1)) * g.vol.spacing;
            for (int i = 0; i < g.vol.nx; ++i) {
                const double x = (i - 0.5 * (g.vol.nx - 1)) * g.vol.spacing;
                T acc = 0;
                for (int a = 0; a < proj.n_angles; ++a) {
                    const View& vw = views[std::size_t(a)];
                    double u, v, scale;
                    if (g.mode == BeamMode::cone3d) {
                        // Perspective projection of the voxel centre onto the plane
                        // through the detector centre.
                        const double sx = g.source_to_origin * vw.ct;
                        const double sy = g.source_to_origin * vw.st;
                        const double rx = x - sx, ry = y - sy, rz = z;
                        const double depth = -(rx * vw.ct + ry * vw.st);  // along -n
                        if (depth <= 0.0) continue;
                        const double t = (g.source_to_origin + g.origin_to_detector) / depth;
                        const double px = sx + t * rx, py = sy + t * ry, pz = t * rz;
                        u = -px * vw.st + py * vw.ct;
                        v = pz;
                        const double rn = std::sqrt(rx * rx + ry * ry + rz * rz);
                        const double dom = std::max(std::abs(rx), std::max(std::abs(ry), std::abs(rz)));
                        scale = g.vol.spacing * rn / dom;  // path length per slice along the ray
                    } else {
                        u = -x * vw.st + y * vw.ct;
                        v = z;
                        scale = vw.step_scale;
                    }
                    const double fu = u / du + 0.5 * (g.nu - 1);
                    const double fv = (g.nv == 1) ? 0.0 : v / du + 0.5 * (g.nv - 1);
                    const int iu = int(std::floor(fu)), iv = int(std::floor(fv));
                    const double tu = fu - iu, tv = fv - iv;
                    const T* frame = &proj.data[std::size_t(a) * g.nu * g.nv];
                    double sample = 0.0;
                    const double wq[4] = {(1 - tu) * (1 - tv), tu * (1 - tv), (1 - tu) * tv, tu * tv};
                    const int ou[4] = {0, 1, 0, 1}, ov[4] = {0, 0, 1, 1};
                    for (int q = 0; q < 4; ++q) {
                        const int ju = iu + ou[q], jv = iv + ov[q];
                        if (ju < 0 || ju >= g.nu || jv < 0 || jv >= g.nv) continue;
                        sample += wq[q] * double(frame[std::size_t(ju) + std::size_t(g.nu) * jv]);
                    }
                    acc += T(scale * sample);
                }
                out.at(i, j, k) = acc;
            }
        }
    }
}

}  // namespace detail

template <typename T>
Volume<T> back_project(const ProjectionSet<T>& proj, const ConeGeometry& geom,
                       BackprojectVariant variant) {
    geom.validate();
    proj.validate();
    if (proj.shape() != geom.proj_shape())
        throw DimensionError("projection shape does not match geometry descriptor");

    Volume<T> out(geom.vol);
    if (variant == BackprojectVariant::matched)
        detail::back_project_matched(proj, geom, out);
    else
        detail::back_project_voxel_driven(proj, geom, out);
    return out;
}

}  // namespace ctk
