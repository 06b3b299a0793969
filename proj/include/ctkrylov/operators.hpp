#pragma once

#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "ctkrylov/gradient.hpp"
#include "ctkrylov/projector.hpp"
#include "ctkrylov/types.hpp"

namespace ctk {

/// Matrix-free forward/backprojector pair. `forward` maps a domain vector (voxels) to
/// a range vector (measurements), `back` maps the other way. `matched` asserts that
/// `back` is the exact transpose of `forward`.
template <typename T>
struct OperatorPair {
    std::size_t domain_size = 0;
    std::size_t range_size = 0;
    bool matched = false;
    VolumeShape domain_shape;  // how to reinterpret domain vectors as a Volume
    std::function<void(std::span<const T>, std::span<T>)> forward;
    std::function<void(std::span<const T>, std::span<T>)> back;

    std::vector<T> apply_forward(std::span<const T> x) const {
        check_domain(x.size());
        std::vector<T> y(range_size, T(0));
        forward(x, mspan(y));
        return y;
    }
    std::vector<T> apply_back(std::span<const T> y) const {
        check_range(y.size());
        std::vector<T> x(domain_size, T(0));
        back(y, mspan(x));
        return x;
    }
    void check_domain(std::size_t n) const {
        if (n != domain_size) throw DimensionError("operator domain size mismatch");
    }
    void check_range(std::size_t n) const {
        if (n != range_size) throw DimensionError("operator range size mismatch");
    }
};

/// Row-major dense matrix just big enough for oracle harnesses.
template <typename T>
struct DenseMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<T> a;  // rows*cols, row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, T(0)) {}
    T& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

/// Wrap a dense matrix as an exactly matched pair (back = transpose multiply).
template <typename T>
OperatorPair<T> dense_pair(DenseMatrix<T> m) {
    for (const T& v : m.a)
        if (!std::isfinite(double(v))) throw ParameterError("dense matrix entries must be finite");
    auto mat = std::make_shared<DenseMatrix<T>>(std::move(m));
    OperatorPair<T> p;
    p.domain_size = mat->cols;
    p.range_size = mat->rows;
    p.matched = true;
    p.domain_shape = {int(mat->cols), 1, 1, 1.0};
    p.forward = [mat](std::span<const T> x, std::span<T> y) {
        for (std::size_t i = 0; i < mat->rows; ++i) {
            T s = 0;
            const T* row = &mat->a[i * mat->cols];
            for (std::size_t j = 0; j < mat->cols; ++j) s += row[j] * x[j];
            y[i] = s;
        }
    };
    p.back = [mat](std::span<const T> y, std::span<T> x) {
        for (std::size_t j = 0; j < mat->cols; ++j) x[j] = T(0);
        for (std::size_t i = 0; i < mat->rows; ++i) {
            const T* row = &mat->a[i * mat->cols];
            const T yi = y[i];
            for (std::size_t j = 0; j < mat->cols; ++j) x[j] += row[j] * yi;
        }
    };
    return p;
}

/// Ray-driven projector pair for a geometry. The matched variant passes the adjoint
/// identity to rounding error; voxel_driven is a deliberately approximate transpose.
template <typename T>
OperatorPair<T> projector_pair(const ConeGeometry& geom,
                               BackprojectVariant variant = BackprojectVariant::matched) {
    geom.validate();
    auto g = std::make_shared<ConeGeometry>(geom);
    for (double& a : g->angles) a = canonical_angle(a);
    OperatorPair<T> p;
    p.domain_size = g->vol.size();
    p.range_size = g->proj_shape().size();
    p.matched = (variant == BackprojectVariant::matched);
    p.domain_shape = g->vol;
    p.forward = [g](std::span<const T> x, std::span<T> y) {
        Volume<T> vol(g->vol);
        std::copy(x.begin(), x.end(), vol.data.begin());
        ProjectionSet<T> proj = forward_project(vol, *g);
        std::copy(proj.data.begin(), proj.data.end(), y.begin());
    };
    p.back = [g, variant](std::span<const T> y, std::span<T> x) {
        ProjectionSet<T> proj(g->angles, g->nu, g->nv);
        std::copy(y.begin(), y.end(), proj.data.begin());
        Volume<T> vol = back_project(proj, *g, variant);
        std::copy(vol.data.begin(), vol.data.end(), x.begin());
    };
    return p;
}

/// Tikhonov-augmented pair: forward x -> [A x; lambda x], back [y1; y2] -> B y1 + lambda y2.
template <typename T>
OperatorPair<T> augment_tikhonov(const OperatorPair<T>& pair, double lambda) {
    if (lambda < 0.0) throw ParameterError("tikhonov lambda must be nonnegative");
    OperatorPair<T> p;
    p.domain_size = pair.domain_size;
    p.range_size = pair.range_size + pair.domain_size;
    p.matched = pair.matched;
    p.domain_shape = pair.domain_shape;
    const T lam = T(lambda);
    const std::size_t nr = pair.range_size;
    auto fwd = pair.forward;
    auto bck = pair.back;
    p.forward = [fwd, lam, nr](std::span<const T> x, std::span<T> y) {
        fwd(x, y.subspan(0, nr));
        for (std::size_t j = 0; j < x.size(); ++j) y[nr + j] = lam * x[j];
    };
    p.back = [bck, lam, nr](std::span<const T> y, std::span<T> x) {
        bck(y.subspan(0, nr), x);
        for (std::size_t j = 0; j < x.size(); ++j) x[j] += lam * y[nr + j];
    };
    return p;
}

/// Weighted-gradient stack [A; lambda W D] used by the reweighted TV scheme. The range
/// is the measurement vector followed by the three flattened gradient components, each
/// scaled per voxel by `weights` (one weight per gradient-magnitude group).
template <typename T>
OperatorPair<T> stack_weighted_gradient(const OperatorPair<T>& pair, double lambda,
                                        std::vector<T> weights) {
    if (weights.size() != pair.domain_size)
        throw DimensionError("weight vector must have one entry per voxel");
    OperatorPair<T> p;
    p.domain_size = pair.domain_size;
    p.range_size = pair.range_size + 3 * pair.domain_size;
    p.matched = pair.matched;
    p.domain_shape = pair.domain_shape;
    const T lam = T(lambda);
    const std::size_t nr = pair.range_size;
    const std::size_t nv = pair.domain_size;
    auto w = std::make_shared<std::vector<T>>(std::move(weights));
    const VolumeShape vshape = pair.domain_shape;
    auto fwd = pair.forward;
    auto bck = pair.back;
    p.forward = [fwd, lam, nr, nv, w, vshape](std::span<const T> x, std::span<T> y) {
        fwd(x, y.subspan(0, nr));
        Volume<T> vol(vshape);
        std::copy(x.begin(), x.end(), vol.data.begin());
        GradientField<T> g = gradient(vol);
        for (std::size_t i = 0; i < nv; ++i) {
            const T s = lam * (*w)[i];
            y[nr + i] = s * g.dx[i];
            y[nr + nv + i] = s * g.dy[i];
            y[nr + 2 * nv + i] = s * g.dz[i];
        }
    };
    p.back = [bck, lam, nr, nv, w, vshape](std::span<const T> y, std::span<T> x) {
        bck(y.subspan(0, nr), x);
        GradientField<T> g(vshape);
        for (std::size_t i = 0; i < nv; ++i) {
            const T s = lam * (*w)[i];
            g.dx[i] = s * y[nr + i];
            g.dy[i] = s * y[nr + nv + i];
            g.dz[i] = s * y[nr + 2 * nv + i];
        }
        Volume<T> adj = gradient_adjoint(g);
        for (std::size_t i = 0; i < nv; ++i) x[i] += adj.data[i];
    };
    return p;
}

}  // namespace ctk
