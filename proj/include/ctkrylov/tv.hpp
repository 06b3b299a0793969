#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ctkrylov/gradient.hpp"
#include "ctkrylov/hybrid.hpp"
#include "ctkrylov/solve_log.hpp"
#include "ctkrylov/solvers.hpp"

namespace ctk {

namespace detail {

/// Smoothing width for the reweighted TV term: eps = 1e-4 * max|x|, with unit weights
/// signalled by a zero return when the image is still identically zero.
template <typename T>
double tv_epsilon(std::span<const T> x) {
    double m = 0.0;
    for (T v : x) m = std::max(m, std::abs(double(v)));
    return 1e-4 * m;
}

}  // namespace detail

/// IRN weights for the reweighted TV norm: one weight per voxel (gradient-magnitude
/// group), w_i = (|[Dx]_i|^2 + eps^2)^(-1/4), so that ||diag(w) D x||_2^2
/// approximates TV(x). For an identically zero image the weights are all one.
template <typename T>
std::vector<T> tv_weights(const Volume<T>& x) {
    const double eps = detail::tv_epsilon(cspan(x.data));
    std::vector<T> w(x.size(), T(1));
    if (eps == 0.0) return w;
    const GradientField<T> g = gradient(x);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double m2 = double(g.dx[i]) * g.dx[i] + double(g.dy[i]) * g.dy[i] +
                          double(g.dz[i]) * g.dz[i];
        w[i] = T(std::pow(m2 + eps * eps, -0.25));
    }
    return w;
}

/// TV-regularized CGLS via iteratively reweighted norms: each outer cycle freezes the
/// weights from the current image and runs inner CGLS iterations on the stacked
/// operator [A; lambda diag(w) D]. Inner cycles restart cold (from zero) unless
/// warm_start is set. Logged explicit residuals refer to the original system.
template <typename T>
SolveResult<T> cgls_tv(const OperatorPair<T>& pair, std::span<const T> b, double lambda,
                       int outer_iters, int inner_iters, const SolverOptions<T>& opts,
                       bool warm_start = false) {
    opts.validate();
    pair.check_range(b.size());
    if (!(lambda > 0.0)) throw ParameterError("cgls_tv: lambda must be positive");
    if (outer_iters < 1 || inner_iters < 1)
        throw ParameterError("cgls_tv: outer and inner iteration counts must be >= 1");
    detail::IterationMonitor<T> mon(pair, b, opts, "cgls_tv");

    std::vector<T> x(pair.domain_size, T(0));
    std::vector<int> outer_starts;
    int k = 0;
    bool stopped = false;
    for (int outer = 0; outer < outer_iters && !stopped; ++outer) {
        Volume<T> current(pair.domain_shape);
        current.data = x;
        const OperatorPair<T> stacked =
            stack_weighted_gradient(pair, lambda, tv_weights(current));
        std::vector<T> rhs(stacked.range_size, T(0));
        std::copy(b.begin(), b.end(), rhs.begin());
        const double rhs_norm = double(nrm2(cspan(rhs)));

        outer_starts.push_back(k);
        mon.reset_increase_baseline();
        if (!warm_start) std::fill(x.begin(), x.end(), T(0));

        // Plain CGLS recurrence on the stacked system, logging against the original.
        std::vector<T> r = rhs;
        if (warm_start) {
            std::vector<T> kx = stacked.apply_forward(cspan(x));
            axpy(T(-1), cspan(kx), mspan(r));
        }
        std::vector<T> s = stacked.apply_back(cspan(r));
        std::vector<T> p = s;
        T gamma = dot(cspan(s), cspan(s));
        for (int inner = 0; inner < inner_iters; ++inner) {
            if (!(gamma > T(0))) break;
            std::vector<T> q = stacked.apply_forward(cspan(p));
            const T delta = dot(cspan(q), cspan(q));
            if (!(delta > T(0))) break;
            const T alpha = gamma / delta;
            axpy(alpha, cspan(p), mspan(x));
            axpy(-alpha, cspan(q), mspan(r));
            ++k;
            const double implicit = double(nrm2(cspan(r))) / rhs_norm;
            if (mon.record(k, cspan(x), implicit, lambda)) {
                stopped = true;
                break;
            }
            s = stacked.apply_back(cspan(r));
            const T gamma_new = dot(cspan(s), cspan(s));
            const T beta = gamma_new / gamma;
            gamma = gamma_new;
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = s[i] + beta * p[i];
        }
    }
    SolveResult<T> res = detail::finish(mon, std::move(x), pair, k);
    res.outer_starts = std::move(outer_starts);
    return res;
}

/// Preconditioner factory implementing the TV priorconditioner: an inner CG solve of
/// (D^T diag(w^2) D + tau^2 I) z = v, i.e. the regularized normal equations of the
/// weighted gradient stacked with tau I to make it injective (tau = 1e-3 * lambda).
template <typename T>
PrecondFactory<T> tv_precond_factory(VolumeShape shape, double initial_lambda,
                                     int max_inner = 50, double inner_tol = 1e-6) {
    return [shape, initial_lambda, max_inner, inner_tol](
               int iteration, std::span<const T> x,
               std::vector<std::string>& warnings) {
        Volume<T> current(shape);
        std::copy(x.begin(), x.end(), current.data.begin());
        auto w = std::make_shared<std::vector<T>>(tv_weights(current));
        for (T& wi : *w) wi = wi * wi;  // CG operator needs diag(w)^2
        const double tau = 1e-3 * initial_lambda;
        const T tau2 = T(tau * tau);

        return [shape, w, tau2, max_inner, inner_tol, iteration, &warnings](
                   std::span<const T> v, std::span<T> z) {
            auto apply = [&](std::span<const T> in, std::span<T> out) {
                Volume<T> vol(shape);
                std::copy(in.begin(), in.end(), vol.data.begin());
                GradientField<T> g = gradient(vol);
                for (std::size_t i = 0; i < in.size(); ++i) {
                    g.dx[i] *= (*w)[i];
                    g.dy[i] *= (*w)[i];
                    g.dz[i] *= (*w)[i];
                }
                Volume<T> adj = gradient_adjoint(g);
                for (std::size_t i = 0; i < in.size(); ++i) out[i] = adj.data[i] + tau2 * in[i];
            };
            // Conjugate gradient from zero on the SPD system.
            const std::size_t n = v.size();
            std::fill(z.begin(), z.end(), T(0));
            std::vector<T> r(v.begin(), v.end());
            std::vector<T> p = r;
            std::vector<T> ap(n);
            T rr = dot(cspan(r), cspan(r));
            const T target = T(inner_tol) * std::sqrt(rr);
            bool converged = !(std::sqrt(rr) > T(0));
            for (int it = 0; it < max_inner && !converged; ++it) {
                apply(cspan(p), mspan(ap));
                const T pap = dot(cspan(p), std::span<const T>(cspan(ap)));
                if (!(pap > T(0))) break;
                const T alpha = rr / pap;
                axpy(alpha, cspan(p), z);
                axpy(-alpha, cspan(ap), mspan(r));
                const T rr_new = dot(cspan(r), cspan(r));
                if (std::sqrt(rr_new) <= target) {
                    converged = true;
                    break;
                }
                const T beta = rr_new / rr;
                rr = rr_new;
                for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
            }
            if (!converged)
                warnings.push_back("tv preconditioner: inner CG not converged at iteration " +
                                   std::to_string(iteration));
        };
    };
}

/// Flexible hybrid LSQR with TV priorconditioning: the reweighted-TV preconditioner
/// is refreshed from the current iterate every iteration and folded into the search
/// space, with lambda fixed or chosen by GCV on the projected problem.
template <typename T>
SolveResult<T> flsqr_tv(const OperatorPair<T>& pair, std::span<const T> b,
                        const HybridStrategy& strategy, const SolverOptions<T>& opts) {
    const double lambda0 =
        strategy.kind == LambdaStrategy::fixed && strategy.lambda > 0.0 ? strategy.lambda : 1.0;
    return flexible_hybrid_lsqr(pair, b, strategy,
                                tv_precond_factory<T>(pair.domain_shape, lambda0), opts,
                                "flsqr_tv");
}

}  // namespace ctk
