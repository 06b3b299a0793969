#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ctkrylov/krylov.hpp"
#include "ctkrylov/solve_log.hpp"

namespace ctk {

/// Conjugate gradient on the normal equations A^T A x = A^T b. The recurrence
/// residual norm is logged as the implicit residual.
template <typename T>
SolveResult<T> cgls(const OperatorPair<T>& pair, std::span<const T> b,
                    const SolverOptions<T>& opts) {
    opts.validate();
    pair.check_range(b.size());
    detail::IterationMonitor<T> mon(pair, b, opts, "cgls");
    const double bnorm = mon.bnorm();

    std::vector<T> x(pair.domain_size, T(0));
    std::vector<T> r(b.begin(), b.end());
    std::vector<T> s = pair.apply_back(cspan(r));
    std::vector<T> p = s;
    T gamma = dot(cspan(s), cspan(s));

    int k = 0;
    while (k < opts.max_iters) {
        ++k;
        if (!(gamma > T(0))) {
            mon.set_reason(StopReason::breakdown);
            --k;
            break;
        }
        std::vector<T> q = pair.apply_forward(cspan(p));
        const T delta = dot(cspan(q), cspan(q));
        if (!std::isfinite(double(delta)))
            throw NumericalError("cgls: non-finite curvature at iteration " + std::to_string(k), k);
        if (!(delta > T(0))) {
            mon.set_reason(StopReason::breakdown);
            --k;
            break;
        }
        const T alpha = gamma / delta;
        axpy(alpha, cspan(p), mspan(x));
        axpy(-alpha, cspan(q), mspan(r));

        const double implicit = double(nrm2(cspan(r))) / bnorm;
        if (mon.record(k, cspan(x), implicit)) break;

        s = pair.apply_back(cspan(r));
        const T gamma_new = dot(cspan(s), cspan(s));
        const T beta = gamma_new / gamma;
        gamma = gamma_new;
        for (std::size_t i = 0; i < p.size(); ++i) p[i] = s[i] + beta * p[i];
    }
    return detail::finish(mon, std::move(x), pair, k);
}

/// LSQR with the original short recurrences (Golub-Kahan based). The recurrence
/// estimate of ||b - A x_k|| is logged as the implicit residual.
template <typename T>
SolveResult<T> lsqr(const OperatorPair<T>& pair, std::span<const T> b,
                    const SolverOptions<T>& opts) {
    opts.validate();
    pair.check_range(b.size());
    detail::IterationMonitor<T> mon(pair, b, opts, "lsqr");
    const T beta1 = nrm2(b);
    const T tol = T(breakdown_factor<T>()) * beta1;

    std::vector<T> u(b.begin(), b.end());
    scal(T(1) / beta1, mspan(u));
    std::vector<T> v = pair.apply_back(cspan(u));
    T alpha = nrm2(cspan(v));
    if (!(alpha > T(0))) throw DegenerateInputError("lsqr: A^T b vanished");
    scal(T(1) / alpha, mspan(v));

    std::vector<T> w = v;
    std::vector<T> x(pair.domain_size, T(0));
    T phibar = beta1, rhobar = alpha;

    int k = 0;
    while (k < opts.max_iters) {
        ++k;
        // Next bidiagonalization column.
        std::vector<T> unew = pair.apply_forward(cspan(v));
        axpy(-alpha, cspan(u), mspan(unew));
        const T beta = nrm2(cspan(unew));
        bool down = beta <= tol;
        if (beta > T(0)) {
            scal(T(1) / beta, mspan(unew));
            u = std::move(unew);
            std::vector<T> vnew = pair.apply_back(cspan(u));
            axpy(-beta, cspan(v), mspan(vnew));
            alpha = nrm2(cspan(vnew));
            if (alpha > T(0)) {
                scal(T(1) / alpha, mspan(vnew));
                v = std::move(vnew);
            }
            down = down || alpha <= tol;
        } else {
            alpha = T(0);
        }

        const T rho = std::sqrt(rhobar * rhobar + beta * beta);
        const T c = rhobar / rho;
        const T s = beta / rho;
        const T theta = s * alpha;
        rhobar = -c * alpha;
        const T phi = c * phibar;
        phibar = s * phibar;

        axpy(phi / rho, cspan(w), mspan(x));
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = v[i] - (theta / rho) * w[i];

        const double implicit = double(phibar) / double(beta1);
        if (mon.record(k, cspan(x), implicit)) break;
        if (down) {
            mon.set_reason(StopReason::breakdown);
            break;
        }
    }
    return detail::finish(mon, std::move(x), pair, k);
}

/// LSMR: minimizes ||A^T r_k|| over the same Krylov subspace as LSQR; lambda > 0
/// solves the Tikhonov-augmented problem with the damped recurrences. The recurrence
/// estimate of the (augmented) residual norm is logged as the implicit residual.
template <typename T>
SolveResult<T> lsmr(const OperatorPair<T>& pair, std::span<const T> b, double lambda,
                    const SolverOptions<T>& opts) {
    opts.validate();
    pair.check_range(b.size());
    if (lambda < 0.0) throw ParameterError("lsmr: lambda must be nonnegative");
    detail::IterationMonitor<T> mon(pair, b, opts, "lsmr");
    const T damp = T(lambda);
    const T beta1 = nrm2(b);
    const T tol = T(breakdown_factor<T>()) * beta1;

    std::vector<T> u(b.begin(), b.end());
    scal(T(1) / beta1, mspan(u));
    std::vector<T> v = pair.apply_back(cspan(u));
    T alpha = nrm2(cspan(v));
    if (!(alpha > T(0))) throw DegenerateInputError("lsmr: A^T b vanished");
    scal(T(1) / alpha, mspan(v));

    T zetabar = alpha * beta1, alphabar = alpha;
    T rho = 1, rhobar = 1, cbar = 1, sbar = 0;
    std::vector<T> h = v;
    std::vector<T> hbar(pair.domain_size, T(0));
    std::vector<T> x(pair.domain_size, T(0));
    // State of the residual-norm recurrences.
    T betadd = beta1, betad = 0, rhodold = 1, tautildeold = 0, thetatilde = 0, zeta = 0, dsq = 0;

    int k = 0;
    while (k < opts.max_iters) {
        ++k;
        std::vector<T> unew = pair.apply_forward(cspan(v));
        axpy(-alpha, cspan(u), mspan(unew));
        T beta = nrm2(cspan(unew));
        bool down = beta <= tol;
        if (beta > T(0)) {
            scal(T(1) / beta, mspan(unew));
            u = std::move(unew);
            std::vector<T> vnew = pair.apply_back(cspan(u));
            axpy(-beta, cspan(v), mspan(vnew));
            alpha = nrm2(cspan(vnew));
            if (alpha > T(0)) {
                scal(T(1) / alpha, mspan(vnew));
                v = std::move(vnew);
            }
            down = down || alpha <= tol;
        } else {
            alpha = T(0);
        }

        // Eliminate the damping, then the subdiagonal, then the extra bidiagonal band.
        const T alphahat = std::sqrt(alphabar * alphabar + damp * damp);
        const T chat = alphabar / alphahat;
        const T shat = damp / alphahat;

        const T rhoold = rho;
        rho = std::sqrt(alphahat * alphahat + beta * beta);
        const T c = alphahat / rho;
        const T s = beta / rho;
        const T thetanew = s * alpha;
        alphabar = c * alpha;

        const T rhobarold = rhobar;
        const T zetaold = zeta;
        const T thetabar = sbar * rho;
        const T rhotemp = cbar * rho;
        rhobar = std::sqrt(rhotemp * rhotemp + thetanew * thetanew);
        cbar = rhotemp / rhobar;
        sbar = thetanew / rhobar;
        zeta = cbar * zetabar;
        zetabar = -sbar * zetabar;

        for (std::size_t i = 0; i < hbar.size(); ++i)
            hbar[i] = h[i] - (thetabar * rho / (rhoold * rhobarold)) * hbar[i];
        axpy(zeta / (rho * rhobar), cspan(hbar), mspan(x));
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = v[i] - (thetanew / rho) * h[i];

        // Residual-norm estimate (augmented system when damp > 0).
        const T betaacute = chat * betadd;
        const T betacheck = -shat * betadd;
        const T betahat = c * betaacute;
        betadd = -s * betaacute;
        const T thetatildeold = thetatilde;
        const T rhotildeold = std::sqrt(rhodold * rhodold + thetabar * thetabar);
        const T ctildeold = rhodold / rhotildeold;
        const T stildeold = thetabar / rhotildeold;
        thetatilde = stildeold * rhobar;
        rhodold = ctildeold * rhobar;
        betad = -stildeold * betad + ctildeold * betahat;
        tautildeold = (zetaold - thetatildeold * tautildeold) / rhotildeold;
        const T taud = (zeta - thetatilde * tautildeold) / rhodold;
        dsq += betacheck * betacheck;
        const T normr = std::sqrt(dsq + (betad - taud) * (betad - taud) + betadd * betadd);

        const double implicit = double(normr) / double(beta1);
        if (mon.record(k, cspan(x), implicit, lambda)) break;
        if (down) {
            mon.set_reason(StopReason::breakdown);
            break;
        }
    }
    return detail::finish(mon, std::move(x), pair, k);
}

/// SIRT (scaled Landweber): x <- x + C B (R (b - A x)) with diagonal inverse row and
/// column weights estimated by applying the pair to all-ones vectors. Entries below
/// 1e-6 of the maximum are clamped before inversion. No nonnegativity projection.
template <typename T>
SolveResult<T> sirt(const OperatorPair<T>& pair, std::span<const T> b,
                    const SolverOptions<T>& opts) {
    opts.validate();
    pair.check_range(b.size());
    if (!(double(nrm2(b)) > 0.0)) {
        // Zero data: x = 0 is already the fixed point.
        SolveResult<T> res;
        res.x.assign(pair.domain_size, T(0));
        res.shape = pair.domain_shape;
        res.stop_reason = StopReason::tolerance;
        res.log.solver = "sirt";
        res.log.precision = sizeof(T) == sizeof(double) ? "double" : "single";
        res.log.matched = pair.matched;
        return res;
    }
    detail::IterationMonitor<T> mon(pair, b, opts, "sirt");
    const double bnorm = mon.bnorm();

    auto inverse_weights = [](std::vector<T> w) {
        T wmax = 0;
        for (T v : w) wmax = std::max(wmax, std::abs(v));
        if (!(wmax > T(0))) throw DegenerateInputError("sirt: operator maps ones to zero");
        const T floor = T(1e-6) * wmax;
        for (T& v : w) v = T(1) / std::max(v, floor);
        return w;
    };
    std::vector<T> ones_dom(pair.domain_size, T(1));
    std::vector<T> ones_rng(pair.range_size, T(1));
    const std::vector<T> row_inv = inverse_weights(pair.apply_forward(cspan(ones_dom)));
    const std::vector<T> col_inv = inverse_weights(pair.apply_back(cspan(ones_rng)));

    std::vector<T> x(pair.domain_size, T(0));
    std::vector<T> r(b.begin(), b.end());  // b - A x for x = 0

    int k = 0;
    while (k < opts.max_iters) {
        ++k;
        std::vector<T> scaled(r.size());
        for (std::size_t i = 0; i < r.size(); ++i) scaled[i] = row_inv[i] * r[i];
        std::vector<T> corr = pair.apply_back(cspan(scaled));
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += col_inv[i] * corr[i];

        // One genuine forward application per iteration: drives both the next update
        // and the logged residual.
        std::vector<T> ax = pair.apply_forward(cspan(x));
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = b[i] - ax[i];
        const double expl = double(nrm2(cspan(r))) / bnorm;
        if (mon.record(k, cspan(x), expl, std::numeric_limits<double>::quiet_NaN(), expl)) break;
    }
    return detail::finish(mon, std::move(x), pair, k);
}

}  // namespace ctk
