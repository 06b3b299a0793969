#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <vector>

#include "ctkrylov/types.hpp"

namespace ctk {

/// Small projected least-squares problem min_y || beta1*e1 - H y ||, H of size
/// (k+1) x k (bidiagonal from Golub-Kahan or upper Hessenberg from Arnoldi).
struct ProjectedProblem {
    Eigen::MatrixXd H;
    double beta1 = 0.0;
    int k = 0;

    void validate() const {
        if (k < 1 || H.cols() != k || H.rows() < k + 1)
            throw ParameterError("projected problem must have a (k+1) x k matrix, k >= 1");
        if (!H.allFinite() || !std::isfinite(beta1))
            throw ParameterError("projected problem has non-finite entries");
    }
};

namespace detail {

/// SVD view of the projected problem: residual and filter sums become O(k) per lambda.
struct ProjectedSvd {
    Eigen::VectorXd sigma;  // singular values, descending
    Eigen::VectorXd rhs;    // U^T (beta1 e1)
    double perp2 = 0.0;     // || (I - U U^T) beta1 e1 ||^2
    int k = 0;

    explicit ProjectedSvd(const ProjectedProblem& p) {
        p.validate();
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(p.H, Eigen::ComputeThinU | Eigen::ComputeThinV);
        sigma = svd.singularValues();
        Eigen::VectorXd e1 = Eigen::VectorXd::Zero(p.H.rows());
        e1(0) = p.beta1;
        rhs = svd.matrixU().transpose() * e1;
        perp2 = std::max(0.0, p.beta1 * p.beta1 - rhs.squaredNorm());
        k = p.k;
    }

    /// Squared Tikhonov discrepancy ||beta1 e1 - H y(lambda)||^2 with penalty
    /// lambda^2 ||y||^2; nondecreasing in lambda.
    double discrepancy2(double lambda) const {
        const double l2 = lambda * lambda;
        double s = perp2;
        for (int i = 0; i < sigma.size(); ++i) {
            const double d = sigma(i) * sigma(i) + l2;
            const double f = (d > 0.0) ? l2 / d : 1.0;  // sigma = lambda = 0: never fit
            s += (rhs(i) * f) * (rhs(i) * f);
        }
        return s;
    }

    /// GCV functional with the regularizer entering linearly, matching
    /// Hdag = (H^T H + lambda I)^{-1} H^T; lambda here plays the role of a squared
    /// Tikhonov parameter.
    double gcv(double lambda) const {
        double num = perp2;
        double trace = double(k) + 1.0;
        for (int i = 0; i < sigma.size(); ++i) {
            const double s2 = sigma(i) * sigma(i);
            const double r = lambda / (s2 + lambda);
            num += (rhs(i) * r) * (rhs(i) * r);
            trace -= s2 / (s2 + lambda);
        }
        return num / (trace * trace);
    }
};

}  // namespace detail

/// Discrepancy-principle parameter: the lambda whose projected discrepancy equals
/// nl^2 ||b||^2 (relative tolerance 1e-6). Returns 0 when even the unregularized
/// residual already exceeds the target (early iterations: no root yet).
inline double dp_lambda(const ProjectedProblem& p, double nl) {
    if (!(nl > 0.0 && nl < 1.0)) throw ParameterError("noise level must lie in (0,1)");
    detail::ProjectedSvd svd(p);
    const double target = nl * nl * p.beta1 * p.beta1;
    constexpr double rel_tol = 1e-6;
    // No root yet (early iterations), or the target sits at the unregularized
    // residual up to rounding: lambda = 0 is the answer.
    if (svd.discrepancy2(0.0) >= target * (1.0 - 1e-12)) return 0.0;

    const double smax = svd.sigma(0);
    double lo = 1e-10 * smax, hi = 1e10 * smax;
    if (svd.discrepancy2(lo) >= target) {
        // Root sits below the log bracket; fall back to plain bisection on [0, lo].
        double a = 0.0, b = lo;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (a + b);
            const double d = svd.discrepancy2(mid);
            if (std::abs(d - target) <= rel_tol * target) return mid;
            (d < target ? a : b) = mid;
        }
        return 0.5 * (a + b);
    }
    double llo = std::log(lo), lhi = std::log(hi);
    double mid = 0.5 * (llo + lhi);
    for (int it = 0; it < 60; ++it) {
        mid = 0.5 * (llo + lhi);
        const double d = svd.discrepancy2(std::exp(mid));
        if (std::abs(d - target) <= rel_tol * target) break;
        (d < target ? llo : lhi) = mid;
    }
    return std::exp(mid);
}

/// GCV-minimizing parameter (linear convention, see ProjectedSvd::gcv). A coarse
/// log-spaced scan brackets the global minimum, then golden-section refines it.
inline double gcv_lambda(const ProjectedProblem& p) {
    detail::ProjectedSvd svd(p);
    const double smax = svd.sigma(0);
    if (!(smax > 0.0)) throw ParameterError("gcv_lambda: projected matrix is zero");

    const double lo = std::log(1e-10 * smax * smax);
    const double hi = std::log(1e10 * smax * smax);
    constexpr int scan_points = 1001;
    int best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i < scan_points; ++i) {
        const double ll = lo + (hi - lo) * i / (scan_points - 1);
        const double v = svd.gcv(std::exp(ll));
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    const double step = (hi - lo) / (scan_points - 1);
    double a = lo + step * std::max(0, best - 1);
    double b = lo + step * std::min(scan_points - 1, best + 1);

    constexpr double inv_phi = 0.6180339887498949;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = svd.gcv(std::exp(c)), fd = svd.gcv(std::exp(d));
    for (int it = 0; it < 200 && (b - a) > 1e-10; ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = svd.gcv(std::exp(c));
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = svd.gcv(std::exp(d));
        }
    }
    return std::exp(0.5 * (a + b));
}

/// Evaluate the GCV functional directly (used by oracles and diagnostics).
inline double gcv_value(const ProjectedProblem& p, double lambda) {
    return detail::ProjectedSvd(p).gcv(lambda);
}

/// Evaluate the squared projected discrepancy at a given lambda.
inline double dp_discrepancy2(const ProjectedProblem& p, double lambda) {
    return detail::ProjectedSvd(p).discrepancy2(lambda);
}

}  // namespace ctk
