#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "ctkrylov/gmres.hpp"
#include "ctkrylov/krylov.hpp"
#include "ctkrylov/regparam.hpp"
#include "ctkrylov/solve_log.hpp"

namespace ctk {

enum class LambdaStrategy { fixed, dp, gcv };

/// Regularization-parameter policy for the hybrid solvers.
struct HybridStrategy {
    LambdaStrategy kind = LambdaStrategy::fixed;
    double lambda = 0.0;       // fixed only
    double noise_level = 0.0;  // dp only

    static HybridStrategy fixed(double lambda) {
        if (lambda < 0.0) throw ParameterError("fixed lambda must be nonnegative");
        return {LambdaStrategy::fixed, lambda, 0.0};
    }
    static HybridStrategy dp(double noise_level) {
        if (!(noise_level > 0.0 && noise_level < 1.0))
            throw ParameterError("dp strategy needs a noise level in (0,1)");
        return {LambdaStrategy::dp, 0.0, noise_level};
    }
    static HybridStrategy gcv() { return {LambdaStrategy::gcv, 0.0, 0.0}; }
};

namespace detail {

/// Tikhonov solve of the projected problem min ||beta1 e1 - H y||^2 + lambda^2 ||y||^2
/// through an SVD of the small H. Also reports the unregularized data-fit residual
/// ||beta1 e1 - H y|| of the returned y.
inline Eigen::VectorXd projected_tikhonov(const Eigen::MatrixXd& H, double beta1, double lambda,
                                          double* fit_resid) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(H, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sig = svd.singularValues();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(H.rows());
    rhs(0) = beta1;
    Eigen::VectorXd coef = svd.matrixU().transpose() * rhs;
    Eigen::VectorXd yf(sig.size());
    for (int i = 0; i < sig.size(); ++i) {
        const double d = sig(i) * sig(i) + lambda * lambda;
        yf(i) = (d > 0.0) ? sig(i) * coef(i) / d : 0.0;
    }
    Eigen::VectorXd y = svd.matrixV() * yf;
    if (fit_resid) *fit_resid = (rhs - H * y).norm();
    return y;
}

/// Pick lambda for the current projected problem. GCV's printed form treats lambda as
/// the squared Tikhonov parameter, so the solver takes its square root.
inline double choose_lambda(const HybridStrategy& strat, const Eigen::MatrixXd& H, double beta1) {
    switch (strat.kind) {
        case LambdaStrategy::fixed: return strat.lambda;
        case LambdaStrategy::dp: {
            ProjectedProblem p{H, beta1, int(H.cols())};
            return dp_lambda(p, strat.noise_level);
        }
        case LambdaStrategy::gcv: {
            ProjectedProblem p{H, beta1, int(H.cols())};
            return std::sqrt(std::max(0.0, gcv_lambda(p)));
        }
    }
    return 0.0;
}

}  // namespace detail

/// Hybrid LSQR: Tikhonov regularization applied to the projected problem at every
/// iteration, with lambda fixed ahead of time or selected on the fly (DP or GCV).
/// Stores all basis vectors; x_k = V_k y_k.
template <typename T>
SolveResult<T> hybrid_lsqr(const OperatorPair<T>& pair, std::span<const T> b,
                           const HybridStrategy& strategy, const SolverOptions<T>& opts) {
    opts.validate();
    pair.check_range(b.size());
    detail::IterationMonitor<T> mon(pair, b, opts, "hybrid_lsqr");

    BidiagState<T> st = gk_init(pair, b, opts.reorth);
    std::vector<T> x(pair.domain_size, T(0));
    int k = 0;
    while (k < opts.max_iters) {
        const StepStatus status = gk_expand(st, pair);
        if (status == StepStatus::breakdown && st.completed() < k + 1) {
            // No new column: the factorization is exhausted at the current size.
            mon.set_reason(StopReason::breakdown);
            break;
        }
        ++k;
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(k + 1, k);
        for (int j = 0; j < k; ++j) {
            H(j, j) = double(st.alphas[std::size_t(j)]);
            H(j + 1, j) = double(st.betas[std::size_t(j)]);
        }
        const double lambda_k = detail::choose_lambda(strategy, H, double(st.beta1));
        double fit = 0.0;
        const Eigen::VectorXd y = detail::projected_tikhonov(H, double(st.beta1), lambda_k, &fit);
        x = detail::basis_combination(st.v_basis, y, pair.domain_size);
        if (mon.record(k, cspan(x), fit / double(st.beta1), lambda_k)) break;
        if (status == StepStatus::breakdown) {
            mon.set_reason(StopReason::breakdown);
            break;
        }
    }
    SolveResult<T> res = detail::finish(mon, std::move(x), pair, k);
    res.stored_domain_basis = int(st.v_basis.size());
    res.stored_range_basis = int(st.u_basis.size());
    return res;
}

/// Iteration-dependent preconditioner factory for the flexible solver: called with
/// the iteration number and the current iterate, returns the preconditioner to apply
/// to the new basis vector. May append warnings.
template <typename T>
using PrecondFactory = std::function<std::function<void(std::span<const T>, std::span<T>)>(
    int, std::span<const T>, std::vector<std::string>&)>;

/// Flexible hybrid LSQR: Golub-Kahan with an iteration-dependent right preconditioner
/// folded into the solution space (A Z_k = U_{k+1} M_k), plus projected Tikhonov
/// regularization at every iteration. Solution x_k = Z_k y_k.
template <typename T>
SolveResult<T> flexible_hybrid_lsqr(const OperatorPair<T>& pair, std::span<const T> b,
                                    const HybridStrategy& strategy,
                                    const PrecondFactory<T>& factory,
                                    const SolverOptions<T>& opts,
                                    const std::string& name = "flsqr") {
    opts.validate();
    pair.check_range(b.size());
    if (strategy.kind == LambdaStrategy::dp)
        throw ParameterError(name + ": dp strategy is not supported, use fixed or gcv");
    detail::IterationMonitor<T> mon(pair, b, opts, name);

    std::vector<std::string> warnings;
    FlexibleState<T> st = flexible_gk_init(pair, b, opts.reorth);
    std::vector<T> x(pair.domain_size, T(0));
    int k = 0;
    while (k < opts.max_iters) {
        auto precond = factory(k + 1, cspan(x), warnings);
        const StepStatus status = flexible_gk_expand(st, pair, precond);
        if (status == StepStatus::breakdown && st.completed() < k + 1) {
            mon.set_reason(StopReason::breakdown);
            break;
        }
        ++k;
        const Eigen::MatrixXd M = detail::hessenberg_matrix(st.m_cols);
        const double lambda_k = detail::choose_lambda(strategy, M, double(st.beta1));
        double fit = 0.0;
        const Eigen::VectorXd y = detail::projected_tikhonov(M, double(st.beta1), lambda_k, &fit);
        x = detail::basis_combination(st.z_basis, y, pair.domain_size);
        if (mon.record(k, cspan(x), fit / double(st.beta1), lambda_k)) break;
        if (status == StepStatus::breakdown) {
            mon.set_reason(StopReason::breakdown);
            break;
        }
    }
    SolveResult<T> res = detail::finish(mon, std::move(x), pair, k);
    res.stored_domain_basis = int(st.z_basis.size());
    res.stored_range_basis = int(st.u_basis.size());
    res.warnings = std::move(warnings);
    return res;
}

}  // namespace ctk
