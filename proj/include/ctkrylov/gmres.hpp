#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ctkrylov/krylov.hpp"
#include "ctkrylov/solve_log.hpp"

namespace ctk {

namespace detail {

template <typename T>
Eigen::MatrixXd hessenberg_matrix(const std::vector<std::vector<T>>& cols) {
    const int k = int(cols.size());
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(k + 1, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < int(cols[std::size_t(j)].size()) && i <= k; ++i)
            H(i, j) = double(cols[std::size_t(j)][std::size_t(i)]);
    return H;
}

/// Least-squares solve of min || beta1 e1 - H y ||; returns y and the residual norm.
inline Eigen::VectorXd projected_ls(const Eigen::MatrixXd& H, double beta1, double* resid) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(H.rows());
    rhs(0) = beta1;
    Eigen::VectorXd y = H.colPivHouseholderQr().solve(rhs);
    if (resid) *resid = (rhs - H * y).norm();
    return y;
}

template <typename T>
std::vector<T> basis_combination(const std::vector<std::vector<T>>& basis,
                                 const Eigen::VectorXd& y, std::size_t n) {
    std::vector<T> x(n, T(0));
    for (int i = 0; i < y.size(); ++i) axpy(T(y(i)), cspan(basis[std::size_t(i)]), mspan(x));
    return x;
}

template <typename T>
SolveResult<T> abba_gmres(const OperatorPair<T>& pair, std::span<const T> b,
                          const SolverOptions<T>& opts, bool ab_variant) {
    opts.validate();
    pair.check_range(b.size());
    const std::string name = ab_variant ? "ab_gmres" : "ba_gmres";
    IterationMonitor<T> mon(pair, b, opts, name);

    // AB-GMRES: Arnoldi on A B over the measurement space, solution x = B u.
    // BA-GMRES: Arnoldi on B A over the image space with right-hand side B b.
    std::function<void(std::span<const T>, std::span<T>)> apply_square;
    std::vector<T> rhs;
    if (ab_variant) {
        rhs.assign(b.begin(), b.end());
        apply_square = [&pair](std::span<const T> in, std::span<T> out) {
            std::vector<T> t = pair.apply_back(in);
            std::vector<T> y = pair.apply_forward(cspan(t));
            std::copy(y.begin(), y.end(), out.begin());
        };
    } else {
        rhs = pair.apply_back(b);
        apply_square = [&pair](std::span<const T> in, std::span<T> out) {
            std::vector<T> t = pair.apply_forward(in);
            std::vector<T> y = pair.apply_back(cspan(t));
            std::copy(y.begin(), y.end(), out.begin());
        };
    }

    ArnoldiState<T> st = arnoldi_init(cspan(rhs), opts.reorth);
    std::vector<T> x(pair.domain_size, T(0));
    int k = 0;
    while (k < opts.max_iters) {
        ++k;
        const StepStatus status = arnoldi_expand(st, apply_square);
        const Eigen::MatrixXd H = hessenberg_matrix(st.h_cols);
        double resid = 0.0;
        const Eigen::VectorXd y = projected_ls(H, double(st.beta1), &resid);
        if (ab_variant) {
            std::vector<T> u = basis_combination(st.w_basis, y, pair.range_size);
            x = pair.apply_back(cspan(u));
        } else {
            x = basis_combination(st.w_basis, y, pair.domain_size);
        }
        // Projected residual of the preconditioned system, relative to its own
        // right-hand side (equals ||b|| for the AB variant).
        const double implicit = resid / double(st.beta1);
        if (mon.record(k, cspan(x), implicit)) break;
        if (status == StepStatus::breakdown) {
            mon.set_reason(StopReason::breakdown);
            break;
        }
    }
    SolveResult<T> res = finish(mon, std::move(x), pair, k);
    res.stored_domain_basis = ab_variant ? 0 : int(st.w_basis.size());
    res.stored_range_basis = ab_variant ? int(st.w_basis.size()) : 0;
    return res;
}

}  // namespace detail

/// GMRES on min_u || b - A B u || with x = B u: the backprojector acts as a right
/// preconditioner, so no adjoint of A is ever needed.
template <typename T>
SolveResult<T> ab_gmres(const OperatorPair<T>& pair, std::span<const T> b,
                        const SolverOptions<T>& opts) {
    return detail::abba_gmres(pair, b, opts, true);
}

/// GMRES on min_x || B b - B A x ||: the backprojector acts as a left preconditioner.
template <typename T>
SolveResult<T> ba_gmres(const OperatorPair<T>& pair, std::span<const T> b,
                        const SolverOptions<T>& opts) {
    return detail::abba_gmres(pair, b, opts, false);
}

}  // namespace ctk
