#pragma once

#include <functional>
#include <span>
#include <vector>

#include "ctkrylov/operators.hpp"
#include "ctkrylov/types.hpp"

namespace ctk {

enum class StepStatus { ok, breakdown };

template <typename T>
constexpr double breakdown_factor() {
    return sizeof(T) == sizeof(double) ? 1e-14 : 1e-7;
}

namespace detail {

// Two passes of classical Gram-Schmidt against a stored basis. The projection
// coefficients are discarded; callers keep their recurrence coefficients, which the
// cleanup only perturbs at rounding level.
template <typename T>
void cgs2(const std::vector<std::vector<T>>& basis, std::span<T> w) {
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<T> coef(basis.size());
        for (std::size_t i = 0; i < basis.size(); ++i) coef[i] = dot(cspan(basis[i]), std::span<const T>(w));
        for (std::size_t i = 0; i < basis.size(); ++i) axpy(-coef[i], cspan(basis[i]), w);
    }
}

}  // namespace detail

/// Partial Golub-Kahan bidiagonalization A V_k = U_{k+1} H_k with lower-bidiagonal
/// H_k: diagonal alphas[0..k-1], subdiagonal betas[0..k-1]. After m expansions the
/// state holds m+1 U and V vectors (V carries one lookahead column), so H_k is
/// available for k = m.
template <typename T>
struct BidiagState {
    std::vector<std::vector<T>> u_basis, v_basis;
    std::vector<T> alphas;  // alpha_1, alpha_2, ...
    std::vector<T> betas;   // beta_2, beta_3, ... (subdiagonal of H)
    T beta1 = 0;            // ||b||
    bool reorth = false;

    int completed() const { return int(betas.size()); }  // largest k with H_k formed
};

template <typename T>
BidiagState<T> gk_init(const OperatorPair<T>& pair, std::span<const T> b, bool reorth) {
    pair.check_range(b.size());
    BidiagState<T> st;
    st.reorth = reorth;
    st.beta1 = nrm2(b);
    if (!(st.beta1 > T(0))) throw DegenerateInputError("gk_init: right-hand side has zero norm");
    std::vector<T> u(b.begin(), b.end());
    scal(T(1) / st.beta1, mspan(u));
    std::vector<T> v = pair.apply_back(cspan(u));
    const T alpha1 = nrm2(cspan(v));
    if (!(alpha1 > T(0))) throw DegenerateInputError("gk_init: B u_1 vanished");
    scal(T(1) / alpha1, mspan(v));
    st.u_basis.push_back(std::move(u));
    st.v_basis.push_back(std::move(v));
    st.alphas.push_back(alpha1);
    return st;
}

template <typename T>
StepStatus gk_expand(BidiagState<T>& st, const OperatorPair<T>& pair) {
    const std::size_t j = st.v_basis.size();  // about to produce u_{j+1}, v_{j+1}
    const T tol = T(breakdown_factor<T>()) * st.beta1;

    std::vector<T> w = pair.apply_forward(cspan(st.v_basis[j - 1]));
    axpy(-st.alphas[j - 1], cspan(st.u_basis[j - 1]), mspan(w));
    if (st.reorth) detail::cgs2(st.u_basis, mspan(w));
    const T beta = nrm2(cspan(w));
    if (beta <= tol) return StepStatus::breakdown;
    scal(T(1) / beta, mspan(w));
    st.u_basis.push_back(std::move(w));
    st.betas.push_back(beta);

    std::vector<T> z = pair.apply_back(cspan(st.u_basis[j]));
    axpy(-beta, cspan(st.v_basis[j - 1]), mspan(z));
    if (st.reorth) detail::cgs2(st.v_basis, mspan(z));
    const T alpha = nrm2(cspan(z));
    if (alpha <= tol) return StepStatus::breakdown;
    scal(T(1) / alpha, mspan(z));
    st.v_basis.push_back(std::move(z));
    st.alphas.push_back(alpha);
    return StepStatus::ok;
}

/// Arnoldi factorization M W_k = W_{k+1} Hbar_k for a square operator, built with
/// modified Gram-Schmidt (plus a classical second pass when reorth is set).
template <typename T>
struct ArnoldiState {
    std::vector<std::vector<T>> w_basis;
    std::vector<std::vector<T>> h_cols;  // column j holds h(0..j+1, j)
    T beta1 = 0;
    bool reorth = false;

    int completed() const { return int(h_cols.size()); }
};

template <typename T>
ArnoldiState<T> arnoldi_init(std::span<const T> rhs, bool reorth) {
    ArnoldiState<T> st;
    st.reorth = reorth;
    st.beta1 = nrm2(rhs);
    if (!(st.beta1 > T(0))) throw DegenerateInputError("arnoldi_init: zero right-hand side");
    std::vector<T> w(rhs.begin(), rhs.end());
    scal(T(1) / st.beta1, mspan(w));
    st.w_basis.push_back(std::move(w));
    return st;
}

template <typename T>
StepStatus arnoldi_expand(
    ArnoldiState<T>& st,
    const std::function<void(std::span<const T>, std::span<T>)>& apply_square) {
    const std::size_t j = st.h_cols.size();
    std::vector<T> w(st.w_basis[0].size());
    apply_square(cspan(st.w_basis[j]), mspan(w));

    std::vector<T> h(j + 2, T(0));
    for (std::size_t i = 0; i <= j; ++i) {  // modified Gram-Schmidt
        h[i] = dot(cspan(st.w_basis[i]), std::span<const T>(cspan(w)));
        axpy(-h[i], cspan(st.w_basis[i]), mspan(w));
    }
    if (st.reorth) {
        for (std::size_t i = 0; i <= j; ++i) {
            const T c = dot(cspan(st.w_basis[i]), std::span<const T>(cspan(w)));
            axpy(-c, cspan(st.w_basis[i]), mspan(w));
            h[i] += c;
        }
    }
    const T hnext = nrm2(cspan(w));
    h[j + 1] = hnext;
    st.h_cols.push_back(std::move(h));
    if (hnext <= T(breakdown_factor<T>()) * st.beta1) return StepStatus::breakdown;
    scal(T(1) / hnext, mspan(w));
    st.w_basis.push_back(std::move(w));
    return StepStatus::ok;
}

/// Flexible Golub-Kahan factorization A Z_k = U_{k+1} M_k with upper-Hessenberg M_k,
/// where z_i = P_i v_i for an iteration-dependent preconditioner P_i. All basis
/// vectors are stored.
template <typename T>
struct FlexibleState {
    std::vector<std::vector<T>> u_basis, v_basis, z_basis;
    std::vector<std::vector<T>> m_cols;  // column j holds m(0..j+1, j)
    T beta1 = 0;
    bool reorth = false;

    int completed() const { return int(m_cols.size()); }
};

template <typename T>
FlexibleState<T> flexible_gk_init(const OperatorPair<T>& pair, std::span<const T> b, bool reorth) {
    pair.check_range(b.size());
    FlexibleState<T> st;
    st.reorth = reorth;
    st.beta1 = nrm2(b);
    if (!(st.beta1 > T(0))) throw DegenerateInputError("flexible_gk_init: zero right-hand side");
    std::vector<T> u(b.begin(), b.end());
    scal(T(1) / st.beta1, mspan(u));
    std::vector<T> v = pair.apply_back(cspan(u));
    const T nv = nrm2(cspan(v));
    if (!(nv > T(0))) throw DegenerateInputError("flexible_gk_init: B u_1 vanished");
    scal(T(1) / nv, mspan(v));
    st.u_basis.push_back(std::move(u));
    st.v_basis.push_back(std::move(v));
    return st;
}

template <typename T>
StepStatus flexible_gk_expand(
    FlexibleState<T>& st, const OperatorPair<T>& pair,
    const std::function<void(std::span<const T>, std::span<T>)>& precond) {
    const std::size_t j = st.m_cols.size();
    const T tol = T(breakdown_factor<T>()) * st.beta1;

    std::vector<T> z(st.v_basis[j].size());
    precond(cspan(st.v_basis[j]), mspan(z));
    if (!(nrm2(cspan(z)) > T(0))) return StepStatus::breakdown;

    std::vector<T> w = pair.apply_forward(cspan(z));
    std::vector<T> m(j + 2, T(0));
    for (std::size_t i = 0; i <= j; ++i) {
        m[i] = dot(cspan(st.u_basis[i]), std::span<const T>(cspan(w)));
        axpy(-m[i], cspan(st.u_basis[i]), mspan(w));
    }
    if (st.reorth) {
        for (std::size_t i = 0; i <= j; ++i) {
            const T c = dot(cspan(st.u_basis[i]), std::span<const T>(cspan(w)));
            axpy(-c, cspan(st.u_basis[i]), mspan(w));
            m[i] += c;
        }
    }
    const T mnext = nrm2(cspan(w));
    m[j + 1] = mnext;
    st.z_basis.push_back(std::move(z));
    st.m_cols.push_back(std::move(m));
    if (mnext <= tol) return StepStatus::breakdown;
    scal(T(1) / mnext, mspan(w));
    st.u_basis.push_back(std::move(w));

    // Grow the V space from B u_{k+1}, fully orthogonalized: flexibility breaks the
    // short bidiagonal recurrence.
    std::vector<T> v = pair.apply_back(cspan(st.u_basis.back()));
    for (int pass = 0; pass < (st.reorth ? 2 : 1); ++pass) {
        for (std::size_t i = 0; i < st.v_basis.size(); ++i) {
            const T c = dot(cspan(st.v_basis[i]), std::span<const T>(cspan(v)));
            axpy(-c, cspan(st.v_basis[i]), mspan(v));
        }
    }
    const T nv = nrm2(cspan(v));
    if (nv <= tol) return StepStatus::breakdown;
    scal(T(1) / nv, mspan(v));
    st.v_basis.push_back(std::move(v));
    return StepStatus::ok;
}

}  // namespace ctk
