#pragma once

// Test-only reference implementations: dense linear algebra oracles, a Siddon-style
// ray-box intersector, and random problem generators. Everything here is independent
// of the library's computational paths it is used to check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "ctkrylov/operators.hpp"
#include "ctkrylov/types.hpp"

namespace oracle {

inline std::mt19937_64 rng(std::uint64_t seed) { return std::mt19937_64(seed); }

inline Eigen::MatrixXd random_matrix(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = n(g);
    return m;
}

/// Random matrix with singular values pushed away from zero (condition ~ 10).
inline Eigen::MatrixXd well_conditioned_matrix(int rows, int cols, std::uint64_t seed) {
    Eigen::MatrixXd m = random_matrix(rows, cols, seed);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    Eigen::VectorXd s = svd.singularValues();
    const double smax = s(0);
    for (int i = 0; i < s.size(); ++i) s(i) = smax * (0.1 + 0.9 * s(i) / smax);
    return svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
}

inline Eigen::VectorXd random_vector(int n, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> d(0.0, 1.0);
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = d(g);
    return v;
}

template <typename T>
ctk::DenseMatrix<T> to_dense(const Eigen::MatrixXd& m) {
    ctk::DenseMatrix<T> d(std::size_t(m.rows()), std::size_t(m.cols()));
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) d(std::size_t(i), std::size_t(j)) = T(m(i, j));
    return d;
}

template <typename T>
std::vector<T> to_std(const Eigen::VectorXd& v) {
    std::vector<T> out(std::size_t(v.size()));
    for (int i = 0; i < v.size(); ++i) out[std::size_t(i)] = T(v(i));
    return out;
}

template <typename T>
Eigen::VectorXd to_eigen(const std::vector<T>& v) {
    Eigen::VectorXd out(Eigen::Index(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(Eigen::Index(i)) = double(v[i]);
    return out;
}

/// Max relative adjoint defect |<Ax,y> - <x,By>| / (||Ax|| ||y||) over random trials.
template <typename T>
double adjoint_discrepancy(const ctk::OperatorPair<T>& pair, int trials, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        std::vector<T> x(pair.domain_size), y(pair.range_size);
        for (auto& v : x) v = T(dist(g));
        for (auto& v : y) v = T(dist(g));
        const std::vector<T> ax = pair.apply_forward(ctk::cspan(x));
        const std::vector<T> by = pair.apply_back(ctk::cspan(y));
        const double lhs = to_eigen(ax).dot(to_eigen(y));
        const double rhs = to_eigen(x).dot(to_eigen(by));
        const double scale = to_eigen(ax).norm() * to_eigen(y).norm();
        if (scale > 0.0) worst = std::max(worst, std::abs(lhs - rhs) / scale);
    }
    return worst;
}

/// Exact ray/axis-aligned-box intersection length (slab method). Direction must be
/// normalized; the box is [lo, hi] per axis.
inline double ray_box_chord(const std::array<double, 3>& origin, const std::array<double, 3>& dir,
                            const std::array<double, 3>& lo, const std::array<double, 3>& hi) {
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (dir[a] == 0.0) {
            if (origin[a] < lo[a] || origin[a] > hi[a]) return 0.0;
            continue;
        }
        double t1 = (lo[a] - origin[a]) / dir[a];
        double t2 = (hi[a] - origin[a]) / dir[a];
        if (t1 > t2) std::swap(t1, t2);
        tmin = std::max(tmin, t1);
        tmax = std::min(tmax, t2);
    }
    return std::max(0.0, tmax - tmin);
}

/// Dense forward-difference operator (3M x M) matching the library's boundary
/// convention, built independently from the definition.
inline Eigen::MatrixXd dense_gradient_matrix(int nx, int ny, int nz) {
    const int m = nx * ny * nz;
    auto idx = [&](int i, int j, int k) { return i + nx * (j + ny * k); };
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(3 * m, m);
    for (int k = 0; k < nz; ++k)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const int r = idx(i, j, k);
                if (i + 1 < nx) {
                    d(r, idx(i + 1, j, k)) += 1.0;
                    d(r, r) -= 1.0;
                }
                if (j + 1 < ny) {
                    d(m + r, idx(i, j + 1, k)) += 1.0;
                    d(m + r, r) -= 1.0;
                }
                if (k + 1 < nz) {
                    d(2 * m + r, idx(i, j, k + 1)) += 1.0;
                    d(2 * m + r, r) -= 1.0;
                }
            }
    return d;
}

/// Dense GMRES on M t = rhs: returns the iterate after k steps, computed from a
/// Householder-orthonormalized power basis and a dense least-squares solve.
inline Eigen::VectorXd dense_gmres_iterate(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs,
                                           int k) {
    const int n = int(rhs.size());
    Eigen::MatrixXd basis(n, k);
    Eigen::VectorXd w = rhs;
    for (int j = 0; j < k; ++j) {
        basis.col(j) = w;
        w = M * w;
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, k);
    const Eigen::VectorXd c = (M * q).colPivHouseholderQr().solve(rhs);
    return q * c;
}

/// Krylov subspace basis {A^T b, (A^T A) A^T b, ...} as dense columns.
inline Eigen::MatrixXd dense_krylov_basis(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                          int k) {
    Eigen::MatrixXd basis(A.cols(), k);
    Eigen::VectorXd w = A.transpose() * b;
    for (int j = 0; j < k; ++j) {
        basis.col(j) = w;
        w = A.transpose() * (A * w);
    }
    return basis;
}

}  // namespace oracle
