#pragma once

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

#include "ctkrylov/solve_log.hpp"

namespace ctk {

/// ||A x - b|| / ||b|| from one genuine forward application.
template <typename T>
double relative_residual(const OperatorPair<T>& pair, std::span<const T> x,
                         std::span<const T> b) {
    pair.check_domain(x.size());
    pair.check_range(b.size());
    const double bnorm = double(nrm2(b));
    if (!(bnorm > 0.0)) throw DegenerateInputError("relative_residual: zero measurements");
    std::vector<T> r = pair.apply_forward(x);
    axpy(T(-1), b, mspan(r));
    return double(nrm2(cspan(r))) / bnorm;
}

template <typename T>
double relative_error(const Volume<T>& x, const Volume<T>& gt) {
    if (x.shape() != gt.shape()) throw DimensionError("relative_error: shape mismatch");
    const double gnorm = double(nrm2(cspan(gt.data)));
    if (!(gnorm > 0.0)) throw DegenerateInputError("relative_error: zero ground truth");
    std::vector<T> d = x.data;
    axpy(T(-1), cspan(gt.data), mspan(d));
    return double(nrm2(cspan(d))) / gnorm;
}

struct Semiconvergence {
    int min_index = 0;        // first occurrence of the error minimum (0-based)
    double rebound_ratio = 0; // (final - min) / min
};

/// Locate the error minimum and how far the curve climbed back after it.
inline Semiconvergence detect_semiconvergence(const ConvergenceLog& log) {
    const auto& err = log.relative_error;
    if (err.size() < 3)
        throw ParameterError("detect_semiconvergence needs at least 3 error entries");
    std::size_t best = 0;
    for (std::size_t i = 1; i < err.size(); ++i)
        if (err[i] < err[best]) best = i;
    Semiconvergence s;
    s.min_index = int(best);
    s.rebound_ratio = (err.back() - err[best]) / err[best];
    return s;
}

/// Worst-case relative gap between the recurrence residuals and the explicitly
/// recomputed ones: the diagnostic for unmatched pairs and precision loss.
inline double residual_divergence(const ConvergenceLog& log) {
    if (log.implicit_residual.empty() || log.explicit_residual.empty() ||
        log.implicit_residual.size() != log.explicit_residual.size())
        throw ParameterError("residual_divergence needs both residual histories");
    double worst = 0.0;
    for (std::size_t i = 0; i < log.implicit_residual.size(); ++i) {
        const double impl = log.implicit_residual[i];
        const double gap = std::abs(log.explicit_residual[i] - impl) / std::max(impl, 1e-30);
        worst = std::max(worst, gap);
    }
    return worst;
}

namespace detail {

inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace detail

/// Fixed-layout CSV: iter, implicit_residual, explicit_residual, relative_error,
/// lambda; 12 significant digits, absent columns left empty.
inline void write_csv(std::ostream& os, const ConvergenceLog& log) {
    os << "iter,implicit_residual,explicit_residual,relative_error,lambda\n";
    for (std::size_t i = 0; i < log.iterations(); ++i) {
        os << (i + 1);
        os << ',' << (i < log.implicit_residual.size() ? detail::csv_number(log.implicit_residual[i]) : "");
        os << ',' << (i < log.explicit_residual.size() ? detail::csv_number(log.explicit_residual[i]) : "");
        os << ',' << (i < log.relative_error.size() ? detail::csv_number(log.relative_error[i]) : "");
        os << ',' << (i < log.lambda.size() ? detail::csv_number(log.lambda[i]) : "");
        os << '\n';
    }
}

}  // namespace ctk
