#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctkrylov/operators.hpp"
#include "ctkrylov/types.hpp"

namespace ctk {

enum class StopReason { max_iters, residual_increase, tolerance, breakdown };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::max_iters: return "max_iters";
        case StopReason::residual_increase: return "residual_increase";
        case StopReason::tolerance: return "tolerance";
        case StopReason::breakdown: return "breakdown";
    }
    return "?";
}

/// Per-iteration history of a solve. All norms are stored as doubles regardless of the
/// working precision; absent columns stay empty.
struct ConvergenceLog {
    std::vector<double> implicit_residual;
    std::vector<double> explicit_residual;
    std::vector<double> relative_error;
    std::vector<double> lambda;
    std::string solver;
    std::string precision;
    bool matched = true;

    std::size_t iterations() const { return explicit_residual.size(); }
};

template <typename T>
struct SolverOptions {
    int max_iters = 100;
    bool stop_on_explicit_residual_increase = true;
    double residual_tolerance = 1e-6;
    bool reorth = true;
    std::optional<std::vector<T>> ground_truth;  // error logging only
    std::uint64_t rng_seed = 0;
    // Test hook: called with (iteration, current iterate) after each logged iteration.
    std::function<void(int, std::span<const T>)> iterate_observer;

    void validate() const {
        if (max_iters < 1) throw ParameterError("max_iters must be >= 1");
        if (residual_tolerance < 0.0) throw ParameterError("residual tolerance must be >= 0");
    }
};

template <typename T>
struct SolveResult {
    std::vector<T> x;
    VolumeShape shape;
    int iterations_run = 0;
    StopReason stop_reason = StopReason::max_iters;
    ConvergenceLog log;
    std::vector<int> outer_starts;        // cgls_tv: log indices where outer cycles begin
    int stored_domain_basis = 0;          // solution-space basis vectors held at exit
    int stored_range_basis = 0;
    std::vector<std::string> warnings;

    Volume<T> volume() const {
        Volume<T> v(shape);
        v.data = x;
        return v;
    }
};

namespace detail {

constexpr double kIncreaseSlack = 1e-12;  // relative; "increase" means strictly above this

/// Shared iteration bookkeeping: explicit-residual recomputation, error logging,
/// tolerance / residual-increase stopping, observer dispatch.
template <typename T>
class IterationMonitor {
  public:
    IterationMonitor(const OperatorPair<T>& pair, std::span<const T> b,
                     const SolverOptions<T>& opts, std::string solver_name)
        : pair_(pair), b_(b), opts_(opts) {
        bnorm_ = double(nrm2(b));
        if (!(bnorm_ > 0.0)) throw DegenerateInputError(solver_name + ": zero right-hand side");
        if (opts_.ground_truth) {
            pair_.check_domain(opts_.ground_truth->size());
            gt_norm_ = double(nrm2(cspan(*opts_.ground_truth)));
            if (!(gt_norm_ > 0.0)) throw DegenerateInputError("ground truth has zero norm");
        }
        log_.solver = std::move(solver_name);
        log_.precision = sizeof(T) == sizeof(double) ? "double" : "single";
        log_.matched = pair.matched;
    }

    /// Record iteration k (1-based). Returns true when the solver should stop.
    /// `explicit_override`, when given, must come from a genuine forward application
    /// the caller already performed for this iterate.
    bool record(int k, std::span<const T> x, double implicit_rel,
                double lambda = std::numeric_limits<double>::quiet_NaN(),
                std::optional<double> explicit_override = std::nullopt) {
        double expl;
        if (explicit_override) {
            expl = *explicit_override;
        } else {
            std::vector<T> ax = pair_.apply_forward(x);
            axpy(T(-1), b_, mspan(ax));
            expl = double(nrm2(cspan(ax))) / bnorm_;
        }
        if (!std::isfinite(expl) || !std::isfinite(implicit_rel))
            throw NumericalError("non-finite residual at iteration " + std::to_string(k), k);

        log_.implicit_residual.push_back(implicit_rel);
        log_.explicit_residual.push_back(expl);
        if (!std::isnan(lambda)) log_.lambda.push_back(lambda);
        if (opts_.ground_truth) {
            std::vector<T> diff(x.begin(), x.end());
            axpy(T(-1), cspan(*opts_.ground_truth), mspan(diff));
            log_.relative_error.push_back(double(nrm2(cspan(diff))) / gt_norm_);
        }
        if (opts_.iterate_observer) opts_.iterate_observer(k, x);

        if (expl <= opts_.residual_tolerance) {
            reason_ = StopReason::tolerance;
            return true;
        }
        if (opts_.stop_on_explicit_residual_increase && have_prev_ &&
            expl > prev_expl_ * (1.0 + kIncreaseSlack)) {
            reason_ = StopReason::residual_increase;
            return true;
        }
        prev_expl_ = expl;
        have_prev_ = true;
        return false;
    }

    /// Forget the previous residual so the increase rule restarts (TV cold restarts).
    void reset_increase_baseline() { have_prev_ = false; }

    double bnorm() const { return bnorm_; }
    StopReason reason() const { return reason_; }
    void set_reason(StopReason r) { reason_ = r; }
    ConvergenceLog take_log() { return std::move(log_); }

  private:
    const OperatorPair<T>& pair_;
    std::span<const T> b_;
    const SolverOptions<T>& opts_;
    double bnorm_ = 0.0;
    double gt_norm_ = 0.0;
    double prev_expl_ = 0.0;
    bool have_prev_ = false;
    StopReason reason_ = StopReason::max_iters;
    ConvergenceLog log_;
};

template <typename T>
SolveResult<T> finish(IterationMonitor<T>& mon, std::vector<T> x, const OperatorPair<T>& pair,
                      int iterations) {
    SolveResult<T> res;
    res.x = std::move(x);
    res.shape = pair.domain_shape;
    res.iterations_run = iterations;
    res.stop_reason = mon.reason();
    res.log = mon.take_log();
    return res;
}

}  // namespace detail
}  // namespace ctk
