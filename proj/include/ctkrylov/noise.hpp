#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "ctkrylov/types.hpp"

namespace ctk {

/// CT count-domain noise: line integrals p become photon counts I0 exp(-p), receive
/// Poisson (photon) and additive Gaussian (electronic) noise, and are mapped back.
struct NoiseModel {
    double i0 = 1e5;    // air photon count
    double sigma = 0.5; // Gaussian standard deviation, detector counts
    std::uint64_t seed = 0;

    void validate() const {
        if (!(i0 > 0.0)) throw ParameterError("noise model: I0 must be positive");
        if (sigma < 0.0) throw ParameterError("noise model: sigma must be nonnegative");
    }
};

// Identifier of the sampling scheme, recorded in run metadata so outputs can be
// reproduced: a single mt19937_64 stream walked in detector-index order, one Poisson
// draw then one Gaussian draw per sample (standard library distributions).
inline const char* noise_rng_id() { return "mt19937_64+std::poisson/normal,sequential"; }

template <typename T>
ProjectionSet<T> add_noise(const ProjectionSet<T>& proj, const NoiseModel& model) {
    model.validate();
    proj.validate();
    for (T p : proj.data)
        if (!(p >= T(0))) throw DegenerateInputError("add_noise: negative line integral");

    ProjectionSet<T> out = proj;
    std::mt19937_64 rng(model.seed);
    std::normal_distribution<double> gauss(0.0, model.sigma);
    const double log_i0 = std::log(model.i0);
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        const double counts = model.i0 * std::exp(-double(proj.data[i]));
        double noisy = double(std::poisson_distribution<long long>(counts)(rng));
        if (model.sigma > 0.0) noisy += gauss(rng);
        noisy = std::max(noisy, 1.0);  // zero counts would map to an infinite integral
        out.data[i] = T(log_i0 - std::log(noisy));
    }
    return out;
}

}  // namespace ctk
