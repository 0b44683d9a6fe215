#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "pcrb/array.hpp"
#include "pcrb/prior.hpp"

namespace pcrb {

/// splitmix64 finalizer; cheap, well distributed, stable across platforms.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Per-trial stream seed: hash(master, index). Trials seeded this way give
/// identical results regardless of how they are distributed over threads.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index + 1));
}

/// Circularly symmetric complex Gaussian matrix with per-entry variance
/// `entry_variance` (real and imaginary parts each carry half).
template <class URBG>
ComplexMatrix cscg_matrix(int rows, int cols, double entry_variance, URBG& rng) {
    ComplexMatrix m(rows, cols);
    if (entry_variance <= 0.0) {
        m.setZero();
        return m;
    }
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * entry_variance));
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = Complex{normal(rng), normal(rng)};
    return m;
}

/// Random Hermitian PSD matrix W W^H rescaled to the requested trace.
template <class URBG>
ComplexMatrix random_psd_covariance(int n, double trace, URBG& rng) {
    const ComplexMatrix w = cscg_matrix(n, n, 1.0, rng);
    ComplexMatrix r = w * w.adjoint();
    r *= trace / r.trace().real();
    // fold numerical asymmetry
    return 0.5 * (r + r.adjoint());
}

/// Random rank-one covariance v v^H with the requested trace.
template <class URBG>
ComplexMatrix random_rank_one_covariance(int n, double trace, URBG& rng) {
    const ComplexMatrix v = cscg_matrix(n, 1, 1.0, rng);
    ComplexMatrix r = v * v.adjoint();
    r *= trace / r.trace().real();
    return 0.5 * (r + r.adjoint());
}

/// Random feasible design covariance: trace uniform in (0.1, 1] of the power
/// budget, rank-one with probability `rank_one_fraction`.
template <class URBG>
ComplexMatrix random_feasible_covariance(int n, double power_w, URBG& rng,
                                         double rank_one_fraction = 0.25) {
    std::uniform_real_distribution<double> unif(0.1, 1.0);
    const double trace = unif(rng) * power_w;
    std::uniform_real_distribution<double> pick(0.0, 1.0);
    if (pick(rng) < rank_one_fraction) return random_rank_one_covariance(n, trace, rng);
    return random_psd_covariance(n, trace, rng);
}

/// Random valid mixture prior with K in [1, max_components], means spread
/// over (0.5, 5.5) and sigmas in [1e-3, 5e-2]. Weights are normalized draws.
template <class URBG>
GaussianMixturePrior random_mixture_prior(URBG& rng, int max_components = 6) {
    std::uniform_int_distribution<int> kdist(1, max_components);
    const int k = kdist(rng);
    std::uniform_real_distribution<double> mean_dist(0.5, 5.5);
    std::uniform_real_distribution<double> sigma_dist(1e-3, 5e-2);
    std::uniform_real_distribution<double> weight_dist(0.1, 1.0);
    std::vector<GaussianComponent> comps(k);
    double total = 0.0;
    for (auto& c : comps) {
        c.mean = mean_dist(rng);
        const double s = sigma_dist(rng);
        c.variance = s * s;
        c.weight = weight_dist(rng);
        total += c.weight;
    }
    for (auto& c : comps) c.weight /= total;
    return GaussianMixturePrior(std::move(comps));
}

}  // namespace pcrb
