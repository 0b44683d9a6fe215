#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

#include "pcrb/quadrature.hpp"

namespace pcrb {

struct GaussianComponent {
    double weight = 1.0;
    double mean = 0.0;      ///< radians
    double variance = 1.0;  ///< radians^2
};

/// Density floor below which a point is treated as outside the effective
/// support; score-type integrands contribute nothing there.
inline constexpr double kDensityFloor = 1e-300;

/// Weighted mixture of K Gaussian densities over the target angle.
/// Construction requires the +-8 sigma support of every component to lie
/// inside [0, 2pi), so truncation effects are negligible and no wrap-around
/// handling is needed.
class GaussianMixturePrior {
public:
    explicit GaussianMixturePrior(std::vector<GaussianComponent> components)
        : components_(std::move(components)) {
        if (components_.empty())
            throw std::invalid_argument("GaussianMixturePrior: need at least one component");
        double weight_sum = 0.0;
        for (const auto& c : components_) {
            if (!(c.weight >= 0.0) || c.weight > 1.0)
                throw std::invalid_argument("GaussianMixturePrior: weights must be in [0, 1]");
            if (!(c.variance > 0.0))
                throw std::invalid_argument("GaussianMixturePrior: variances must be positive");
            if (!(c.mean >= 0.0) || !(c.mean < 2.0 * kPi))
                throw std::invalid_argument("GaussianMixturePrior: means must lie in [0, 2pi)");
            const double s = std::sqrt(c.variance);
            if (c.mean - 8.0 * s < 0.0 || c.mean + 8.0 * s >= 2.0 * kPi)
                throw std::invalid_argument(
                    "GaussianMixturePrior: +-8 sigma support must lie inside [0, 2pi)");
            weight_sum += c.weight;
        }
        if (std::abs(weight_sum - 1.0) > 1e-12)
            throw std::invalid_argument("GaussianMixturePrior: weights must sum to 1");
    }

    const std::vector<GaussianComponent>& components() const { return components_; }
    int size() const { return static_cast<int>(components_.size()); }

    double pdf(double theta) const {
        double p = 0.0;
        for (const auto& c : components_) p += c.weight * component_pdf(c, theta);
        return p;
    }

    double log_pdf(double theta) const {
        const double p = pdf(theta);
        return p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
    }

    /// d/dtheta ln p(theta). Defined only on the effective support.
    double score(double theta) const {
        double p = 0.0, dp = 0.0;
        for (const auto& c : components_) {
            const double f = c.weight * component_pdf(c, theta);
            p += f;
            dp += f * (-(theta - c.mean) / c.variance);
        }
        if (p < kDensityFloor)
            throw std::domain_error("GaussianMixturePrior::score: outside effective support");
        return dp / p;
    }

    double min_sigma() const {
        double s = std::sqrt(components_.front().variance);
        for (const auto& c : components_) s = std::min(s, std::sqrt(c.variance));
        return s;
    }

    /// sum_k p_k / sigma_k^2 (the no-overlap value of the prior Fisher term).
    double sum_weight_over_variance() const {
        double s = 0.0;
        for (const auto& c : components_) s += c.weight / c.variance;
        return s;
    }

    /// Union of the per-component [mean - n_sigmas*sigma, mean + n_sigmas*sigma]
    /// intervals, merged where they overlap and sorted ascending.
    std::vector<Interval> support(double n_sigmas = 8.0) const {
        std::vector<Interval> ivs;
        ivs.reserve(components_.size());
        for (const auto& c : components_) {
            const double s = std::sqrt(c.variance);
            ivs.push_back({c.mean - n_sigmas * s, c.mean + n_sigmas * s});
        }
        std::sort(ivs.begin(), ivs.end(), [](const Interval& a, const Interval& b) {
            return a.lo < b.lo;
        });
        std::vector<Interval> merged;
        merged.push_back(ivs.front());
        for (std::size_t i = 1; i < ivs.size(); ++i) {
            if (ivs[i].lo <= merged.back().hi)
                merged.back().hi = std::max(merged.back().hi, ivs[i].hi);
            else
                merged.push_back(ivs[i]);
        }
        return merged;
    }

    /// Index of a component drawn with probability p_k (inverse CDF).
    template <class URBG>
    int sample_component(URBG& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        const double u = unif(rng);
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < components_.size(); ++k) {
            acc += components_[k].weight;
            if (u <= acc) return static_cast<int>(k);
        }
        return static_cast<int>(components_.size()) - 1;
    }

    /// Draws a component with probability p_k, then a Gaussian within it.
    template <class URBG>
    double sample(URBG& rng) const {
        const auto& c = components_[static_cast<std::size_t>(sample_component(rng))];
        std::normal_distribution<double> normal(c.mean, std::sqrt(c.variance));
        return normal(rng);
    }

private:
    static double component_pdf(const GaussianComponent& c, double theta) {
        const double d = theta - c.mean;
        return std::exp(-0.5 * d * d / c.variance) / std::sqrt(2.0 * kPi * c.variance);
    }

    std::vector<GaussianComponent> components_;
};

/// Controls the composite-Simpson rule used for prior-weighted scalar
/// integrals: step <= min_sigma / step_divisor over the merged +-support_sigmas
/// support, with one halving pass for the error estimate.
struct QuadratureSpec {
    double step_divisor = 20.0;
    double support_sigmas = 8.0;
    double rel_tolerance = 1e-6;
};

struct PriorFisherResult {
    double value = 0.0;                ///< E[(d ln p / dtheta)^2]
    double rho = 0.0;                  ///< mixture-overlap deficit; value + rho = sum p_k/sigma_k^2
    double quad_error_estimate = 0.0;  ///< relative change under step halving
};

namespace detail {

struct FisherIntegrals {
    double value;
    double rho;
};

// Both integrands share the per-component densities; evaluating them together
// keeps the decomposition identity value + rho = sum p_k/sigma_k^2 a pure
// statement about quadrature accuracy.
inline FisherIntegrals fisher_integrals(const GaussianMixturePrior& prior, double step) {
    const auto& comps = prior.components();
    const std::size_t K = comps.size();
    std::vector<double> f(K), s(K);

    auto evaluate = [&](double theta, double& score_sq_pdf, double& rho_integrand) {
        double p = 0.0, dp = 0.0;
        for (std::size_t k = 0; k < K; ++k) {
            const double d = theta - comps[k].mean;
            f[k] = comps[k].weight *
                   std::exp(-0.5 * d * d / comps[k].variance) /
                   std::sqrt(2.0 * kPi * comps[k].variance);
            s[k] = -d / comps[k].variance;
            p += f[k];
            dp += f[k] * s[k];
        }
        if (p < kDensityFloor) {
            score_sq_pdf = 0.0;
            rho_integrand = 0.0;
            return;
        }
        score_sq_pdf = dp * dp / p;
        double second_moment = 0.0;
        for (std::size_t k = 0; k < K; ++k) second_moment += f[k] * s[k] * s[k];
        // sum_{k1,k2} f_k1 f_k2 (s_k1 - s_k2)^2 / (2p) == sum f_k s_k^2 - (sum f_k s_k)^2/p
        rho_integrand = second_moment - score_sq_pdf;
    };

    FisherIntegrals out{0.0, 0.0};
    out.value = simpson_over(prior.support(), step, [&](double theta) {
        double a, b;
        evaluate(theta, a, b);
        return a;
    });
    out.rho = simpson_over(prior.support(), step, [&](double theta) {
        double a, b;
        evaluate(theta, a, b);
        return b;
    });
    return out;
}

}  // namespace detail

/// Prior Fisher information E[(d ln p/dtheta)^2] together with the overlap
/// deficit rho, both by composite Simpson over the effective support. The
/// returned values come from the halved-step pass; the coarse pass only feeds
/// the error estimate.
inline PriorFisherResult prior_fisher(const GaussianMixturePrior& prior,
                                      const QuadratureSpec& quad = {}) {
    const double step = prior.min_sigma() / quad.step_divisor;
    const detail::FisherIntegrals coarse = detail::fisher_integrals(prior, step);
    const detail::FisherIntegrals fine = detail::fisher_integrals(prior, 0.5 * step);

    PriorFisherResult r;
    r.value = fine.value;
    r.rho = fine.rho;
    const double scale = std::max(std::abs(fine.value) + std::abs(fine.rho), 1e-30);
    r.quad_error_estimate =
        (std::abs(fine.value - coarse.value) + std::abs(fine.rho - coarse.rho)) / scale;
    if (r.quad_error_estimate > quad.rel_tolerance)
        throw std::runtime_error("prior_fisher: quadrature failed to converge");
    return r;
}

}  // namespace pcrb
