#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "pcrb/fim.hpp"
#include "pcrb/optimizer.hpp"
#include "pcrb/random.hpp"

namespace pcrb {

/// Received samples from one probing burst, with the ground truth attached.
struct Observation {
    ComplexMatrix y;  ///< N_r x L
    double theta_true = 0.0;
    Complex alpha_true{0.0, 0.0};
};

struct EstimateResult {
    double theta_hat = 0.0;
    Complex alpha_hat{0.0, 0.0};
    double log_posterior = 0.0;
};

/// Angle search grid for the estimator: the union of per-component intervals
/// [mean - sigmas*sigma, mean + sigmas*sigma] with `points_per_component`
/// samples each.
struct GridSpec {
    double sigmas = 6.0;
    int points_per_component = 400;
    double refine_tol = 1e-10;  ///< golden-section bracket width, radians
};

/// Y = G(theta) X + N with independent per-entry CSCG noise of variance
/// sigma^2. A zero noise power yields the exact noiseless signal.
template <class URBG>
Observation generate(const TransmitDesign& design, double theta_true, const SceneConfig& scene,
                     const ArrayConfig& cfg, const RunConfig& run, URBG& rng) {
    scene.validate();
    cfg.validate();
    run.validate();
    Observation obs;
    obs.theta_true = theta_true;
    obs.alpha_true = scene.reflection_gain;
    obs.y = channel(theta_true, scene, cfg) * design.waveform +
            cscg_matrix(cfg.n_rx, run.num_samples, scene.noise_power_w, rng);
    return obs;
}

namespace detail {

struct MapWorkspace {
    std::vector<double> grid;
    std::vector<double> cell_lo;
    std::vector<double> cell_hi;
};

inline MapWorkspace build_grid(const GaussianMixturePrior& prior, const GridSpec& spec) {
    MapWorkspace ws;
    for (const auto& c : prior.components()) {
        const double s = std::sqrt(c.variance);
        const double lo = c.mean - spec.sigmas * s;
        const double hi = c.mean + spec.sigmas * s;
        const int n = std::max(spec.points_per_component, 2);
        const double h = (hi - lo) / (n - 1);
        for (int i = 0; i < n; ++i) {
            const double theta = lo + i * h;
            ws.grid.push_back(theta);
            ws.cell_lo.push_back(std::max(lo, theta - h));
            ws.cell_hi.push_back(std::min(hi, theta + h));
        }
    }
    return ws;
}

}  // namespace detail

/// Grid-plus-refinement MAP estimate of the angle, profiling the reflection
/// gain out in closed form at every candidate:
///   alpha_hat(theta) = b^H Y X^H a / (N_r a^H X X^H a).
/// Grid points toward which the design radiates no power are skipped; if the
/// whole grid is skipped the design cannot see the prior support at all.
inline EstimateResult map_estimate(const Observation& obs, const TransmitDesign& design,
                                   const GaussianMixturePrior& prior, double noise_power_w,
                                   const ArrayConfig& cfg, const GridSpec& grid_spec = {}) {
    cfg.validate();
    if (!(noise_power_w > 0.0))
        throw std::invalid_argument("map_estimate: noise power must be positive");
    if (obs.y.rows() != cfg.n_rx || obs.y.cols() != design.waveform.cols())
        throw std::invalid_argument("map_estimate: observation dimensions mismatch");

    const ComplexMatrix yxh = obs.y * design.waveform.adjoint();       // N_r x N_t
    const ComplexMatrix xxh = design.waveform * design.waveform.adjoint();  // N_t x N_t
    const double power_scale = xxh.trace().real();
    const double n_r = static_cast<double>(cfg.n_rx);

    // Profiled log-posterior up to theta-independent terms:
    // |b^H Y X^H a|^2 / (N_r a^H X X^H a sigma^2) + ln p(theta).
    auto objective = [&](double theta, double& denom_out) {
        const ComplexVector a = steering_tx(theta, cfg);
        const ComplexVector b = steering_rx(theta, cfg);
        const double denom = (a.adjoint() * xxh * a)(0).real();
        denom_out = denom;
        if (denom <= 1e-14 * power_scale) return -std::numeric_limits<double>::infinity();
        const Complex num = (b.adjoint() * yxh * a)(0);
        return std::norm(num) / (n_r * denom * noise_power_w) + prior.log_pdf(theta);
    };

    const detail::MapWorkspace ws = detail::build_grid(prior, grid_spec);
    double best_obj = -std::numeric_limits<double>::infinity();
    std::size_t best_i = 0;
    bool any = false;
    for (std::size_t i = 0; i < ws.grid.size(); ++i) {
        double denom;
        const double obj = objective(ws.grid[i], denom);
        if (denom <= 1e-14 * power_scale) continue;
        any = true;
        if (obj > best_obj) {
            best_obj = obj;
            best_i = i;
        }
    }
    if (!any)
        throw std::runtime_error("map_estimate: design has no coverage of prior support");

    // golden-section ascent on the best cell
    double lo = ws.cell_lo[best_i], hi = ws.cell_hi[best_i];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    auto value = [&](double theta) {
        double denom;
        return objective(theta, denom);
    };
    double x1 = hi - invphi * (hi - lo), x2 = lo + invphi * (hi - lo);
    double f1 = value(x1), f2 = value(x2);
    while (hi - lo > grid_spec.refine_tol) {
        if (f1 > f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - invphi * (hi - lo);
            f1 = value(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + invphi * (hi - lo);
            f2 = value(x2);
        }
    }

    EstimateResult est;
    est.theta_hat = 0.5 * (lo + hi);
    const ComplexVector a = steering_tx(est.theta_hat, cfg);
    const ComplexVector b = steering_rx(est.theta_hat, cfg);
    const double denom = (a.adjoint() * xxh * a)(0).real();
    est.alpha_hat = (b.adjoint() * yxh * a)(0) / (n_r * denom);
    est.log_posterior = value(est.theta_hat);
    return est;
}

struct MseResult {
    double mse = 0.0;      ///< mean squared angle error, radians^2
    double std_err = 0.0;  ///< jackknife standard error of the mean
};

/// Monte Carlo mean squared error of the MAP estimator: draw theta from the
/// prior, simulate, estimate, average. Trials use independent streams
/// derive_seed(master_seed, trial), so results do not depend on `threads`.
inline MseResult empirical_mse(const TransmitDesign& design, const GaussianMixturePrior& prior,
                               const SceneConfig& scene, const ArrayConfig& cfg,
                               const RunConfig& run, int n_trials, std::uint64_t master_seed,
                               const GridSpec& grid_spec = {}, int threads = 1) {
    if (n_trials < 100) throw std::invalid_argument("empirical_mse: need n_trials >= 100");
    std::vector<double> sq_err(static_cast<std::size_t>(n_trials));

    auto run_range = [&](int begin, int end) {
        for (int t = begin; t < end; ++t) {
            std::mt19937_64 rng(derive_seed(master_seed, static_cast<std::uint64_t>(t)));
            const double theta = prior.sample(rng);
            const Observation obs = generate(design, theta, scene, cfg, run, rng);
            const EstimateResult est =
                map_estimate(obs, design, prior, scene.noise_power_w, cfg, grid_spec);
            const double d = est.theta_hat - theta;
            sq_err[static_cast<std::size_t>(t)] = d * d;
        }
    };

    if (threads <= 1) {
        run_range(0, n_trials);
    } else {
        std::vector<std::thread> pool;
        const int chunk = (n_trials + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            const int begin = w * chunk;
            const int end = std::min(n_trials, begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    MseResult r;
    double sum = 0.0;
    for (double e : sq_err) sum += e;
    const double n = static_cast<double>(n_trials);
    r.mse = sum / n;
    // jackknife over leave-one-out means; for the mean statistic this equals
    // the usual s/sqrt(n)
    double ss = 0.0;
    for (double e : sq_err) {
        const double loo = (sum - e) / (n - 1.0);
        ss += (loo - r.mse) * (loo - r.mse);
    }
    r.std_err = std::sqrt((n - 1.0) / n * ss);
    return r;
}

}  // namespace pcrb
