#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "pcrb/config.hpp"
#include "pcrb/fim.hpp"
#include "pcrb/optimizer.hpp"
#include "pcrb/random.hpp"
#include "pcrb/sim.hpp"
#include "pcrb/table.hpp"
#include "pcrb/version.hpp"

namespace pcrb {

namespace detail {

inline void stamp_metadata(ResultTable& t, const ExperimentConfig& c) {
    char hash[32];
    std::snprintf(hash, sizeof(hash), "%016llx",
                  static_cast<unsigned long long>(config_hash(c)));
    t.add_metadata("version", kVersion);
    t.add_metadata("config_hash", hash);
    t.add_metadata("seed", std::to_string(c.seed));
    t.add_metadata("config", config_to_json(c).dump());
}

/// |alpha| that realizes a given overall receive SNR P|alpha|^2 L / sigma^2.
inline double gain_for_snr(double snr_db, const RunConfig& run, double noise_power_w) {
    const double snr = db_to_linear(snr_db);
    return std::sqrt(snr * noise_power_w / (run.power_w * run.num_samples));
}

inline double pattern_dbm(const TransmitDesign& d, double theta, const ArrayConfig& cfg,
                          double path_gain) {
    const ComplexVector a = steering_tx(theta, cfg);
    const double w = path_gain * (a.adjoint() * d.covariance * a)(0).real();
    return watts_to_dbm(std::max(w, 1e-300));
}

}  // namespace detail

/// Radiated power pattern of the three designs over an angle grid, together
/// with the prior density. One row per angle.
inline ResultTable run_power_pattern(const ExperimentConfig& config) {
    config.validate();
    const GaussianMixturePrior prior = config.prior();
    const SceneConfig scene = config.scene();
    const RunConfig run = config.run();
    const SpectralMoments moments = compute_moments(prior, config.array);

    const TransmitDesign proposed = optimal_design(moments, run);
    const TransmitDesign heuristic = benchmark_heuristic(config.array, run);
    const TransmitDesign peak = benchmark_peak_angle(prior, config.array, run);

    ResultTable t({"theta_rad", "prior_pdf", "proposed_dbm", "heuristic_dbm", "peak_angle_dbm"});
    detail::stamp_metadata(t, config);
    t.add_metadata("theta_max", ResultTable::format_cell(prior_mode(prior)));

    const auto& spec = config.power_pattern;
    for (int i = 0; i < spec.angle_count; ++i) {
        const double theta = spec.angle_start + (spec.angle_stop - spec.angle_start) *
                                                    i / (spec.angle_count - 1);
        t.add_row({theta, prior.pdf(theta),
                   detail::pattern_dbm(proposed, theta, config.array, scene.path_gain()),
                   detail::pattern_dbm(heuristic, theta, config.array, scene.path_gain()),
                   detail::pattern_dbm(peak, theta, config.array, scene.path_gain())});
    }
    return t;
}

/// Exact posterior bound for the three designs, plus the upper bound and the
/// prior-averaged deterministic bound for the proposed design, over the SNR
/// sweep. The sweep varies |alpha|^2 with power, samples and noise fixed.
inline ResultTable run_pcrb_vs_snr(const ExperimentConfig& config) {
    config.validate();
    const GaussianMixturePrior prior = config.prior();
    const SceneConfig base_scene = config.scene();
    const RunConfig run = config.run();
    const SpectralMoments moments = compute_moments(prior, config.array);
    const double fp11 = prior_fisher(prior).value;

    const TransmitDesign proposed = optimal_design(moments, run);
    const TransmitDesign heuristic = benchmark_heuristic(config.array, run);
    const TransmitDesign peak = benchmark_peak_angle(prior, config.array, run);

    std::vector<double> sweep = config.pcrb_vs_snr.snr_db;
    std::sort(sweep.begin(), sweep.end());

    ResultTable t({"snr_db", "pcrb_proposed", "pcrb_heuristic", "pcrb_peak_angle",
                   "pcrb_upper_proposed", "crb_average_proposed"});
    detail::stamp_metadata(t, config);
    t.add_metadata("theta_max", ResultTable::format_cell(prior_mode(prior)));

    for (double snr_db : sweep) {
        const SceneConfig scene = base_scene.with_gain_magnitude(
            detail::gain_for_snr(snr_db, run, base_scene.noise_power_w));
        auto exact = [&](const TransmitDesign& d) {
            return pcrb_exact(fim_observation(moments, d.covariance, scene, run, fp11));
        };
        t.add_row({snr_db, exact(proposed), exact(heuristic), exact(peak),
                   pcrb_upper(moments, proposed.covariance, scene, run, fp11),
                   crb_average(prior, proposed.covariance, scene, run, config.array)});
    }
    return t;
}

/// Monte Carlo MSE of the MAP estimator against the exact posterior bound,
/// per design and SNR point. Deterministic for a fixed seed.
inline ResultTable run_mse_validation(const ExperimentConfig& config, int threads = 1) {
    config.validate();
    const GaussianMixturePrior prior = config.prior();
    const SceneConfig base_scene = config.scene();
    const RunConfig run = config.run();
    const SpectralMoments moments = compute_moments(prior, config.array);
    const double fp11 = prior_fisher(prior).value;

    const TransmitDesign designs[3] = {optimal_design(moments, run),
                                       benchmark_heuristic(config.array, run),
                                       benchmark_peak_angle(prior, config.array, run)};
    const char* names[3] = {"proposed", "heuristic", "peak_angle"};

    std::vector<std::string> columns = {"snr_db"};
    for (const char* n : names) {
        columns.push_back(std::string("mse_") + n);
        columns.push_back(std::string("std_err_") + n);
        columns.push_back(std::string("pcrb_") + n);
        columns.push_back(std::string("ratio_") + n);
    }
    ResultTable t(columns);
    detail::stamp_metadata(t, config);
    t.add_metadata("trials", std::to_string(config.mse_validation.trials));

    std::vector<double> sweep = config.mse_validation.snr_db;
    std::sort(sweep.begin(), sweep.end());

    for (std::size_t si = 0; si < sweep.size(); ++si) {
        const SceneConfig scene = base_scene.with_gain_magnitude(
            detail::gain_for_snr(sweep[si], run, base_scene.noise_power_w));
        std::vector<double> row = {sweep[si]};
        for (int di = 0; di < 3; ++di) {
            const std::uint64_t master =
                derive_seed(config.seed, 1000 * static_cast<std::uint64_t>(si) +
                                             static_cast<std::uint64_t>(di));
            const MseResult mse =
                empirical_mse(designs[di], prior, scene, config.array, run,
                              config.mse_validation.trials, master, GridSpec{}, threads);
            const double bound =
                pcrb_exact(fim_observation(moments, designs[di].covariance, scene, run, fp11));
            row.insert(row.end(), {mse.mse, mse.std_err, bound, mse.mse / bound});
        }
        t.add_row(row);
    }
    return t;
}

/// One property check: `trials` trials, count of failures, and the largest
/// violation magnitude seen (0 when every trial satisfied the property).
struct PropertyOutcome {
    std::string name;
    int trials = 0;
    int failures = 0;
    double max_violation = 0.0;
};

namespace detail {

inline void record(PropertyOutcome& p, double violation) {
    if (violation > 0.0) ++p.failures;
    p.max_violation = std::max(p.max_violation, violation);
}

}  // namespace detail

/// Randomized checks of the analytic properties the bounds rely on. Any
/// failure is a defect in the library (or a false analytic claim).
inline std::vector<PropertyOutcome> property_suite(const ExperimentConfig& config) {
    config.validate();
    const GaussianMixturePrior prior = config.prior();
    const SceneConfig scene = config.scene();
    const RunConfig run = config.run();
    const ArrayConfig& cfg = config.array;
    const SpectralMoments moments = compute_moments(prior, cfg);
    const double fp11 = prior_fisher(prior).value;
    const auto& spec = config.property_suite;

    std::vector<PropertyOutcome> out;

    {
        // average deterministic bound >= upper bound >= exact bound
        PropertyOutcome p{"bound-chain", spec.chain_trials, 0, 0.0};
        std::mt19937_64 rng(derive_seed(config.seed, 101));
        for (int t = 0; t < spec.chain_trials; ++t) {
            const ComplexMatrix r = random_feasible_covariance(cfg.n_tx, run.power_w, rng);
            const double pe = pcrb_exact(fim_observation(moments, r, scene, run, fp11));
            const double pu = pcrb_upper(moments, r, scene, run, fp11);
            const double ca = crb_average(prior, r, scene, run, cfg);
            detail::record(p, (pe - pu) / pe - 1e-9);
            if (!std::isinf(ca)) detail::record(p, (pu - ca) / pu - 1e-9);
        }
        p.max_violation = std::max(p.max_violation, 0.0);
        out.push_back(p);
    }
    {
        // tr(A2 R) tr(A4 R) >= |tr(A3 R)|^2 for PSD R
        PropertyOutcome p{"moment-product-inequality", spec.gap_trials, 0, 0.0};
        std::mt19937_64 rng(derive_seed(config.seed, 102));
        for (int t = 0; t < spec.gap_trials; ++t) {
            const ComplexMatrix r = random_feasible_covariance(cfg.n_tx, run.power_w, rng);
            const double gap = moment_inequality_gap(moments, r);
            const double scale = trace_product(moments.a2, r).real() *
                                 trace_product(moments.a4, r).real();
            detail::record(p, -gap / std::max(scale, 1e-300) - 1e-9);
        }
        p.max_violation = std::max(p.max_violation, 0.0);
        out.push_back(p);
    }
    {
        // the closed-form design dominates random feasible covariances
        PropertyOutcome p{"rank-one-dominance", spec.dominance_trials, 0, 0.0};
        std::mt19937_64 rng(derive_seed(config.seed, 103));
        const TransmitDesign star = optimal_design(moments, run);
        const double best = trace_product(moments.a1, star.covariance).real();
        for (int t = 0; t < spec.dominance_trials; ++t) {
            const ComplexMatrix r = random_feasible_covariance(cfg.n_tx, run.power_w, rng);
            const double val = trace_product(moments.a1, r).real();
            detail::record(p, (val - best) / best - 1e-9);
        }
        p.max_violation = std::max(p.max_violation, 0.0);
        out.push_back(p);
    }
    {
        // scalar Schur formula agrees with direct 3x3 inversion
        PropertyOutcome p{"schur-vs-inversion", spec.schur_trials, 0, 0.0};
        std::mt19937_64 rng(derive_seed(config.seed, 104));
        for (int t = 0; t < spec.schur_trials; ++t) {
            const ComplexMatrix r = random_feasible_covariance(cfg.n_tx, run.power_w, rng);
            const FimBlocks blocks = fim_observation(moments, r, scene, run, fp11);
            const double direct = blocks.assemble().inverse()(0, 0);
            const double schur = pcrb_exact(blocks);
            detail::record(p, std::abs(schur - direct) / schur - 1e-10);
        }
        p.max_violation = std::max(p.max_violation, 0.0);
        out.push_back(p);
    }
    {
        // prior Fisher decomposition: value + rho = sum p_k / sigma_k^2
        PropertyOutcome p{"fisher-decomposition", spec.fisher_trials, 0, 0.0};
        std::mt19937_64 rng(derive_seed(config.seed, 105));
        for (int t = 0; t < spec.fisher_trials; ++t) {
            const GaussianMixturePrior mix = random_mixture_prior(rng);
            const PriorFisherResult f = prior_fisher(mix);
            const double total = mix.sum_weight_over_variance();
            detail::record(p, std::abs(f.value + f.rho - total) / total - 1e-6);
            detail::record(p, -f.value / total - 1e-12);        // value >= 0
            detail::record(p, (f.value - total) / total - 1e-9);  // value <= total
        }
        p.max_violation = std::max(p.max_violation, 0.0);
        out.push_back(p);
    }
    return out;
}

/// Property suite as a result table: property_id, trials, failures,
/// max_violation, with the id->name map in the metadata.
inline ResultTable run_property_suite(const ExperimentConfig& config) {
    const std::vector<PropertyOutcome> outcomes = property_suite(config);
    ResultTable t({"property_id", "trials", "failures", "max_violation"});
    detail::stamp_metadata(t, config);
    for (std::size_t i = 0; i < outcomes.size(); ++i)
        t.add_metadata("property_" + std::to_string(i), outcomes[i].name);
    for (std::size_t i = 0; i < outcomes.size(); ++i)
        t.add_row({static_cast<double>(i), static_cast<double>(outcomes[i].trials),
                   static_cast<double>(outcomes[i].failures),
                   std::max(outcomes[i].max_violation, 0.0)});
    return t;
}

}  // namespace pcrb
