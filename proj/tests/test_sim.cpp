#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pcrb/sim.hpp"

using namespace pcrb;
using Catch::Approx;

namespace {

const ArrayConfig kArray{10, 12, 0.5};
const RunConfig kRun{25, 1.0};

const GaussianMixturePrior& default_prior() {
    static const GaussianMixturePrior p({{0.15, 0.52, 1e-4},
                                         {0.32, 0.82, 1e-4},
                                         {0.17, 0.87, 1e-3},
                                         {0.20, 2.60, 1e-3},
                                         {0.16, 2.70, 1e-4}});
    return p;
}

const SpectralMoments& default_moments() {
    static const SpectralMoments m = compute_moments(default_prior(), kArray);
    return m;
}

// all components on one side of broadside, so no two in-support angles share
// a steering vector and the estimator faces no ambiguity
const GaussianMixturePrior& one_sided_prior() {
    static const GaussianMixturePrior p({{0.6, 0.82, 1e-4}, {0.4, 1.05, 4e-4}});
    return p;
}

SceneConfig scene_with_snr(double snr_db, double noise_power_w = 1e-15) {
    const double snr = std::pow(10.0, snr_db / 10.0);
    const double gain = std::sqrt(snr * noise_power_w / (kRun.power_w * kRun.num_samples));
    return SceneConfig::from_gain(Complex{gain, 0.0}, noise_power_w);
}

}  // namespace

TEST_CASE("noiseless generation reproduces the channel exactly") {
    const TransmitDesign d = benchmark_peak_angle(default_prior(), kArray, kRun);
    SceneConfig scene = SceneConfig::from_gain(Complex{0.3, -0.4}, 0.0);
    std::mt19937_64 rng(113);
    const Observation obs = generate(d, 0.82, scene, kArray, kRun, rng);
    const ComplexMatrix expect = channel(0.82, scene, kArray) * d.waveform;
    REQUIRE((ComplexMatrix(obs.y - expect)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noise calibration: per-entry variance matches the configured power") {
    TransmitDesign silent;
    silent.covariance = ComplexMatrix::Zero(10, 10);
    silent.waveform = ComplexMatrix::Zero(10, kRun.num_samples);
    silent.label = "silent";
    const double sigma2 = 2.5;
    const SceneConfig scene = SceneConfig::from_gain(Complex{1.0, 0.0}, sigma2);
    std::mt19937_64 rng(127);
    double acc = 0.0;
    long entries = 0;
    for (int t = 0; t < 400; ++t) {
        const Observation obs = generate(silent, 0.82, scene, kArray, kRun, rng);
        acc += obs.y.squaredNorm();
        entries += obs.y.size();
    }
    REQUIRE(acc / entries == Approx(sigma2).epsilon(0.02));
}

TEST_CASE("received power splits into signal and noise energy") {
    const TransmitDesign d = benchmark_peak_angle(default_prior(), kArray, kRun);
    const double sigma2 = 0.7;
    const SceneConfig scene = SceneConfig::from_gain(Complex{0.8, 0.6}, sigma2);
    const double theta = 0.85;
    const double signal =
        (channel(theta, scene, kArray) * d.waveform).squaredNorm();
    std::mt19937_64 rng(131);
    const int trials = 10000;
    double acc = 0.0;
    std::vector<double> samples(trials);
    for (int t = 0; t < trials; ++t) {
        const Observation obs = generate(d, theta, scene, kArray, kRun, rng);
        samples[t] = obs.y.squaredNorm();
        acc += samples[t];
    }
    const double mean = acc / trials;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    const double se = std::sqrt(var / (trials - 1) / trials);
    const double expect = signal + kArray.n_rx * kRun.num_samples * sigma2;
    REQUIRE(mean == Approx(expect).margin(5.0 * se));
}

TEST_CASE("noiseless map estimate recovers angle and gain") {
    const TransmitDesign star = optimal_design(default_moments(), kRun);
    const Complex alpha{0.01, 0.004};
    SceneConfig scene = SceneConfig::from_gain(alpha, 0.0);
    std::mt19937_64 rng(137);
    const double theta_true = 0.82;
    const Observation obs = generate(star, theta_true, scene, kArray, kRun, rng);
    // estimator still needs a positive noise level for its likelihood weight
    const EstimateResult est = map_estimate(obs, star, default_prior(), 1e-20, kArray);
    REQUIRE(est.theta_hat == Approx(theta_true).margin(1e-5));
    REQUIRE(std::abs(est.alpha_hat - alpha) <= 1e-8 * std::abs(alpha));
}

TEST_CASE("map estimate stays on the searched grid") {
    // the estimator can only answer within the grid it was given: restrict the
    // search to one component while the truth sits in another
    const TransmitDesign heuristic = benchmark_heuristic(kArray, kRun);
    const GaussianMixturePrior narrow({{1.0, 2.6, 1e-4}});
    SceneConfig scene = scene_with_snr(20.0);
    std::mt19937_64 rng(139);
    const Observation obs = generate(heuristic, 0.82, scene, kArray, kRun, rng);
    const EstimateResult est =
        map_estimate(obs, heuristic, narrow, scene.noise_power_w, kArray);
    REQUIRE(est.theta_hat >= 2.6 - 6.0 * 0.01);
    REQUIRE(est.theta_hat <= 2.6 + 6.0 * 0.01);
}

TEST_CASE("map estimate rejects designs that cannot see the prior") {
    TransmitDesign silent;
    silent.covariance = ComplexMatrix::Zero(10, 10);
    silent.waveform = ComplexMatrix::Zero(10, kRun.num_samples);
    std::mt19937_64 rng(149);
    SceneConfig scene = scene_with_snr(10.0);
    const Observation obs = generate(silent, 0.82, scene, kArray, kRun, rng);
    REQUIRE_THROWS_AS(map_estimate(obs, silent, default_prior(), scene.noise_power_w, kArray),
                      std::runtime_error);
}

TEST_CASE("mse respects the posterior bound at high snr") {
    const SpectralMoments m = compute_moments(one_sided_prior(), kArray);
    const double fp11 = prior_fisher(one_sided_prior()).value;
    const TransmitDesign star = optimal_design(m, kRun);
    const SceneConfig scene = scene_with_snr(15.0);
    const MseResult r =
        empirical_mse(star, one_sided_prior(), scene, kArray, kRun, 400, 2024);
    const double bound =
        pcrb_exact(fim_observation(m, star.covariance, scene, kRun, fp11));
    REQUIRE(r.mse >= bound - 3.0 * r.std_err);
}

TEST_CASE("map estimation is nearly efficient at high snr without ambiguity") {
    const SpectralMoments m = compute_moments(one_sided_prior(), kArray);
    const double fp11 = prior_fisher(one_sided_prior()).value;
    const TransmitDesign star = optimal_design(m, kRun);
    const SceneConfig scene = scene_with_snr(30.0);
    const MseResult r =
        empirical_mse(star, one_sided_prior(), scene, kArray, kRun, 1000, 4242);
    const double bound =
        pcrb_exact(fim_observation(m, star.covariance, scene, kRun, fp11));
    REQUIRE(r.mse >= bound - 3.0 * r.std_err);
    REQUIRE(r.mse / bound <= 3.0);
}

TEST_CASE("vanishing noise drives the mse to the refinement floor") {
    const SpectralMoments m = compute_moments(one_sided_prior(), kArray);
    const TransmitDesign star = optimal_design(m, kRun);
    const SceneConfig scene = scene_with_snr(140.0);
    const MseResult r =
        empirical_mse(star, one_sided_prior(), scene, kArray, kRun, 100, 99);
    REQUIRE(r.mse <= 1e-10);
}

TEST_CASE("trial streams are reproducible and thread-count independent") {
    const TransmitDesign star = optimal_design(default_moments(), kRun);
    const SceneConfig scene = scene_with_snr(2.0);
    const MseResult serial =
        empirical_mse(star, default_prior(), scene, kArray, kRun, 120, 7, GridSpec{}, 1);
    const MseResult threaded =
        empirical_mse(star, default_prior(), scene, kArray, kRun, 120, 7, GridSpec{}, 4);
    REQUIRE(serial.mse == threaded.mse);
    REQUIRE(serial.std_err == threaded.std_err);
    const MseResult repeat =
        empirical_mse(star, default_prior(), scene, kArray, kRun, 120, 7, GridSpec{}, 2);
    REQUIRE(repeat.mse == serial.mse);
}

TEST_CASE("too few trials are rejected") {
    const TransmitDesign star = optimal_design(default_moments(), kRun);
    REQUIRE_THROWS_AS(empirical_mse(star, default_prior(), scene_with_snr(0.0), kArray, kRun,
                                    50, 1),
                      std::invalid_argument);
}
