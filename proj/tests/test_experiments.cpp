#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "pcrb/experiments.hpp"

using namespace pcrb;
using Catch::Approx;

namespace {

std::size_t column_index(const ResultTable& t, const std::string& name) {
    for (std::size_t i = 0; i < t.columns().size(); ++i)
        if (t.columns()[i] == name) return i;
    FAIL("missing column " + name);
    return 0;
}

std::string csv_of(const ResultTable& t) {
    std::ostringstream os;
    t.write_csv(os);
    return os.str();
}

}  // namespace

TEST_CASE("power pattern: heuristic design radiates uniformly over angle") {
    ExperimentConfig c = default_config();
    c.experiment = ExperimentKind::PowerPattern;
    c.power_pattern = {0.0, kPi, 301};
    const ResultTable t = run_power_pattern(c);
    REQUIRE(t.rows().size() == 301);
    const std::size_t heu = column_index(t, "heuristic_dbm");
    // diag(P, 0, ..., 0) gives a^H R a = P at every angle: path gain -20 dB
    // on 30 dBm leaves a flat 10 dBm line
    for (const auto& row : t.rows()) REQUIRE(row[heu] == Approx(10.0).margin(1e-9));
}

TEST_CASE("power pattern: the mode beam peaks at the coherent gain") {
    ExperimentConfig c = default_config();
    c.experiment = ExperimentKind::PowerPattern;
    const GaussianMixturePrior prior = c.prior();
    const double mode = prior_mode(prior);
    c.power_pattern = {mode, mode + 1e-4, 2};  // evaluate right at the mode
    const ResultTable t = run_power_pattern(c);
    const std::size_t peak = column_index(t, "peak_angle_dbm");
    // (P/N_t) |a^H a|^2 = P N_t, scaled by the -20 dB path gain: 20 dBm
    REQUIRE(t.rows()[0][peak] == Approx(watts_to_dbm(0.01 * 1.0 * 10.0)).margin(1e-6));
}

TEST_CASE("power pattern: proposed design dominates the heuristic on the prior means") {
    for (double mean : {0.52, 0.82, 0.87, 2.60, 2.70}) {
        ExperimentConfig probe = default_config();
        probe.experiment = ExperimentKind::PowerPattern;
        probe.power_pattern = {mean, mean + 1e-6, 2};
        const ResultTable row = run_power_pattern(probe);
        const std::size_t prop = column_index(row, "proposed_dbm");
        const std::size_t heu = column_index(row, "heuristic_dbm");
        REQUIRE(row.rows()[0][prop] >= row.rows()[0][heu]);
    }
}

TEST_CASE("power pattern rows are sorted by angle and never nan") {
    ExperimentConfig c = default_config();
    c.experiment = ExperimentKind::PowerPattern;
    c.power_pattern = {0.3, 2.9, 101};
    const ResultTable t = run_power_pattern(c);
    for (std::size_t i = 1; i < t.rows().size(); ++i)
        REQUIRE(t.rows()[i][0] > t.rows()[i - 1][0]);
}

TEST_CASE("snr sweep: proposed design stays below both benchmarks") {
    ExperimentConfig c = default_config();
    const ResultTable t = run_pcrb_vs_snr(c);
    REQUIRE(t.rows().size() == c.pcrb_vs_snr.snr_db.size());
    const std::size_t prop = column_index(t, "pcrb_proposed");
    const std::size_t heu = column_index(t, "pcrb_heuristic");
    const std::size_t peak = column_index(t, "pcrb_peak_angle");
    const std::size_t upper = column_index(t, "pcrb_upper_proposed");
    const std::size_t avg = column_index(t, "crb_average_proposed");
    for (const auto& row : t.rows()) {
        REQUIRE(row[prop] < row[heu]);
        REQUIRE(row[prop] < row[peak]);
        REQUIRE(row[upper] / row[prop] <= 1.1);
        REQUIRE(row[upper] >= row[prop] * (1.0 - 1e-9));
        REQUIRE(row[avg] >= row[upper] * (1.0 - 1e-9));
    }
}

TEST_CASE("snr sweep approaches the prior-only bound at vanishing snr") {
    ExperimentConfig c = default_config();
    c.pcrb_vs_snr.snr_db = {-80.0};
    const ResultTable t = run_pcrb_vs_snr(c);
    const double fp11 = prior_fisher(c.prior()).value;
    for (std::size_t col = 1; col <= 3; ++col)
        REQUIRE(t.rows()[0][col] == Approx(1.0 / fp11).epsilon(1e-6));
}

TEST_CASE("snr sweep rows come out sorted even from an unsorted config") {
    ExperimentConfig c = default_config();
    c.pcrb_vs_snr.snr_db = {2.0, -10.0, -4.0};
    const ResultTable t = run_pcrb_vs_snr(c);
    REQUIRE(t.rows()[0][0] == -10.0);
    REQUIRE(t.rows()[1][0] == -4.0);
    REQUIRE(t.rows()[2][0] == 2.0);
}

TEST_CASE("mse validation is deterministic and respects the bound") {
    ExperimentConfig c = default_config();
    c.experiment = ExperimentKind::MseValidation;
    c.mse_validation.snr_db = {2.0};
    c.mse_validation.trials = 150;
    c.seed = 31337;
    const ResultTable once = run_mse_validation(c, 2);
    const ResultTable twice = run_mse_validation(c, 1);
    REQUIRE(csv_of(once) == csv_of(twice));  // byte-identical under a fixed seed

    for (const char* design : {"proposed", "heuristic", "peak_angle"}) {
        const double mse = once.rows()[0][column_index(once, std::string("mse_") + design)];
        const double se =
            once.rows()[0][column_index(once, std::string("std_err_") + design)];
        const double bound =
            once.rows()[0][column_index(once, std::string("pcrb_") + design)];
        REQUIRE(mse >= bound - 3.0 * se);
    }
}

TEST_CASE("mse validation reacts to the seed") {
    ExperimentConfig c = default_config();
    c.experiment = ExperimentKind::MseValidation;
    c.mse_validation.snr_db = {2.0};
    c.mse_validation.trials = 120;
    c.seed = 1;
    const ResultTable a = run_mse_validation(c);
    c.seed = 2;
    const ResultTable b = run_mse_validation(c);
    REQUIRE(csv_of(a) != csv_of(b));
}

TEST_CASE("property suite passes on the stock configuration") {
    ExperimentConfig c = default_config();
    c.experiment = ExperimentKind::PropertySuite;
    // trimmed counts keep the unit suite fast; the acceptance binary runs the
    // full counts
    c.property_suite = {50, 500, 500, 50, 20};
    const ResultTable t = run_property_suite(c);
    REQUIRE(t.rows().size() == 5);
    const std::size_t fails = column_index(t, "failures");
    for (const auto& row : t.rows()) REQUIRE(row[fails] == 0.0);
}

TEST_CASE("experiment tables carry reproducibility metadata") {
    ExperimentConfig c = default_config();
    const ResultTable t = run_pcrb_vs_snr(c);
    bool version = false, hash = false, seed = false, theta_max = false;
    for (const auto& [k, v] : t.metadata()) {
        version |= (k == "version");
        hash |= (k == "config_hash");
        seed |= (k == "seed");
        theta_max |= (k == "theta_max");
    }
    REQUIRE(version);
    REQUIRE(hash);
    REQUIRE(seed);
    REQUIRE(theta_max);
}
