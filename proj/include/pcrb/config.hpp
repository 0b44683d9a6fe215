#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcrb/array.hpp"
#include "pcrb/fim.hpp"
#include "pcrb/prior.hpp"

namespace pcrb {

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Config file errors carry the offending field path (or the parse location).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class ExperimentKind { PowerPattern, PcrbVsSnr, MseValidation, PropertySuite };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::PowerPattern: return "power-pattern";
        case ExperimentKind::PcrbVsSnr: return "pcrb-vs-snr";
        case ExperimentKind::MseValidation: return "mse-validation";
        case ExperimentKind::PropertySuite: return "property-suite";
    }
    throw std::logic_error("unknown experiment kind");
}

inline ExperimentKind experiment_from_string(const std::string& s) {
    if (s == "power-pattern") return ExperimentKind::PowerPattern;
    if (s == "pcrb-vs-snr") return ExperimentKind::PcrbVsSnr;
    if (s == "mse-validation") return ExperimentKind::MseValidation;
    if (s == "property-suite") return ExperimentKind::PropertySuite;
    throw ConfigError("experiment: unknown kind '" + s + "'");
}

struct PowerPatternSpec {
    double angle_start = 0.0;
    double angle_stop = kPi;
    int angle_count = 630;
    bool operator==(const PowerPatternSpec&) const = default;
};

struct PcrbVsSnrSpec {
    std::vector<double> snr_db = {-10.0, -8.0, -6.0, -4.0, -2.0, 0.0, 2.0};
    bool operator==(const PcrbVsSnrSpec&) const = default;
};

struct MseValidationSpec {
    std::vector<double> snr_db = {-10.0, -4.0, 2.0};
    int trials = 1000;
    bool operator==(const MseValidationSpec&) const = default;
};

struct PropertySuiteSpec {
    int chain_trials = 200;
    int gap_trials = 10000;
    int dominance_trials = 10000;
    int schur_trials = 500;
    int fisher_trials = 200;
    bool operator==(const PropertySuiteSpec&) const = default;
};

/// Declarative description of one batch experiment.
struct ExperimentConfig {
    ArrayConfig array;
    std::vector<GaussianComponent> prior_components;
    bool scene_alpha_direct = false;  ///< scene given as alpha rather than path/RCS
    Complex scene_alpha{0.0, 0.0};
    double scene_ref_power = 1.0;
    double scene_range_m = 1.0;
    Complex scene_rcs{1.0, 0.0};
    double power_dbm = 30.0;
    double noise_dbm = 0.0;
    int num_samples = 1;
    std::uint64_t seed = 1;
    ExperimentKind experiment = ExperimentKind::PcrbVsSnr;
    PowerPatternSpec power_pattern;
    PcrbVsSnrSpec pcrb_vs_snr;
    MseValidationSpec mse_validation;
    PropertySuiteSpec property_suite;

    bool operator==(const ExperimentConfig& o) const {
        if (scene_alpha_direct != o.scene_alpha_direct) return false;
        const bool scene_equal =
            scene_alpha_direct
                ? scene_alpha == o.scene_alpha
                : scene_ref_power == o.scene_ref_power && scene_range_m == o.scene_range_m &&
                      scene_rcs == o.scene_rcs;
        return array.n_tx == o.array.n_tx && array.n_rx == o.array.n_rx &&
               array.spacing_ratio == o.array.spacing_ratio && prior_equal(o) && scene_equal &&
               power_dbm == o.power_dbm && noise_dbm == o.noise_dbm &&
               num_samples == o.num_samples && seed == o.seed && experiment == o.experiment &&
               power_pattern == o.power_pattern && pcrb_vs_snr == o.pcrb_vs_snr &&
               mse_validation == o.mse_validation && property_suite == o.property_suite;
    }

    GaussianMixturePrior prior() const { return GaussianMixturePrior(prior_components); }

    SceneConfig scene() const {
        const double noise_w = dbm_to_watts(noise_dbm);
        if (scene_alpha_direct) return SceneConfig::from_gain(scene_alpha, noise_w);
        return SceneConfig::from_path(scene_ref_power, scene_range_m, scene_rcs, noise_w);
    }

    RunConfig run() const { return RunConfig{num_samples, dbm_to_watts(power_dbm)}; }

    void validate() const {
        array.validate();
        (void)prior();
        (void)scene();
        run().validate();
        if (!std::isfinite(power_dbm) || !std::isfinite(noise_dbm))
            throw ConfigError("power_dbm/noise_dbm must be finite");
        if (experiment == ExperimentKind::PowerPattern) {
            if (power_pattern.angle_count < 2 ||
                !(power_pattern.angle_stop > power_pattern.angle_start))
                throw ConfigError("power_pattern: need angle_stop > angle_start and count >= 2");
        }
        if (experiment == ExperimentKind::PcrbVsSnr && pcrb_vs_snr.snr_db.empty())
            throw ConfigError("pcrb_vs_snr.snr_db: need at least one sweep point");
        if (experiment == ExperimentKind::MseValidation) {
            if (mse_validation.snr_db.empty())
                throw ConfigError("mse_validation.snr_db: need at least one sweep point");
            if (mse_validation.trials < 100)
                throw ConfigError("mse_validation.trials: need at least 100");
        }
        if (experiment == ExperimentKind::PropertySuite) {
            const auto& p = property_suite;
            if (p.chain_trials < 1 || p.gap_trials < 1 || p.dominance_trials < 1 ||
                p.schur_trials < 1 || p.fisher_trials < 1)
                throw ConfigError("property_suite: trial counts must be positive");
        }
    }

private:
    bool prior_equal(const ExperimentConfig& o) const {
        if (prior_components.size() != o.prior_components.size()) return false;
        for (std::size_t i = 0; i < prior_components.size(); ++i) {
            const auto& a = prior_components[i];
            const auto& b = o.prior_components[i];
            if (a.weight != b.weight || a.mean != b.mean || a.variance != b.variance)
                return false;
        }
        return true;
    }
};

namespace detail {

template <class T>
T require(const nlohmann::json& j, const std::string& path, const std::string& key) {
    if (!j.contains(key)) throw ConfigError(path + key + ": missing required field");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(path + key + ": wrong type");
    }
}

template <class T>
T optional_or(const nlohmann::json& j, const std::string& path, const std::string& key,
              T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError(path + key + ": wrong type");
    }
}

inline Complex complex_from_json(const nlohmann::json& j, const std::string& path) {
    if (!j.is_object()) throw ConfigError(path + ": expected {\"re\": ..., \"im\": ...}");
    return Complex{require<double>(j, path + ".", "re"), require<double>(j, path + ".", "im")};
}

inline nlohmann::json complex_to_json(const Complex& z) {
    return nlohmann::json{{"re", z.real()}, {"im", z.imag()}};
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    using detail::optional_or;
    using detail::require;
    ExperimentConfig c;

    const auto arr = require<nlohmann::json>(j, "", "array");
    c.array.n_tx = require<int>(arr, "array.", "n_tx");
    c.array.n_rx = require<int>(arr, "array.", "n_rx");
    c.array.spacing_ratio = require<double>(arr, "array.", "spacing_ratio");

    const auto prior = require<nlohmann::json>(j, "", "prior");
    const auto comps = require<nlohmann::json>(prior, "prior.", "components");
    if (!comps.is_array() || comps.empty())
        throw ConfigError("prior.components: expected a non-empty array");
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const std::string path = "prior.components[" + std::to_string(i) + "].";
        GaussianComponent g;
        g.weight = require<double>(comps[i], path, "weight");
        g.mean = require<double>(comps[i], path, "mean");
        g.variance = require<double>(comps[i], path, "variance");
        c.prior_components.push_back(g);
    }

    const auto scene = require<nlohmann::json>(j, "", "scene");
    if (scene.contains("alpha")) {
        c.scene_alpha_direct = true;
        c.scene_alpha = detail::complex_from_json(scene.at("alpha"), "scene.alpha");
    } else {
        c.scene_alpha_direct = false;
        c.scene_ref_power = require<double>(scene, "scene.", "ref_power");
        c.scene_range_m = require<double>(scene, "scene.", "range_m");
        c.scene_rcs = detail::complex_from_json(
            require<nlohmann::json>(scene, "scene.", "rcs"), "scene.rcs");
    }

    c.power_dbm = require<double>(j, "", "power_dbm");
    c.noise_dbm = require<double>(j, "", "noise_dbm");
    c.num_samples = require<int>(j, "", "num_samples");
    c.seed = optional_or<std::uint64_t>(j, "", "seed", 1);
    c.experiment = experiment_from_string(require<std::string>(j, "", "experiment"));

    if (j.contains("power_pattern")) {
        const auto& p = j.at("power_pattern");
        c.power_pattern.angle_start = optional_or<double>(p, "power_pattern.", "angle_start",
                                                          c.power_pattern.angle_start);
        c.power_pattern.angle_stop = optional_or<double>(p, "power_pattern.", "angle_stop",
                                                         c.power_pattern.angle_stop);
        c.power_pattern.angle_count = optional_or<int>(p, "power_pattern.", "angle_count",
                                                       c.power_pattern.angle_count);
    }
    if (j.contains("pcrb_vs_snr"))
        c.pcrb_vs_snr.snr_db = require<std::vector<double>>(j.at("pcrb_vs_snr"),
                                                            "pcrb_vs_snr.", "snr_db");
    if (j.contains("mse_validation")) {
        const auto& m = j.at("mse_validation");
        c.mse_validation.snr_db = require<std::vector<double>>(m, "mse_validation.", "snr_db");
        c.mse_validation.trials = optional_or<int>(m, "mse_validation.", "trials",
                                                   c.mse_validation.trials);
    }
    if (j.contains("property_suite")) {
        const auto& p = j.at("property_suite");
        auto& s = c.property_suite;
        s.chain_trials = optional_or<int>(p, "property_suite.", "chain_trials", s.chain_trials);
        s.gap_trials = optional_or<int>(p, "property_suite.", "gap_trials", s.gap_trials);
        s.dominance_trials =
            optional_or<int>(p, "property_suite.", "dominance_trials", s.dominance_trials);
        s.schur_trials = optional_or<int>(p, "property_suite.", "schur_trials", s.schur_trials);
        s.fisher_trials = optional_or<int>(p, "property_suite.", "fisher_trials", s.fisher_trials);
    }

    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return c;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
    nlohmann::json j;
    j["array"] = {{"n_tx", c.array.n_tx},
                  {"n_rx", c.array.n_rx},
                  {"spacing_ratio", c.array.spacing_ratio}};
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& g : c.prior_components)
        comps.push_back({{"weight", g.weight}, {"mean", g.mean}, {"variance", g.variance}});
    j["prior"] = {{"components", comps}};
    if (c.scene_alpha_direct) {
        j["scene"] = {{"alpha", detail::complex_to_json(c.scene_alpha)}};
    } else {
        j["scene"] = {{"ref_power", c.scene_ref_power},
                      {"range_m", c.scene_range_m},
                      {"rcs", detail::complex_to_json(c.scene_rcs)}};
    }
    j["power_dbm"] = c.power_dbm;
    j["noise_dbm"] = c.noise_dbm;
    j["num_samples"] = c.num_samples;
    j["seed"] = c.seed;
    j["experiment"] = to_string(c.experiment);
    j["power_pattern"] = {{"angle_start", c.power_pattern.angle_start},
                          {"angle_stop", c.power_pattern.angle_stop},
                          {"angle_count", c.power_pattern.angle_count}};
    j["pcrb_vs_snr"] = {{"snr_db", c.pcrb_vs_snr.snr_db}};
    j["mse_validation"] = {{"snr_db", c.mse_validation.snr_db},
                           {"trials", c.mse_validation.trials}};
    j["property_suite"] = {{"chain_trials", c.property_suite.chain_trials},
                           {"gap_trials", c.property_suite.gap_trials},
                           {"dominance_trials", c.property_suite.dominance_trials},
                           {"schur_trials", c.property_suite.schur_trials},
                           {"fisher_trials", c.property_suite.fisher_trials}};
    return j;
}

/// Parses a JSON config document; syntax errors are reported with their line.
inline ExperimentConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
            if (text[i] == '\n') ++line;
        throw ConfigError("config parse error at line " + std::to_string(line) + ": " + e.what());
    }
    return config_from_json(j);
}

inline std::string serialize_config(const ExperimentConfig& c) {
    return config_to_json(c).dump(2) + "\n";
}

/// The stock experiment setup shipped with the tool: 10x12 half-wavelength
/// array, the five-component angle prior, 25 samples, 30 dBm power,
/// -120 dBm noise, -20 dB two-way path gain.
inline ExperimentConfig default_config() {
    ExperimentConfig c;
    c.array = {10, 12, 0.5};
    c.prior_components = {{0.15, 0.52, 1e-4},
                          {0.32, 0.82, 1e-4},
                          {0.17, 0.87, 1e-3},
                          {0.20, 2.60, 1e-3},
                          {0.16, 2.70, 1e-4}};
    c.scene_alpha_direct = false;
    c.scene_ref_power = 0.01;  // -20 dB at 1 m
    c.scene_range_m = 1.0;
    c.scene_rcs = Complex{1.0, 0.0};
    c.power_dbm = 30.0;
    c.noise_dbm = -120.0;
    c.num_samples = 25;
    c.seed = 1;
    c.experiment = ExperimentKind::PcrbVsSnr;
    return c;
}

/// FNV-1a over the canonical serialization; stable across runs and platforms.
inline std::uint64_t config_hash(const ExperimentConfig& c) {
    const std::string s = config_to_json(c).dump();
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001B3ULL;
    }
    return h;
}

}  // namespace pcrb
