// pcrb: batch driver for posterior-bound experiments.
//   pcrb run --config <path> --out <path.csv> [--seed N] [--threads N]
//   pcrb validate --config <path>
// Exit codes: 0 success, 1 config error, 2 property failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "pcrb/experiments.hpp"
#include "pcrb/version.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw pcrb::ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int resolve_threads(std::optional<int> flag) {
    if (flag && *flag > 0) return *flag;
    if (const char* env = std::getenv("PCRB_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"posterior bound experiments for transmit-design evaluation"};
    app.set_version_flag("--version", std::string("pcrb ") + pcrb::kVersion);
    app.require_subcommand(1);

    std::string config_path, out_path;
    std::optional<std::uint64_t> seed_override;
    std::optional<int> threads_flag;

    CLI::App* run_cmd = app.add_subcommand("run", "run the configured experiment");
    run_cmd->add_option("--config", config_path, "JSON experiment config")->required();
    run_cmd->add_option("--out", out_path, "output CSV path")->required();
    run_cmd->add_option("--seed", seed_override, "override the config seed");
    run_cmd->add_option("--threads", threads_flag,
                        "worker threads (fallback: PCRB_THREADS, then hardware)");

    CLI::App* validate_cmd = app.add_subcommand("validate", "parse and validate a config");
    validate_cmd->add_option("--config", config_path, "JSON experiment config")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        pcrb::ExperimentConfig config = pcrb::parse_config(read_file(config_path));

        if (validate_cmd->parsed()) {
            std::cout << "config ok: " << pcrb::to_string(config.experiment) << "\n";
            return 0;
        }

        if (seed_override) config.seed = *seed_override;
        const int threads = resolve_threads(threads_flag);

        pcrb::ResultTable table = [&] {
            switch (config.experiment) {
                case pcrb::ExperimentKind::PowerPattern:
                    return pcrb::run_power_pattern(config);
                case pcrb::ExperimentKind::PcrbVsSnr:
                    return pcrb::run_pcrb_vs_snr(config);
                case pcrb::ExperimentKind::MseValidation:
                    return pcrb::run_mse_validation(config, threads);
                case pcrb::ExperimentKind::PropertySuite:
                    return pcrb::run_property_suite(config);
            }
            throw std::logic_error("unknown experiment");
        }();

        std::ofstream out(out_path, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot open output file: " << out_path << "\n";
            return 1;
        }
        table.write_csv(out);

        if (config.experiment == pcrb::ExperimentKind::PropertySuite) {
            const auto& cols = table.columns();
            std::size_t fail_col = 0;
            for (std::size_t i = 0; i < cols.size(); ++i)
                if (cols[i] == "failures") fail_col = i;
            for (const auto& row : table.rows()) {
                if (row[fail_col] != 0.0) {
                    std::cerr << "property failure detected; see " << out_path << "\n";
                    return 2;
                }
            }
        }
        return 0;
    } catch (const pcrb::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
