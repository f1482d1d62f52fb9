#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "latgas/grid.hpp"
#include "latgas/models.hpp"

namespace latgas::cli {

/// Normalized run description assembled from a config file plus command-line
/// overrides.  Field defaults are the documented config defaults.
struct RunConfig {
    std::string command;

    // model
    std::string model_family{"ssep"};
    std::map<std::string, double> model_params;

    // geometry
    bool periodic{false};
    double alpha{0.2};
    double beta{0.8};
    double mass{0.5};

    // microscopic simulation
    int N{50};
    double t_end{200.0};
    double burn_in{20.0};
    double sample_interval{0.05};
    int replicas{4};
    int batches{32};

    // macroscopic grid / dynamics
    int M{128};
    double dt{0.0};  // 0 selects the solver default
    double T{1.0};

    // density profile specification
    std::string profile_family{"linear"};  // linear | sine | constant | tabulated
    double profile_level{0.5};
    double profile_amplitude{0.1};
    int profile_mode{1};
    std::string profile_file;

    // flux / phase scan
    double q{1.0};
    double q_min{0.0};
    double q_max{8.0};
    int q_points{25};
    int modes{6};

    // run control
    std::uint64_t seed{0};
    bool seed_defaulted{true};
    std::filesystem::path out_dir{"out"};

    std::vector<std::string> warnings;  // recorded in the manifest
};

struct ConfigParse {
    RunConfig config;
    std::vector<std::string> errors;  // empty means valid
};

/// Parses the flat key=value format ([section] headers prefix the keys that
/// follow) and validates every field, collecting all violations rather than
/// stopping at the first.
ConfigParse validate_config(const std::string& raw, const std::string& command);

/// Reads the file and delegates to validate_config.
ConfigParse load_config(const std::filesystem::path& file, const std::string& command);

/// Density profile on the grid nodes according to the [profile] section.
GridFunction build_profile(const RunConfig& cfg, const Grid& grid);

models::TransportModel build_model(const RunConfig& cfg);

/// Lists every config key with its meaning and default.
std::string config_help();

/// Executes the configured command, writing artifacts plus manifest.json
/// into cfg.out_dir.  Returns the process exit status: 0 success,
/// 1 validation failure, 2 numerical failure.
int run(RunConfig cfg);

/// Full argv entry point used by the binary: parses
///   latgas <command> --config FILE [--seed S] [--replicas R] [--out DIR]
int main_with_args(const std::vector<std::string>& args);

}  // namespace latgas::cli
