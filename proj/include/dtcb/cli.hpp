// SPDX-License-Identifier: Apache-2.0
//
// Run configuration and the subcommands behind the dtcb executable.
#pragma once

#include "dtcb/pipeline.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dtcb::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kRuntimeError = 4 };

struct RunConfig {
    std::string scene = "toy-manhattan";  // builtin name or scene file path
    int num_antennas = 8;
    double spacing_wavelengths = 0.5;
    double carrier_frequency = 28e9;
    LinkBudget link_budget;
    PipelineConfig pipeline;
    FidelityKnobs target_knobs;
    FidelityKnobs twin_knobs;
    FidelityKnobs sensitivity_base;
    std::vector<AxisSpec> axes;
    int pattern_resolution = 181;
    std::string out = "out";

    RunConfig();
    ArrayConfig array() const;
    int total_beams() const;
    void validate() const;
};

// Unknown keys and ill-typed values raise ConfigError.
RunConfig config_from_json(const json& j);
json to_json(const RunConfig& cfg);
RunConfig load_run_config(const std::string& path);

Scene resolve_scene(const std::string& name_or_path);

// File names inside the output directory.
std::string codebook_file(const std::string& source, CodebookMode mode, const std::string& group);

std::string sensitivity_csv(const std::vector<SensitivityResult>& rows, std::uint64_t seed);
std::vector<SensitivityResult> parse_sensitivity_csv(const std::string& text);

void cmd_scene(const std::string& name_or_path, const std::string& out_dir);
void cmd_generate(const RunConfig& cfg);
void cmd_cluster(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_evaluate(const RunConfig& cfg);
void cmd_sensitivity(const RunConfig& cfg);
void cmd_all(const RunConfig& cfg);

// Entry point; returns the process exit code.
int run(int argc, char** argv);

} // namespace dtcb::cli
