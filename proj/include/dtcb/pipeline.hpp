// SPDX-License-Identifier: Apache-2.0
//
// Cluster -> train -> evaluate, and the twin fidelity sensitivity sweep.
#pragma once

#include "dtcb/clustering.hpp"
#include "dtcb/dataset.hpp"
#include "dtcb/drl/ddpg.hpp"
#include "dtcb/eval.hpp"
#include "dtcb/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dtcb {

enum class CodebookMode { Single, Split };

std::string to_string(CodebookMode m);
CodebookMode codebook_mode_from_string(const std::string& s);

struct PipelineConfig {
    int phase_bits = 3;
    CodebookMode mode = CodebookMode::Single;
    int codebook_size = 8;  // single mode
    int los_size = 6;       // split mode
    int nlos_size = 2;
    int sensing_beams = 0;  // 0 selects 4M
    bool normalize_columns = false;
    int kmeans_max_iters = 100;
    double kmeans_tol = 1e-9;
    drl::DdpgConfig ddpg;
    std::uint64_t seed = 0;
    int jobs = 1;

    int resolved_sensing_beams(const ArrayConfig& a) const {
        return sensing_beams > 0 ? sensing_beams : 4 * a.num_antennas;
    }
    void validate() const;
};

struct GroupResult {
    std::string label;  // "all", "los" or "nlos"
    Clustering clustering;
    drl::LearnedCodebook learned;
};

struct LearnedCodebooks {
    CodebookMode mode = CodebookMode::Single;
    std::vector<GroupResult> groups;  // one entry (single) or los, nlos (split)
    std::vector<std::string> warnings;

    const Codebook& single() const;
    const Codebook& los() const;
    const Codebook& nlos() const;
};

// Sensing matrix + k-means for one group, with seeds derived from cfg.seed
// and the group label.
Clustering cluster_group(const ChannelDataset& ds, int num_clusters, const std::string& label,
                         const PipelineConfig& cfg);

// Clusters one group of users and trains a beam per cluster. Groups with
// fewer users than requested clusters get one cluster per user.
GroupResult learn_group(const ChannelDataset& ds, int num_clusters, const std::string& label,
                        const PipelineConfig& cfg);

LearnedCodebooks learn_codebooks(const ChannelDataset& twin, const PipelineConfig& cfg);

// Split mode routes each user by the LoS label of `target`. A missing group
// codebook falls back to the other one.
EvalReport evaluate_learned(const LearnedCodebooks& cbs, const ChannelDataset& target, const LinkBudget& lb,
                            const std::string& method, const std::string& scenario = "target");

enum class FidelityAxis { Geometry, Material, RayTracing };

std::string to_string(FidelityAxis a);
FidelityAxis fidelity_axis_from_string(const std::string& s);

struct AxisSpec {
    FidelityAxis axis;
    std::vector<double> values;
};

struct SensitivityResult {
    FidelityAxis axis;
    double value = 0.0;
    double mean_snr_los_db = 0.0;
    double mean_snr_nlos_db = 0.0;
    std::uint64_t seed = 0;
};

// Twin knobs for one sweep point: `base` with a single knob replaced.
// Material values are per-bounce loss offsets in dB.
FidelityKnobs knobs_for(const FidelityKnobs& base, FidelityAxis axis, double value);

struct SensitivityInputs {
    Scene target;
    FidelityKnobs target_knobs;
    FidelityKnobs base_knobs;
    ArrayConfig array;
    LinkBudget link_budget;
    std::vector<AxisSpec> axes;
    PipelineConfig pipeline;
};

// Every point reuses pipeline.seed. Throws ConfigError when no axis has values.
std::vector<SensitivityResult> sensitivity_sweep(const SensitivityInputs& in);

// Same, against a precomputed target dataset.
std::vector<SensitivityResult> sensitivity_sweep(const SensitivityInputs& in, const ChannelDataset& target);

} // namespace dtcb
