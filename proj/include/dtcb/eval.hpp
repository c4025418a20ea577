// SPDX-License-Identifier: Apache-2.0
//
// Codebook evaluation on a target dataset: per-user best-beam SNR, CDFs,
// SNR maps, beam patterns and report comparison.
#pragma once

#include "dtcb/dataset.hpp"
#include "dtcb/io.hpp"
#include "dtcb/mimo.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dtcb {

struct EvalReport {
    std::string method;
    std::string scenario;
    std::vector<std::int64_t> user_ids;
    std::vector<bool> is_los;
    std::vector<double> snr_db;   // -inf marks outage
    std::vector<int> beam_index;  // -1 when no codebook beam applies (EGC, outage)

    // Summaries over the finite entries.
    double mean_db = 0.0;
    double p10 = 0.0, p50 = 0.0, p90 = 0.0;
    double outage_frac = 0.0;
    std::size_t finite_count = 0;

    std::size_t size() const { return snr_db.size(); }
    // Sorted finite SNRs with empirical probabilities i/n, i = 1..n.
    std::vector<std::pair<double, double>> cdf() const;
    EvalReport subset(bool los) const;
    void summarize();
};

// Throws DataError on an empty dataset or an array mismatch.
EvalReport evaluate_codebook(const Codebook& cb, const ChannelDataset& ds, const LinkBudget& lb,
                             const std::string& method = "codebook", const std::string& scenario = "target");

// Users are routed by their dataset LoS label to the matching codebook.
EvalReport evaluate_split(const Codebook& los_cb, const Codebook& nlos_cb, const ChannelDataset& ds,
                          const LinkBudget& lb, const std::string& method = "split",
                          const std::string& scenario = "target");

// Equal-gain combining with perfect channel knowledge.
EvalReport evaluate_egc(const ChannelDataset& ds, const LinkBudget& lb, const std::string& scenario = "target");

struct ComparisonRow {
    std::string method;
    double mean_db, p10, p50, p90, outage_frac;
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    std::vector<std::vector<double>> mean_delta_db;  // [i][j] = mean_i - mean_j
};

// Throws DataError when the reports cover different user sets.
Comparison compare(std::span<const EvalReport> reports);

enum class CellFlag : int { Ok = 0, Outage = 1, NoUser = 2 };

struct SnrMap {
    int nx = 0, ny = 0;
    UserGrid grid;
    std::vector<double> snr_db;  // row-major, row = y index
    std::vector<CellFlag> flags;

    double at(int ix, int iy) const { return snr_db[static_cast<std::size_t>(iy) * nx + ix]; }
    CellFlag flag(int ix, int iy) const { return flags[static_cast<std::size_t>(iy) * nx + ix]; }
};

SnrMap snr_map(const Codebook& cb, const ChannelDataset& ds, const LinkBudget& lb);
SnrMap snr_map(const EvalReport& report, const ChannelDataset& ds);

struct PatternSample {
    double angle;
    double gain_db;
};

// |w^H a(phi)|^2 on `resolution` evenly spaced angles covering [0, pi].
std::vector<PatternSample> beam_pattern(const Beam& w, const ArrayConfig& cfg, int resolution);

inline constexpr double kPlotFloorDb = -40.0;

std::string cdf_csv(const EvalReport& r);
std::string map_csv(const SnrMap& m);
std::string pattern_csv(std::span<const PatternSample> p);
json summary_json(const EvalReport& r);

} // namespace dtcb
