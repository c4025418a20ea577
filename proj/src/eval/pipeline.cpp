// SPDX-License-Identifier: Apache-2.0
#include "dtcb/pipeline.hpp"
#include "dtcb/error.hpp"
#include "dtcb/rng.hpp"

#include <algorithm>
#include <future>

namespace dtcb {

std::string to_string(CodebookMode m) { return m == CodebookMode::Single ? "single" : "split"; }

CodebookMode codebook_mode_from_string(const std::string& s) {
    if (s == "single") return CodebookMode::Single;
    if (s == "split") return CodebookMode::Split;
    throw ConfigError("unknown codebook mode '" + s + "' (expected single or split)");
}

void PipelineConfig::validate() const {
    PhaseSet check(phase_bits);
    (void)check;
    if (mode == CodebookMode::Single && codebook_size < 1) throw ConfigError("codebook size must be >= 1");
    if (mode == CodebookMode::Split && (los_size < 1 || nlos_size < 1))
        throw ConfigError("split mode needs at least one LoS and one NLoS beam");
    if (sensing_beams < 0) throw ConfigError("sensing beam count must be >= 0");
    if (kmeans_max_iters < 1) throw ConfigError("k-means iteration limit must be >= 1");
    if (!(kmeans_tol >= 0.0)) throw ConfigError("k-means tolerance must be >= 0");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    ddpg.validate();
}

const Codebook& LearnedCodebooks::single() const {
    if (mode != CodebookMode::Single || groups.empty()) throw DataError("no single-mode codebook");
    return groups[0].learned.codebook;
}

const Codebook& LearnedCodebooks::los() const {
    if (mode != CodebookMode::Split || groups.size() != 2) throw DataError("no split-mode codebooks");
    return groups[0].learned.codebook;
}

const Codebook& LearnedCodebooks::nlos() const {
    if (mode != CodebookMode::Split || groups.size() != 2) throw DataError("no split-mode codebooks");
    return groups[1].learned.codebook;
}

Clustering cluster_group(const ChannelDataset& ds, int num_clusters, const std::string& label,
                         const PipelineConfig& cfg) {
    if (ds.empty()) throw DataError("cluster: group '" + label + "' has no users");
    const PhaseSet ps(cfg.phase_bits);
    const SensingSet sensing = gen_sensing_beams(ds.array, ps, cfg.resolved_sensing_beams(ds.array),
                                                 derive_seed(cfg.seed, "sensing"));
    const SensingMatrix P = build_sensing_matrix(sensing, ds);
    KMeansOptions ko;
    ko.num_clusters = std::min<int>(num_clusters, static_cast<int>(ds.size()));
    ko.seed = derive_seed(cfg.seed, "kmeans-" + label);
    ko.max_iters = cfg.kmeans_max_iters;
    ko.tol = cfg.kmeans_tol;
    ko.normalize_columns = cfg.normalize_columns;
    return kmeans_cluster(P, ko);
}

GroupResult learn_group(const ChannelDataset& ds, int num_clusters, const std::string& label,
                        const PipelineConfig& cfg) {
    GroupResult g;
    g.label = label;
    if (ds.empty()) return g;
    g.clustering = cluster_group(ds, num_clusters, label, cfg);
    drl::DdpgConfig dc = cfg.ddpg;
    dc.seed = derive_seed(cfg.seed, "ddpg-" + label);
    g.learned = drl::learn_codebook(g.clustering, ds, dc, PhaseSet(cfg.phase_bits), label + "-", cfg.jobs);
    return g;
}

LearnedCodebooks learn_codebooks(const ChannelDataset& twin, const PipelineConfig& cfg) {
    cfg.validate();
    if (twin.empty()) throw DataError("learn: empty twin dataset");
    LearnedCodebooks out;
    out.mode = cfg.mode;
    if (cfg.mode == CodebookMode::Single) {
        out.groups.push_back(learn_group(twin, cfg.codebook_size, "all", cfg));
    } else {
        const auto [los, nlos] = split_los_nlos(twin);
        out.groups.push_back(learn_group(los, cfg.los_size, "los", cfg));
        out.groups.push_back(learn_group(nlos, cfg.nlos_size, "nlos", cfg));
    }
    for (const GroupResult& g : out.groups) {
        if (g.learned.codebook.beams.empty()) out.warnings.push_back("group " + g.label + " has no users; no beams");
        for (const std::string& w : g.learned.warnings) out.warnings.push_back(g.label + ": " + w);
    }
    return out;
}

EvalReport evaluate_learned(const LearnedCodebooks& cbs, const ChannelDataset& target, const LinkBudget& lb,
                            const std::string& method, const std::string& scenario) {
    if (cbs.mode == CodebookMode::Single) return evaluate_codebook(cbs.single(), target, lb, method, scenario);
    const Codebook* los = &cbs.los();
    const Codebook* nlos = &cbs.nlos();
    if (los->beams.empty() && nlos->beams.empty()) throw DataError("evaluate: both split codebooks are empty");
    if (los->beams.empty()) los = nlos;
    if (nlos->beams.empty()) nlos = los;
    return evaluate_split(*los, *nlos, target, lb, method, scenario);
}

std::string to_string(FidelityAxis a) {
    switch (a) {
    case FidelityAxis::Geometry: return "geometry";
    case FidelityAxis::Material: return "material";
    case FidelityAxis::RayTracing: return "ray_tracing";
    }
    return "?";
}

FidelityAxis fidelity_axis_from_string(const std::string& s) {
    if (s == "geometry") return FidelityAxis::Geometry;
    if (s == "material") return FidelityAxis::Material;
    if (s == "ray_tracing") return FidelityAxis::RayTracing;
    throw ConfigError("unknown fidelity axis '" + s + "' (expected geometry, material or ray_tracing)");
}

FidelityKnobs knobs_for(const FidelityKnobs& base, FidelityAxis axis, double value) {
    FidelityKnobs k = base;
    switch (axis) {
    case FidelityAxis::Geometry: k.geometry_noise_sigma = value; break;
    case FidelityAxis::Material: k.material_loss_delta_db = value; break;
    case FidelityAxis::RayTracing:
        if (value != static_cast<double>(static_cast<int>(value)))
            throw ConfigError("ray_tracing axis values must be integers");
        k.max_reflection_order = static_cast<int>(value);
        break;
    }
    k.validate();
    return k;
}

std::vector<SensitivityResult> sensitivity_sweep(const SensitivityInputs& in, const ChannelDataset& target) {
    struct Point {
        FidelityAxis axis;
        double value;
    };
    std::vector<Point> points;
    for (const AxisSpec& a : in.axes)
        for (double v : a.values) points.push_back({a.axis, v});
    if (points.empty()) throw ConfigError("sensitivity: no axis values given");
    in.pipeline.validate();
    // Validate every point before spending time on any of them.
    for (const Point& p : points) knobs_for(in.base_knobs, p.axis, p.value);

    std::vector<SensitivityResult> out(points.size());
    auto run = [&](std::size_t i) {
        const Point& p = points[i];
        const ChannelDataset twin = generate_dataset(in.target, knobs_for(in.base_knobs, p.axis, p.value), in.array,
                                                     in.link_budget);
        PipelineConfig pc = in.pipeline;
        pc.jobs = 1;
        const LearnedCodebooks cbs = learn_codebooks(twin, pc);
        const EvalReport r = evaluate_learned(cbs, target, in.link_budget, "twin");
        out[i] = {p.axis, p.value, r.subset(true).mean_db, r.subset(false).mean_db, in.pipeline.seed};
    };
    const std::size_t jobs = static_cast<std::size_t>(std::max(1, in.pipeline.jobs));
    for (std::size_t start = 0; start < points.size(); start += jobs) {
        std::vector<std::future<void>> fs;
        for (std::size_t i = start; i < std::min(points.size(), start + jobs); ++i)
            fs.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async, run, i));
        for (auto& f : fs) f.get();
    }
    return out;
}

std::vector<SensitivityResult> sensitivity_sweep(const SensitivityInputs& in) {
    bool any = false;
    for (const AxisSpec& a : in.axes) any = any || !a.values.empty();
    if (!any) throw ConfigError("sensitivity: no axis values given");
    const ChannelDataset target = generate_dataset(in.target, in.target_knobs, in.array, in.link_budget);
    return sensitivity_sweep(in, target);
}

} // namespace dtcb
