// SPDX-License-Identifier: Apache-2.0
#include "dtcb/cli.hpp"
#include "dtcb/error.hpp"
#include "dtcb/kernels.hpp"

#include "CLI11.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace dtcb::cli {

namespace fs = std::filesystem;

namespace {

std::string path_in(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.out) / name).string(); }

void ensure_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + dir + "': " + ec.message());
}

void write_json(const std::string& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

std::vector<std::string> group_labels(CodebookMode mode) {
    if (mode == CodebookMode::Single) return {"all"};
    return {"los", "nlos"};
}

std::string clustering_file(const std::string& source, CodebookMode mode, const std::string& group) {
    if (mode == CodebookMode::Single) return "clustering_" + source + ".json";
    return "clustering_" + source + "_" + group + ".json";
}

void write_resolved(const RunConfig& cfg) { write_json(path_in(cfg, "resolved_config.json"), to_json(cfg)); }

void write_meta(const RunConfig& cfg, const std::string& command) {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream ts;
    ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    write_json(path_in(cfg, "run_meta.json"),
               {{"command", command}, {"timestamp", ts.str()}, {"kernels", kernels::backend_name(kernels::active_backend())}});
}

std::vector<ChannelDataset> split_groups(const ChannelDataset& ds, CodebookMode mode) {
    if (mode == CodebookMode::Single) return {ds};
    auto [los, nlos] = split_los_nlos(ds);
    return {std::move(los), std::move(nlos)};
}

int group_size(const PipelineConfig& p, const std::string& label) {
    if (label == "los") return p.los_size;
    if (label == "nlos") return p.nlos_size;
    return p.codebook_size;
}

void train_source(const RunConfig& cfg, const ChannelDataset& ds, const std::string& source) {
    const LearnedCodebooks cbs = learn_codebooks(ds, cfg.pipeline);
    json traces = json::object();
    for (const GroupResult& g : cbs.groups) {
        save_codebook(path_in(cfg, codebook_file(source, cbs.mode, g.label)), g.learned.codebook);
        json per_beam = json::array();
        for (std::size_t b = 0; b < g.learned.traces.size(); ++b)
            per_beam.push_back({{"label", g.learned.codebook.labels[b]}, {"trace", drl::trace_to_json(g.learned.traces[b])}});
        traces[g.label] = per_beam;
    }
    write_json(path_in(cfg, "traces_" + source + ".json"), traces);
    for (const std::string& w : cbs.warnings) std::cerr << "warning: " << source << " " << w << '\n';
}

LearnedCodebooks load_learned(const RunConfig& cfg, const std::string& source) {
    LearnedCodebooks out;
    out.mode = cfg.pipeline.mode;
    for (const std::string& label : group_labels(out.mode)) {
        GroupResult g;
        g.label = label;
        g.learned.codebook = load_codebook(path_in(cfg, codebook_file(source, out.mode, label)));
        out.groups.push_back(std::move(g));
    }
    return out;
}

void check_dataset(const ChannelDataset& ds, const RunConfig& cfg, const std::string& what) {
    if (!(ds.array == cfg.array())) throw DataError(what + ": array configuration differs from the run config");
}

} // namespace

void cmd_scene(const std::string& name_or_path, const std::string& out_dir) {
    const Scene scene = resolve_scene(name_or_path);
    ensure_out(out_dir);
    save_scene((fs::path(out_dir) / "scene.json").string(), scene);
}

void cmd_generate(const RunConfig& cfg) {
    ensure_out(cfg.out);
    write_resolved(cfg);
    const Scene scene = resolve_scene(cfg.scene);
    save_scene(path_in(cfg, "scene.json"), scene);
    save_dataset(path_in(cfg, "target.jsonl"), generate_dataset(scene, cfg.target_knobs, cfg.array(), cfg.link_budget));
    save_dataset(path_in(cfg, "twin.jsonl"), generate_dataset(scene, cfg.twin_knobs, cfg.array(), cfg.link_budget));
}

void cmd_cluster(const RunConfig& cfg) {
    ensure_out(cfg.out);
    write_resolved(cfg);
    const ChannelDataset twin = load_dataset(path_in(cfg, "twin.jsonl"));
    check_dataset(twin, cfg, "twin dataset");
    const auto groups = split_groups(twin, cfg.pipeline.mode);
    const auto labels = group_labels(cfg.pipeline.mode);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i].empty()) {
            std::cerr << "warning: group " << labels[i] << " has no users\n";
            continue;
        }
        const Clustering c = cluster_group(groups[i], group_size(cfg.pipeline, labels[i]), labels[i], cfg.pipeline);
        write_json(path_in(cfg, clustering_file("twin", cfg.pipeline.mode, labels[i])), to_json(c));
    }
}

void cmd_train(const RunConfig& cfg) {
    ensure_out(cfg.out);
    write_resolved(cfg);
    const ChannelDataset twin = load_dataset(path_in(cfg, "twin.jsonl"));
    const ChannelDataset target = load_dataset(path_in(cfg, "target.jsonl"));
    check_dataset(twin, cfg, "twin dataset");
    check_dataset(target, cfg, "target dataset");
    train_source(cfg, twin, "twin");
    train_source(cfg, target, "target");
}

void cmd_evaluate(const RunConfig& cfg) {
    ensure_out(cfg.out);
    write_resolved(cfg);
    const ChannelDataset target = load_dataset(path_in(cfg, "target.jsonl"));
    check_dataset(target, cfg, "target dataset");
    const ArrayConfig array = cfg.array();
    const LinkBudget& lb = cfg.link_budget;

    const LearnedCodebooks twin_cb = load_learned(cfg, "twin");
    const LearnedCodebooks oracle_cb = load_learned(cfg, "target");
    std::vector<EvalReport> reports;
    reports.push_back(evaluate_learned(twin_cb, target, lb, "twin"));
    reports.push_back(evaluate_learned(oracle_cb, target, lb, "target"));
    const int N = cfg.total_beams();
    reports.push_back(evaluate_codebook(dft_codebook(array, N), target, lb, "dft-" + std::to_string(N)));
    if (N != array.num_antennas)
        reports.push_back(evaluate_codebook(dft_codebook(array, array.num_antennas), target, lb,
                                            "dft-" + std::to_string(array.num_antennas)));
    reports.push_back(evaluate_egc(target, lb));

    const Comparison cmp = compare(reports);
    json rows = json::array();
    for (const EvalReport& r : reports) {
        json row = summary_json(r);
        row["los"] = summary_json(r.subset(true));
        row["nlos"] = summary_json(r.subset(false));
        rows.push_back(row);
        write_text_file(path_in(cfg, "cdf_" + r.method + ".csv"), cdf_csv(r));
        write_text_file(path_in(cfg, "map_" + r.method + ".csv"), map_csv(snr_map(r, target)));
    }
    json methods = json::array();
    for (const ComparisonRow& r : cmp.rows) methods.push_back(r.method);
    json deltas = json::array();
    for (const auto& row : cmp.mean_delta_db) {
        json d = json::array();
        for (double v : row) d.push_back(std::isfinite(v) ? json(v) : json(nullptr));
        deltas.push_back(d);
    }
    write_json(path_in(cfg, "summary.json"),
               {{"reports", rows}, {"comparison", {{"methods", methods}, {"mean_delta_db", deltas}}}});

    for (const GroupResult& g : twin_cb.groups) {
        const Codebook& cb = g.learned.codebook;
        for (std::size_t b = 0; b < cb.beams.size(); ++b) {
            const auto pattern = beam_pattern(cb.beams[b], array, cfg.pattern_resolution);
            write_text_file(path_in(cfg, "pattern_twin_" + cb.labels[b] + ".csv"), pattern_csv(pattern));
        }
    }
}

void cmd_sensitivity(const RunConfig& cfg) {
    bool any = false;
    for (const AxisSpec& a : cfg.axes) any = any || !a.values.empty();
    if (!any) throw ConfigError("sensitivity: no axes configured");
    ensure_out(cfg.out);
    write_resolved(cfg);
    SensitivityInputs in{resolve_scene(cfg.scene), cfg.target_knobs, cfg.sensitivity_base, cfg.array(),
                         cfg.link_budget,          cfg.axes,         cfg.pipeline};
    const std::string target_path = path_in(cfg, "target.jsonl");
    std::vector<SensitivityResult> rows;
    if (fs::exists(target_path)) {
        const ChannelDataset target = load_dataset(target_path);
        check_dataset(target, cfg, "target dataset");
        rows = sensitivity_sweep(in, target);
    } else {
        rows = sensitivity_sweep(in);
    }
    write_text_file(path_in(cfg, "sensitivity.csv"), sensitivity_csv(rows, cfg.pipeline.seed));
}

void cmd_all(const RunConfig& cfg) {
    cmd_generate(cfg);
    cmd_cluster(cfg);
    cmd_train(cfg);
    cmd_evaluate(cfg);
    cmd_sensitivity(cfg);
}

int run(int argc, char** argv) {
    CLI::App app{"Digital-twin-aided beam codebook learning"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> jobs;
    app.add_option("--config", config_path, "run configuration file (JSON)");
    app.add_option("--seed", seed, "global seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--jobs", jobs, "worker bound")->check(CLI::PositiveNumber);

    std::string scene_arg;
    auto* scene_cmd = app.add_subcommand("scene", "write a scene file (builtin name or file)");
    scene_cmd->add_option("scene", scene_arg, "builtin name or scene file");
    auto* generate_cmd = app.add_subcommand("generate", "generate target and twin datasets");
    auto* cluster_cmd = app.add_subcommand("cluster", "cluster twin users");
    auto* train_cmd = app.add_subcommand("train", "learn codebooks from twin and target datasets");
    auto* evaluate_cmd = app.add_subcommand("evaluate", "evaluate codebooks on the target dataset");
    auto* sensitivity_cmd = app.add_subcommand("sensitivity", "twin fidelity sensitivity sweep");
    auto* all_cmd = app.add_subcommand("all", "generate, cluster, train, evaluate and sensitivity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
        if (seed) cfg.pipeline.seed = *seed;
        if (out) cfg.out = *out;
        if (jobs) cfg.pipeline.jobs = *jobs;
        cfg.validate();

        std::string command;
        if (scene_cmd->parsed()) {
            command = "scene";
            cmd_scene(scene_arg.empty() ? cfg.scene : scene_arg, cfg.out);
        } else if (generate_cmd->parsed()) {
            command = "generate";
            cmd_generate(cfg);
        } else if (cluster_cmd->parsed()) {
            command = "cluster";
            cmd_cluster(cfg);
        } else if (train_cmd->parsed()) {
            command = "train";
            cmd_train(cfg);
        } else if (evaluate_cmd->parsed()) {
            command = "evaluate";
            cmd_evaluate(cfg);
        } else if (sensitivity_cmd->parsed()) {
            command = "sensitivity";
            cmd_sensitivity(cfg);
        } else if (all_cmd->parsed()) {
            command = "all";
            cmd_all(cfg);
        }
        write_meta(cfg, command);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
    return kOk;
}

} // namespace dtcb::cli
