// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "dtcb/cli.hpp"
#include "dtcb/error.hpp"
#include "dtcb/eval.hpp"
#include "dtcb/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace dtcb;
using namespace dtcb::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("dtcb_test_cli_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "dtcb");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return run(static_cast<int>(argv.size()), argv.data());
}

// A toy scene cut down to a small patch of users and a tiny training budget.
fs::path small_setup(const fs::path& dir) {
    Scene s = builtin_scene("toy-manhattan");
    s.user_grid.xmin = -30;
    s.user_grid.xmax = 30;
    s.user_grid.ymin = -40;
    s.user_grid.ymax = -4;
    s.user_grid.spacing = 6;
    save_scene((dir / "scene.json").string(), s);
    json cfg = {
        {"scene", (dir / "scene.json").string()},
        {"array", {{"num_antennas", 4}}},
        {"codebook_size", 3},
        {"clustering", {{"sensing_beams", 8}}},
        {"ddpg", {{"episodes", 2}, {"steps_per_episode", 16}, {"batch_size", 8}, {"hidden_multiplier", 2}}},
        {"sensitivity", {{"axes", {{"material", {3.0}}, {"ray_tracing", {1}}}}}},
        {"pattern_resolution", 31},
    };
    write_text_file((dir / "config.json").string(), cfg.dump(2));
    return dir / "config.json";
}

void write_config(const fs::path& p, const json& j) { write_text_file(p.string(), j.dump()); }

} // namespace

TEST_CASE("configuration errors exit with code 2") {
    const fs::path dir = scratch("config");
    const fs::path cfg = dir / "c.json";
    const std::string out = (dir / "o").string();

    write_config(cfg, {{"no_such_key", 1}});
    CHECK(invoke({"--config", cfg.string(), "--out", out, "generate"}) == kConfigError);
    write_config(cfg, {{"mode", "triple"}});
    CHECK(invoke({"--config", cfg.string(), "--out", out, "generate"}) == kConfigError);
    write_config(cfg, {{"phase_bits", "three"}});
    CHECK(invoke({"--config", cfg.string(), "--out", out, "generate"}) == kConfigError);
    write_config(cfg, {{"ddpg", {{"gamma", 2.0}}}});
    CHECK(invoke({"--config", cfg.string(), "--out", out, "generate"}) == kConfigError);
    write_config(cfg, {{"scene", "no-such-scene"}});
    CHECK(invoke({"--config", cfg.string(), "--out", out, "generate"}) == kConfigError);
    write_text_file(cfg.string(), "{ \"seed\": ");
    CHECK(invoke({"--config", cfg.string(), "--out", out, "generate"}) == kConfigError);
    CHECK(invoke({"--config", (dir / "missing.json").string(), "generate"}) == kConfigError);
    CHECK(invoke({"--jobs", "0", "generate"}) == kConfigError);
    CHECK(invoke({"bogus"}) == kConfigError);
    CHECK(invoke({}) == kConfigError);
}

TEST_CASE("an empty sensitivity axis list is a configuration error") {
    const fs::path dir = scratch("axes");
    write_config(dir / "c.json", {{"sensitivity", {{"axes", json::object()}}}});
    CHECK(invoke({"--config", (dir / "c.json").string(), "--out", (dir / "o").string(), "sensitivity"}) ==
          kConfigError);
}

TEST_CASE("missing inputs exit with code 3") {
    const fs::path dir = scratch("data");
    CHECK(invoke({"--out", (dir / "o").string(), "cluster"}) == kDataError);
    CHECK(invoke({"--out", (dir / "o").string(), "evaluate"}) == kDataError);
}

TEST_CASE("config JSON round-trip") {
    RunConfig c;
    c.pipeline.seed = 42;
    c.pipeline.mode = CodebookMode::Split;
    c.pipeline.ddpg.gamma = 0.7;
    c.twin_knobs.material_loss_delta_db = 1.5;
    c.axes = {{FidelityAxis::Material, {-1.0, 2.0}}};
    const RunConfig back = config_from_json(to_json(c));
    CHECK(to_json(back) == to_json(c));
    CHECK(back.pipeline.mode == CodebookMode::Split);
    CHECK(back.twin_knobs == c.twin_knobs);
}

TEST_CASE("sensitivity CSV round-trip") {
    const std::vector<SensitivityResult> rows{{FidelityAxis::Geometry, 0.5, 10.25, -3.5, 7},
                                              {FidelityAxis::RayTracing, 2, 11.0, -2.0, 7}};
    const std::string text = sensitivity_csv(rows, 7);
    CHECK(text.rfind("# paired_seed=7\n", 0) == 0);
    const auto back = parse_sensitivity_csv(text);
    REQUIRE(back.size() == 2);
    CHECK(back[0].axis == FidelityAxis::Geometry);
    CHECK(back[1].value == 2.0);
    CHECK(back[0].mean_snr_nlos_db == -3.5);
    CHECK_THROWS_AS(parse_sensitivity_csv("x,y\n1,2\n"), DataError);
}

TEST_CASE("full run is deterministic and matches the library") {
    const fs::path dir = scratch("full");
    const fs::path cfg = small_setup(dir);
    const fs::path o1 = dir / "run1", o2 = dir / "run2";
    REQUIRE(invoke({"--config", cfg.string(), "--seed", "5", "--out", o1.string(), "all"}) == kOk);
    REQUIRE(invoke({"--config", cfg.string(), "--seed", "5", "--jobs", "2", "--out", o2.string(), "all"}) == kOk);

    for (const char* f : {"resolved_config.json", "scene.json", "target.jsonl", "twin.jsonl", "clustering_twin.json",
                          "codebook_twin.json", "codebook_target.json", "traces_twin.json", "summary.json",
                          "cdf_twin.csv", "map_twin.csv", "sensitivity.csv", "run_meta.json"})
        CHECK_MESSAGE(fs::exists(o1 / f), f);
    for (const auto& e : fs::directory_iterator(o1)) {
        const std::string name = e.path().filename().string();
        if (name == "run_meta.json" || name == "resolved_config.json") continue;
        CHECK_MESSAGE(slurp(e.path()) == slurp(o2 / name), name);
    }

    // The stored twin codebook is what the library learns from the stored twin dataset.
    RunConfig rc = load_run_config(cfg.string());
    rc.pipeline.seed = 5;
    const ChannelDataset twin = load_dataset((o1 / "twin.jsonl").string());
    const LearnedCodebooks learned = learn_codebooks(twin, rc.pipeline);
    const Codebook stored = load_codebook((o1 / "codebook_twin.json").string());
    CHECK(to_json(stored) == to_json(learned.single()));

    const ChannelDataset target = load_dataset((o1 / "target.jsonl").string());
    const EvalReport r = evaluate_codebook(stored, target, rc.link_budget, "twin");
    const json summary = read_json_file((o1 / "summary.json").string());
    bool found = false;
    for (const json& rep : summary["reports"]) {
        if (rep["method"] != "twin") continue;
        found = true;
        CHECK(rep["mean_db"].get<double>() == doctest::Approx(r.mean_db).epsilon(1e-12));
    }
    CHECK(found);

    const auto sens = parse_sensitivity_csv(slurp(o1 / "sensitivity.csv"));
    CHECK(sens.size() == 2);

    // A different seed changes the learned codebook.
    const fs::path o3 = dir / "run3";
    REQUIRE(invoke({"--config", cfg.string(), "--seed", "6", "--out", o3.string(), "generate"}) == kOk);
    REQUIRE(invoke({"--config", cfg.string(), "--seed", "6", "--out", o3.string(), "train"}) == kOk);
    CHECK(slurp(o3 / "codebook_twin.json") != slurp(o1 / "codebook_twin.json"));
}

TEST_CASE("scene subcommand writes a loadable scene") {
    const fs::path dir = scratch("scene");
    REQUIRE(invoke({"--out", dir.string(), "scene", "toy-manhattan"}) == kOk);
    CHECK(load_scene((dir / "scene.json").string()) == builtin_scene("toy-manhattan"));
}
