// SPDX-License-Identifier: Apache-2.0
#include "dtcb/cli.hpp"
#include "dtcb/error.hpp"

#include <algorithm>
#include <filesystem>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace dtcb::cli {

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* k) { return it.key() == k; });
        if (!known) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& dst, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return;
    try {
        dst = it->get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type (" + it->type_name() + ")");
    }
}

FidelityKnobs read_knobs(const json& j, const FidelityKnobs& defaults, const std::string& where) {
    check_keys(j, {"max_reflection_order", "geometry_noise_sigma", "material_override", "material_loss_delta_db"},
               where);
    try {
        return fidelity_from_json(j, defaults);
    } catch (const DataError& e) {
        throw ConfigError(where + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(where + ": " + e.what());
    }
}

} // namespace

RunConfig::RunConfig() {
    target_knobs.max_reflection_order = 2;
    twin_knobs.max_reflection_order = 1;
    twin_knobs.geometry_noise_sigma = 0.5;
    twin_knobs.material_override = Material{"concrete", 7.0};
    sensitivity_base = target_knobs;
    axes = {{FidelityAxis::Geometry, {0.5}},
            {FidelityAxis::Material, {-3.0, 3.0}},
            {FidelityAxis::RayTracing, {0.0, 1.0, 2.0}}};
}

ArrayConfig RunConfig::array() const {
    ArrayConfig a;
    a.num_antennas = num_antennas;
    a.carrier_frequency = carrier_frequency;
    a.antenna_spacing = spacing_wavelengths * kSpeedOfLight / carrier_frequency;
    return a;
}

int RunConfig::total_beams() const {
    return pipeline.mode == CodebookMode::Single ? pipeline.codebook_size : pipeline.los_size + pipeline.nlos_size;
}

void RunConfig::validate() const {
    if (scene.empty()) throw ConfigError("scene: empty name");
    if (num_antennas < 1) throw ConfigError("array.num_antennas must be >= 1");
    if (!(spacing_wavelengths > 0.0)) throw ConfigError("array.spacing_wavelengths must be > 0");
    if (!(carrier_frequency > 0.0)) throw ConfigError("array.carrier_frequency must be > 0");
    array().validate();
    link_budget.validate();
    pipeline.validate();
    target_knobs.validate();
    twin_knobs.validate();
    sensitivity_base.validate();
    if (pattern_resolution < 2) throw ConfigError("pattern_resolution must be >= 2");
    if (out.empty()) throw ConfigError("out: empty directory");
}

RunConfig config_from_json(const json& j) {
    RunConfig c;
    check_keys(j, {"scene", "array", "link_budget", "phase_bits", "mode", "codebook_size", "los_size", "nlos_size",
                   "clustering", "ddpg", "target", "twin", "sensitivity", "pattern_resolution", "seed", "jobs", "out"},
               "config");
    read(j, "scene", c.scene, "config");
    if (auto it = j.find("array"); it != j.end()) {
        check_keys(*it, {"num_antennas", "spacing_wavelengths", "carrier_frequency"}, "array");
        read(*it, "num_antennas", c.num_antennas, "array");
        read(*it, "spacing_wavelengths", c.spacing_wavelengths, "array");
        read(*it, "carrier_frequency", c.carrier_frequency, "array");
    }
    if (auto it = j.find("link_budget"); it != j.end()) {
        check_keys(*it, {"eirp_dbm", "noise_figure_db", "bandwidth_hz"}, "link_budget");
        read(*it, "eirp_dbm", c.link_budget.eirp_dbm, "link_budget");
        read(*it, "noise_figure_db", c.link_budget.noise_figure_db, "link_budget");
        read(*it, "bandwidth_hz", c.link_budget.bandwidth_hz, "link_budget");
    }
    PipelineConfig& p = c.pipeline;
    read(j, "phase_bits", p.phase_bits, "config");
    std::string mode = to_string(p.mode);
    read(j, "mode", mode, "config");
    p.mode = codebook_mode_from_string(mode);
    read(j, "codebook_size", p.codebook_size, "config");
    read(j, "los_size", p.los_size, "config");
    read(j, "nlos_size", p.nlos_size, "config");
    if (auto it = j.find("clustering"); it != j.end()) {
        check_keys(*it, {"sensing_beams", "normalize_columns", "max_iters", "tol"}, "clustering");
        read(*it, "sensing_beams", p.sensing_beams, "clustering");
        read(*it, "normalize_columns", p.normalize_columns, "clustering");
        read(*it, "max_iters", p.kmeans_max_iters, "clustering");
        read(*it, "tol", p.kmeans_tol, "clustering");
    }
    if (auto it = j.find("ddpg"); it != j.end()) {
        drl::DdpgConfig& d = p.ddpg;
        check_keys(*it, {"gamma", "tau", "batch_size", "actor_lr", "critic_lr", "episodes", "steps_per_episode",
                         "replay_capacity", "hidden_multiplier", "ou_theta", "ou_sigma", "ou_sigma_min"},
                   "ddpg");
        read(*it, "gamma", d.gamma, "ddpg");
        read(*it, "tau", d.tau, "ddpg");
        read(*it, "batch_size", d.batch_size, "ddpg");
        read(*it, "actor_lr", d.actor_lr, "ddpg");
        read(*it, "critic_lr", d.critic_lr, "ddpg");
        read(*it, "episodes", d.episodes, "ddpg");
        read(*it, "steps_per_episode", d.steps_per_episode, "ddpg");
        read(*it, "replay_capacity", d.replay_capacity, "ddpg");
        read(*it, "hidden_multiplier", d.hidden_multiplier, "ddpg");
        read(*it, "ou_theta", d.ou_theta, "ddpg");
        read(*it, "ou_sigma", d.ou_sigma, "ddpg");
        read(*it, "ou_sigma_min", d.ou_sigma_min, "ddpg");
    }
    if (auto it = j.find("target"); it != j.end()) c.target_knobs = read_knobs(*it, c.target_knobs, "target");
    if (auto it = j.find("twin"); it != j.end()) c.twin_knobs = read_knobs(*it, c.twin_knobs, "twin");
    c.sensitivity_base = c.target_knobs;
    if (auto it = j.find("sensitivity"); it != j.end()) {
        check_keys(*it, {"base", "axes"}, "sensitivity");
        if (auto b = it->find("base"); b != it->end())
            c.sensitivity_base = read_knobs(*b, c.sensitivity_base, "sensitivity.base");
        if (auto a = it->find("axes"); a != it->end()) {
            if (!a->is_object()) throw ConfigError("sensitivity.axes: expected an object");
            c.axes.clear();
            for (auto ax = a->begin(); ax != a->end(); ++ax) {
                AxisSpec spec{fidelity_axis_from_string(ax.key()), {}};
                read(*a, ax.key().c_str(), spec.values, "sensitivity.axes");
                if (!spec.values.empty()) c.axes.push_back(std::move(spec));
            }
        }
    }
    read(j, "pattern_resolution", c.pattern_resolution, "config");
    read(j, "seed", p.seed, "config");
    read(j, "jobs", p.jobs, "config");
    read(j, "out", c.out, "config");
    c.validate();
    return c;
}

json to_json(const RunConfig& c) {
    const PipelineConfig& p = c.pipeline;
    const drl::DdpgConfig& d = p.ddpg;
    json axes = json::object();
    for (const AxisSpec& a : c.axes) axes[to_string(a.axis)] = a.values;
    return {
        {"scene", c.scene},
        {"array",
         {{"num_antennas", c.num_antennas},
          {"spacing_wavelengths", c.spacing_wavelengths},
          {"carrier_frequency", c.carrier_frequency}}},
        {"link_budget", dtcb::to_json(c.link_budget)},
        {"phase_bits", p.phase_bits},
        {"mode", to_string(p.mode)},
        {"codebook_size", p.codebook_size},
        {"los_size", p.los_size},
        {"nlos_size", p.nlos_size},
        {"clustering",
         {{"sensing_beams", p.resolved_sensing_beams(c.array())},
          {"normalize_columns", p.normalize_columns},
          {"max_iters", p.kmeans_max_iters},
          {"tol", p.kmeans_tol}}},
        {"ddpg",
         {{"gamma", d.gamma},
          {"tau", d.tau},
          {"batch_size", d.batch_size},
          {"actor_lr", d.actor_lr},
          {"critic_lr", d.critic_lr},
          {"episodes", d.episodes},
          {"steps_per_episode", d.steps_per_episode},
          {"replay_capacity", d.replay_capacity},
          {"hidden_multiplier", d.hidden_multiplier},
          {"ou_theta", d.ou_theta},
          {"ou_sigma", d.ou_sigma},
          {"ou_sigma_min", d.ou_sigma_min}}},
        {"target", dtcb::to_json(c.target_knobs)},
        {"twin", dtcb::to_json(c.twin_knobs)},
        {"sensitivity", {{"base", dtcb::to_json(c.sensitivity_base)}, {"axes", axes}}},
        {"pattern_resolution", c.pattern_resolution},
        {"seed", p.seed},
        {"jobs", p.jobs},
        {"out", c.out},
    };
}

RunConfig load_run_config(const std::string& path) {
    json j;
    try {
        j = read_json_file(path);
    } catch (const DataError& e) {
        throw ConfigError(e.what());
    }
    return config_from_json(j);
}

Scene resolve_scene(const std::string& name_or_path) {
    for (const std::string& n : builtin_scene_names())
        if (n == name_or_path) return builtin_scene(n);
    if (!std::filesystem::exists(name_or_path))
        throw ConfigError("scene '" + name_or_path + "' is neither a builtin nor an existing file");
    return load_scene(name_or_path);
}

std::string codebook_file(const std::string& source, CodebookMode mode, const std::string& group) {
    if (mode == CodebookMode::Single) return "codebook_" + source + ".json";
    return "codebook_" + source + "_" + group + ".json";
}

std::string sensitivity_csv(const std::vector<SensitivityResult>& rows, std::uint64_t seed) {
    std::ostringstream os;
    os << "# paired_seed=" << seed << '\n';
    os << "axis,value,mean_snr_los_db,mean_snr_nlos_db,seed\n";
    for (const SensitivityResult& r : rows)
        os << to_string(r.axis) << ',' << format_double(r.value) << ',' << format_double(r.mean_snr_los_db) << ','
           << format_double(r.mean_snr_nlos_db) << ',' << r.seed << '\n';
    return os.str();
}

std::vector<SensitivityResult> parse_sensitivity_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<SensitivityResult> out;
    bool header = false;
    auto num = [](const std::string& s) {
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw DataError("sensitivity csv: bad number '" + s + "'");
        return v;
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "axis,value,mean_snr_los_db,mean_snr_nlos_db,seed")
                throw DataError("sensitivity csv: unexpected header");
            header = true;
            continue;
        }
        std::vector<std::string> f;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(cell);
        if (f.size() != 5) throw DataError("sensitivity csv: expected 5 fields");
        SensitivityResult r;
        try {
            r.axis = fidelity_axis_from_string(f[0]);
            r.value = num(f[1]);
            r.mean_snr_los_db = num(f[2]);
            r.mean_snr_nlos_db = num(f[3]);
            r.seed = std::stoull(f[4]);
        } catch (const ConfigError& e) {
            throw DataError(std::string("sensitivity csv: ") + e.what());
        } catch (const std::logic_error&) {
            throw DataError("sensitivity csv: malformed row '" + line + "'");
        }
        out.push_back(r);
    }
    if (!header) throw DataError("sensitivity csv: missing header");
    return out;
}

} // namespace dtcb::cli
