// SPDX-License-Identifier: Apache-2.0
#include "dtcb/io.hpp"
#include "dtcb/error.hpp"
#include "dtcb/rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace dtcb {

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    return it->get<T>();
}

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw DataError(where + ": missing key '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception& e) {
        throw DataError(where + ": bad value for '" + key + "': " + e.what());
    }
}

Vec3 vec3_from_json(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 3) throw DataError(where + ": expected [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

} // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        // Translate the byte offset into line/column.
        std::size_t line = 1;
        std::size_t col = 1;
        const std::size_t end = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
        for (std::size_t i = 0; i < end; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw DataError(origin + ":" + std::to_string(line) + ":" + std::to_string(col) +
                        ": parse error: " + e.what());
    }
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_json_text(ss.str(), path);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << text;
    if (!out) throw DataError("write failed for '" + path + "'");
}

json to_json(const Material& m) { return {{"name", m.name}, {"reflection_loss_db", m.reflection_loss_db}}; }

Material material_from_json(const json& j) {
    return {require<std::string>(j, "name", "material"), require<double>(j, "reflection_loss_db", "material")};
}

json to_json(const Scene& s) {
    json buildings = json::array();
    for (const Building& b : s.buildings) {
        buildings.push_back({{"xmin", b.xmin}, {"xmax", b.xmax}, {"ymin", b.ymin}, {"ymax", b.ymax},
                             {"height", b.height}, {"material", b.material}});
    }
    json materials = json::array();
    for (const Material& m : s.materials) materials.push_back(to_json(m));
    const UserGrid& g = s.user_grid;
    return {
        {"name", s.name},
        {"bs", {{"position", {s.bs_position.x, s.bs_position.y, s.bs_position.z}},
                {"boresight_azimuth", s.bs_boresight}}},
        {"materials", materials},
        {"buildings", buildings},
        {"user_grid", {{"xmin", g.xmin}, {"xmax", g.xmax}, {"ymin", g.ymin}, {"ymax", g.ymax},
                       {"spacing", g.spacing}, {"height", g.height}}},
        {"rng_seed", s.rng_seed},
    };
}

Scene scene_from_json(const json& j) {
    const std::string where = "scene";
    if (!j.is_object()) throw DataError("scene: expected an object");
    Scene s;
    s.name = get_or<std::string>(j, "name", "");
    const json& bs = require<json>(j, "bs", where);
    s.bs_position = vec3_from_json(require<json>(bs, "position", "scene.bs"), "scene.bs.position");
    s.bs_boresight = get_or<double>(bs, "boresight_azimuth", -kPi / 2);
    for (const json& m : require<json>(j, "materials", where)) s.materials.push_back(material_from_json(m));
    for (const json& b : require<json>(j, "buildings", where)) {
        s.buildings.push_back({require<double>(b, "xmin", "building"), require<double>(b, "xmax", "building"),
                               require<double>(b, "ymin", "building"), require<double>(b, "ymax", "building"),
                               require<double>(b, "height", "building"),
                               require<std::string>(b, "material", "building")});
    }
    const json& g = require<json>(j, "user_grid", where);
    s.user_grid = {require<double>(g, "xmin", "user_grid"), require<double>(g, "xmax", "user_grid"),
                   require<double>(g, "ymin", "user_grid"), require<double>(g, "ymax", "user_grid"),
                   require<double>(g, "spacing", "user_grid"), get_or<double>(g, "height", 1.5)};
    s.rng_seed = get_or<std::uint64_t>(j, "rng_seed", 0);
    s.validate();
    return s;
}

std::uint64_t scene_hash(const Scene& scene) { return fnv1a(to_json(scene).dump()); }

Scene load_scene(const std::string& path) { return scene_from_json(read_json_file(path)); }

void save_scene(const std::string& path, const Scene& scene) {
    write_text_file(path, to_json(scene).dump(2) + "\n");
}

json to_json(const ArrayConfig& cfg) {
    return {{"num_antennas", cfg.num_antennas},
            {"antenna_spacing", cfg.antenna_spacing},
            {"carrier_frequency", cfg.carrier_frequency}};
}

ArrayConfig array_config_from_json(const json& j) {
    ArrayConfig cfg;
    cfg.num_antennas = require<int>(j, "num_antennas", "array_config");
    cfg.antenna_spacing = require<double>(j, "antenna_spacing", "array_config");
    cfg.carrier_frequency = require<double>(j, "carrier_frequency", "array_config");
    cfg.validate();
    return cfg;
}

json to_json(const LinkBudget& lb) {
    return {{"eirp_dbm", lb.eirp_dbm}, {"noise_figure_db", lb.noise_figure_db}, {"bandwidth_hz", lb.bandwidth_hz}};
}

LinkBudget link_budget_from_json(const json& j) {
    LinkBudget lb;
    lb.eirp_dbm = get_or<double>(j, "eirp_dbm", lb.eirp_dbm);
    lb.noise_figure_db = get_or<double>(j, "noise_figure_db", lb.noise_figure_db);
    lb.bandwidth_hz = get_or<double>(j, "bandwidth_hz", lb.bandwidth_hz);
    lb.validate();
    return lb;
}

json to_json(const FidelityKnobs& k) {
    return {{"max_reflection_order", k.max_reflection_order},
            {"geometry_noise_sigma", k.geometry_noise_sigma},
            {"material_override", k.material_override ? to_json(*k.material_override) : json(nullptr)},
            {"material_loss_delta_db", k.material_loss_delta_db}};
}

FidelityKnobs fidelity_from_json(const json& j, const FidelityKnobs& defaults) {
    FidelityKnobs k = defaults;
    if (j.is_null()) return k;
    k.max_reflection_order = get_or<int>(j, "max_reflection_order", k.max_reflection_order);
    k.geometry_noise_sigma = get_or<double>(j, "geometry_noise_sigma", k.geometry_noise_sigma);
    if (auto it = j.find("material_override"); it != j.end())
        k.material_override = it->is_null() ? std::nullopt : std::optional<Material>(material_from_json(*it));
    k.material_loss_delta_db = get_or<double>(j, "material_loss_delta_db", k.material_loss_delta_db);
    k.validate();
    return k;
}

json to_json(const Codebook& cb) {
    json beams = json::array();
    for (std::size_t n = 0; n < cb.beams.size(); ++n) {
        json b = {{"label", n < cb.labels.size() ? cb.labels[n] : ""}, {"phases", cb.beams[n].phases()}};
        if (n < cb.zero_gain.size() && cb.zero_gain[n]) b["zero_gain"] = true;
        beams.push_back(std::move(b));
    }
    json ps = nullptr;
    if (cb.phase_set) ps = {{"bits", cb.phase_set->bits()}, {"values", cb.phase_set->values()}};
    return {{"array_config", to_json(cb.array)}, {"phase_set", ps}, {"beams", beams}};
}

Codebook codebook_from_json(const json& j) {
    Codebook cb;
    cb.array = array_config_from_json(require<json>(j, "array_config", "codebook"));
    const json ps = get_or<json>(j, "phase_set", json(nullptr));
    if (!ps.is_null()) cb.phase_set = PhaseSet(require<int>(ps, "bits", "codebook.phase_set"));
    for (const json& b : require<json>(j, "beams", "codebook")) {
        auto phases = require<std::vector<double>>(b, "phases", "codebook.beam");
        if (phases.size() != static_cast<std::size_t>(cb.array.num_antennas))
            throw DataError("codebook: beam width does not match the array");
        if (cb.phase_set) {
            for (double p : phases)
                if (!cb.phase_set->contains(p)) throw DataError("codebook: phase outside the phase set");
        }
        cb.add(Beam(std::move(phases)), get_or<std::string>(b, "label", ""), get_or<bool>(b, "zero_gain", false));
    }
    if (cb.beams.empty()) throw DataError("codebook: no beams");
    return cb;
}

void save_codebook(const std::string& path, const Codebook& cb) {
    write_text_file(path, to_json(cb).dump(2) + "\n");
}

Codebook load_codebook(const std::string& path) { return codebook_from_json(read_json_file(path)); }

} // namespace dtcb
