// SPDX-License-Identifier: Apache-2.0
#include "dtcb/dataset.hpp"
#include "dtcb/error.hpp"
#include "dtcb/io.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace dtcb {

std::vector<ChannelVector> ChannelDataset::channels() const {
    std::vector<ChannelVector> out;
    out.reserve(records.size());
    for (const ChannelRecord& r : records) out.push_back(r.channel);
    return out;
}

ChannelBlock ChannelDataset::block() const {
    std::vector<const ChannelVector*> ptrs;
    ptrs.reserve(records.size());
    for (const ChannelRecord& r : records) ptrs.push_back(&r.channel);
    return ChannelBlock(std::span<const ChannelVector* const>(ptrs), static_cast<std::size_t>(array.num_antennas));
}

std::size_t ChannelDataset::los_count() const {
    std::size_t n = 0;
    for (const ChannelRecord& r : records) n += r.is_los ? 1 : 0;
    return n;
}

std::size_t ChannelDataset::outage_count() const {
    std::size_t n = 0;
    for (const ChannelRecord& r : records) n += r.channel.is_outage() ? 1 : 0;
    return n;
}

ChannelDataset generate_dataset(const Scene& scene, const FidelityKnobs& knobs, const ArrayConfig& cfg,
                                const LinkBudget& lb) {
    scene.validate();
    knobs.validate();
    cfg.validate();
    lb.validate();
    const Scene effective = apply_fidelity(scene, knobs, scene.rng_seed).scene;
    // Geometry and materials are already baked into `effective`.
    FidelityKnobs tracing;
    tracing.max_reflection_order = knobs.max_reflection_order;

    ChannelDataset ds;
    ds.scene_hash = scene_hash(effective);
    ds.array = cfg;
    ds.link_budget = lb;
    ds.grid = scene.user_grid;
    ds.max_reflection_order = knobs.max_reflection_order;

    const UserGrid& g = scene.user_grid;
    const int nx = g.nx();
    const int ny = g.ny();
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const Vec3 ue = g.point(ix, iy);
            if (effective.inside_building(ue.x, ue.y)) continue;
            const std::vector<PathComponent> paths = trace_paths(effective, tracing, ue, cfg);
            ChannelRecord rec;
            rec.user_id = static_cast<std::int64_t>(iy) * nx + ix;
            rec.position = ue;
            rec.channel = synth_channel(cfg, paths);
            rec.is_los = rec.channel.is_los;
            ds.records.push_back(std::move(rec));
        }
    }
    return ds;
}

void write_dataset(std::ostream& out, const ChannelDataset& ds) {
    const UserGrid& g = ds.grid;
    json header = {
        {"type", "channel_dataset"},
        {"scene_hash", ds.scene_hash},
        {"array_config", to_json(ds.array)},
        {"link_budget", to_json(ds.link_budget)},
        {"user_grid", {{"xmin", g.xmin}, {"xmax", g.xmax}, {"ymin", g.ymin}, {"ymax", g.ymax},
                       {"spacing", g.spacing}, {"height", g.height}}},
        {"max_reflection_order", ds.max_reflection_order},
        {"num_records", ds.records.size()},
    };
    out << header.dump() << '\n';
    std::vector<double> re;
    std::vector<double> im;
    for (const ChannelRecord& r : ds.records) {
        re.clear();
        im.clear();
        for (const cplx& x : r.channel.h) {
            re.push_back(x.real());
            im.push_back(x.imag());
        }
        json rec = {{"id", r.user_id},
                    {"pos", {r.position.x, r.position.y, r.position.z}},
                    {"h_re", re},
                    {"h_im", im},
                    {"los", r.is_los},
                    {"paths", r.channel.path_count}};
        out << rec.dump() << '\n';
    }
}

ChannelDataset read_dataset(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    auto next = [&](json& j) {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            j = parse_json_text(line, "dataset line " + std::to_string(lineno));
            return true;
        }
        return false;
    };
    json header;
    if (!next(header) || header.value("type", "") != "channel_dataset")
        throw DataError("dataset: missing header record");
    ChannelDataset ds;
    try {
        ds.scene_hash = header.at("scene_hash").get<std::uint64_t>();
        ds.array = array_config_from_json(header.at("array_config"));
        ds.link_budget = link_budget_from_json(header.at("link_budget"));
        const json& g = header.at("user_grid");
        ds.grid = {g.at("xmin").get<double>(), g.at("xmax").get<double>(), g.at("ymin").get<double>(),
                   g.at("ymax").get<double>(), g.at("spacing").get<double>(), g.at("height").get<double>()};
        ds.max_reflection_order = header.at("max_reflection_order").get<int>();
    } catch (const json::exception& e) {
        throw DataError(std::string("dataset header: ") + e.what());
    }
    const std::size_t M = static_cast<std::size_t>(ds.array.num_antennas);
    std::unordered_set<std::int64_t> seen;
    json j;
    while (next(j)) {
        ChannelRecord r;
        try {
            r.user_id = j.at("id").get<std::int64_t>();
            const json& p = j.at("pos");
            r.position = {p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>()};
            const auto re = j.at("h_re").get<std::vector<double>>();
            const auto im = j.at("h_im").get<std::vector<double>>();
            if (re.size() != M || im.size() != M)
                throw DataError("dataset line " + std::to_string(lineno) + ": channel width mismatch");
            r.channel.h.resize(M);
            for (std::size_t m = 0; m < M; ++m) r.channel.h[m] = cplx(re[m], im[m]);
            r.is_los = j.at("los").get<bool>();
            r.channel.is_los = r.is_los;
            r.channel.path_count = j.value("paths", r.is_los ? 1 : 0);
        } catch (const json::exception& e) {
            throw DataError("dataset line " + std::to_string(lineno) + ": " + e.what());
        }
        if (!seen.insert(r.user_id).second)
            throw DataError("dataset: duplicate user id " + std::to_string(r.user_id));
        ds.records.push_back(std::move(r));
    }
    if (header.contains("num_records") && header["num_records"].get<std::size_t>() != ds.records.size())
        throw DataError("dataset: record count does not match the header");
    return ds;
}

void save_dataset(const std::string& path, const ChannelDataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    write_dataset(out, ds);
}

ChannelDataset load_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path + "'");
    return read_dataset(in);
}

} // namespace dtcb
