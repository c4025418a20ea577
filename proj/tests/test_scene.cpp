// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "dtcb/dataset.hpp"
#include "dtcb/error.hpp"
#include "dtcb/io.hpp"
#include "dtcb/scene.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

using namespace dtcb;

namespace {

const ArrayConfig kCfg = ArrayConfig::half_wavelength(8, 28e9);

Scene open_scene(Vec3 bs, UserGrid grid) {
    Scene s;
    s.name = "test";
    s.bs_position = bs;
    s.materials = {{"m", 6.0}};
    s.user_grid = grid;
    return s;
}

double dist(const Vec3& a, const Vec3& b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

// Independent segment/box test: parametric clipping against the three slabs.
bool segment_hits_box(const Vec3& a, const Vec3& b, const Building& bd) {
    double t0 = 0.0, t1 = 1.0;
    const double lo[3] = {bd.xmin, bd.ymin, 0.0};
    const double hi[3] = {bd.xmax, bd.ymax, bd.height};
    const double p[3] = {a.x, a.y, a.z};
    const double d[3] = {b.x - a.x, b.y - a.y, b.z - a.z};
    for (int i = 0; i < 3; ++i) {
        if (std::abs(d[i]) < 1e-15) {
            if (p[i] <= lo[i] || p[i] >= hi[i]) return false;
            continue;
        }
        double ta = (lo[i] - p[i]) / d[i];
        double tb = (hi[i] - p[i]) / d[i];
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
    }
    return t1 - t0 > 1e-6;
}

std::size_t outage_count(const ChannelDataset& ds) {
    return static_cast<std::size_t>(std::count_if(ds.records.begin(), ds.records.end(),
                                                  [](const ChannelRecord& r) { return r.channel.is_outage(); }));
}

} // namespace

TEST_CASE("los check") {
    Scene s = open_scene({0, 0, 30}, {-30, 30, -30, 30, 1.0, 1.5});
    const Vec3 ue{20, 0, 1.5};
    CHECK(los_check(s, ue));

    s.buildings = {{9, 11, -1, 1, 10.0, "m"}};
    CHECK(los_check(s, ue) == !segment_hits_box(s.bs_position, ue, s.buildings[0]));
    CHECK(los_check(s, ue));

    s.buildings = {{9, 11, -1, 1, 20.0, "m"}};
    CHECK_FALSE(los_check(s, ue));
    CHECK(segment_hits_box(s.bs_position, ue, s.buildings[0]));

    s.buildings = {{5, 15, -2, 2, 100.0, "m"}};
    CHECK_FALSE(los_check(s, ue));
}

TEST_CASE("free-space line of sight path") {
    const Scene s = open_scene({0, 0, 1.5}, {-20, 20, -20, 20, 1.0, 1.5});
    FidelityKnobs k;
    const auto paths = trace_paths(s, k, {10, 0, 1.5}, kCfg);
    REQUIRE(paths.size() == 1);
    CHECK(paths[0].interaction_count == 0);
    const double lambda = kCfg.wavelength();
    CHECK(std::abs(paths[0].gain) == doctest::Approx(lambda / (4 * kPi * 10.0)).epsilon(1e-12));
    CHECK(std::abs(paths[0].gain) == doctest::Approx(8.52e-5).epsilon(2e-3));
    CHECK(std::arg(paths[0].gain) == doctest::Approx(wrap_phase(-kCfg.wavenumber() * 10.0)).epsilon(1e-9));
    CHECK_THROWS_AS(trace_paths(s, k, {30, 0, 1.5}, kCfg), DataError);
}

TEST_CASE("blocked user with no reachable face is in outage") {
    Scene s = open_scene({0, 0, 10}, {-30, 30, -30, 0, 1.0, 1.5});
    s.buildings = {{-5, 5, -12, -8, 50.0, "m"}};
    for (int order = 0; order <= kMaxReflectionOrder; ++order) {
        FidelityKnobs k;
        k.max_reflection_order = order;
        CHECK(trace_paths(s, k, {0, -20, 1.5}, kCfg).empty());
    }
}

TEST_CASE("single wall reflection follows the mirror image") {
    Scene s = open_scene({0, 0, 10}, {-30, 30, -30, 0, 1.0, 1.5});
    s.buildings = {{-50, 50, 5, 6, 100.0, "m"}};
    const Vec3 ue{20, 0, 1.5};
    FidelityKnobs k;
    k.max_reflection_order = 1;
    const auto traced = trace_path_geometry(s, k, ue, kCfg);
    REQUIRE(traced.size() == 2);
    CHECK(traced[0].component.interaction_count == 0);
    const TracedPath& r = traced[1];
    CHECK(r.component.interaction_count == 1);

    // Image of the BS across y = 5 is (0, 10, 10); the ray to the UE meets
    // the wall at x = 10, halfway along the unfolded horizontal run.
    REQUIRE(r.points.size() == 3);
    CHECK(r.points[1].x == doctest::Approx(10.0));
    CHECK(r.points[1].y == doctest::Approx(5.0));
    CHECK(r.points[1].z == doctest::Approx(5.75));
    const double L = std::sqrt(20.0 * 20.0 + 10.0 * 10.0 + 8.5 * 8.5);
    CHECK(r.length == doctest::Approx(L).epsilon(1e-12));
    CHECK(r.length == doctest::Approx(dist(r.points[0], r.points[1]) + dist(r.points[1], r.points[2])).epsilon(1e-12));
    CHECK(r.loss_db == 6.0);
    const double lambda = kCfg.wavelength();
    CHECK(std::abs(r.component.gain) == doctest::Approx(lambda / (4 * kPi * L) * std::pow(10.0, -6.0 / 20)).epsilon(1e-12));
    CHECK(std::cos(r.component.angle_of_arrival) == doctest::Approx(10.0 / std::sqrt(125.0)));
    CHECK(std::cos(traced[0].component.angle_of_arrival) == doctest::Approx(1.0));

    const double d_los = dist(s.bs_position, ue);
    const double ratio = std::abs(r.component.gain) / std::abs(traced[0].component.gain);
    CHECK(ratio == doctest::Approx(std::pow(10.0, -6.0 / 20) * d_los / L).epsilon(1e-12));
}

TEST_CASE("traced paths on the builtin scene") {
    const Scene s = builtin_scene("toy-manhattan");
    const UserGrid& g = s.user_grid;
    FidelityKnobs k4;
    k4.max_reflection_order = 2;
    int checked = 0;
    for (int iy = 0; iy < g.ny(); iy += 3) {
        for (int ix = 0; ix < g.nx(); ix += 4) {
            const Vec3 ue = g.point(ix, iy);
            if (s.inside_building(ue.x, ue.y)) continue;
            ++checked;
            const auto traced = trace_path_geometry(s, k4, ue, kCfg);
            const bool has_los = !traced.empty() && traced.front().component.interaction_count == 0;
            CHECK(los_check(s, ue) == has_los);
            for (const TracedPath& p : traced) {
                double sum = 0.0;
                for (std::size_t i = 0; i + 1 < p.points.size(); ++i) {
                    sum += dist(p.points[i], p.points[i + 1]);
                    for (const Building& b : s.buildings) CHECK_FALSE(segment_hits_box(p.points[i], p.points[i + 1], b));
                }
                CHECK(std::abs(sum - p.length) < 1e-9);
                CHECK(p.component.angle_of_arrival >= 0.0);
                CHECK(p.component.angle_of_arrival <= kPi);
            }
            // Raising the order only appends paths.
            std::vector<PathComponent> prev;
            for (int order = 0; order <= 3; ++order) {
                FidelityKnobs k;
                k.max_reflection_order = order;
                const auto cur = trace_paths(s, k, ue, kCfg);
                REQUIRE(cur.size() >= prev.size());
                for (std::size_t i = 0; i < prev.size(); ++i) {
                    CHECK(cur[i].gain == prev[i].gain);
                    CHECK(cur[i].angle_of_arrival == prev[i].angle_of_arrival);
                }
                prev = cur;
            }
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("scene validation") {
    Scene s = builtin_scene("toy-manhattan");
    CHECK_NOTHROW(s.validate());
    Scene bad = s;
    bad.buildings[0].xmax = bad.buildings[0].xmin;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.user_grid.spacing = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.bs_position = {0.5 * (s.buildings[0].xmin + s.buildings[0].xmax), 0.5 * (s.buildings[0].ymin + s.buildings[0].ymax), 5};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = s;
    bad.buildings[0].material = "unobtainium";
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    CHECK_THROWS_AS(builtin_scene("atlantis"), ConfigError);
    FidelityKnobs k;
    k.max_reflection_order = kMaxReflectionOrder + 1;
    CHECK_THROWS_AS(k.validate(), ConfigError);
    k = {};
    k.geometry_noise_sigma = -1.0;
    CHECK_THROWS_AS(k.validate(), ConfigError);
}

TEST_CASE("builtin toy scene has plaza, canyons and shadowed users") {
    const Scene s = builtin_scene("toy-manhattan");
    CHECK(s.buildings.size() >= 4);
    const UserGrid& g = s.user_grid;
    int los = 0, nlos = 0;
    for (int iy = 0; iy < g.ny(); ++iy)
        for (int ix = 0; ix < g.nx(); ++ix) {
            const Vec3 p = g.point(ix, iy);
            if (s.inside_building(p.x, p.y)) continue;
            (los_check(s, p) ? los : nlos)++;
        }
    CHECK(los > 0);
    CHECK(nlos > 0);
    const auto names = builtin_scene_names();
    CHECK(std::find(names.begin(), names.end(), "toy-manhattan") != names.end());
    CHECK(std::find(names.begin(), names.end(), "open-field") != names.end());
}

TEST_CASE("fidelity perturbation") {
    const Scene s = builtin_scene("toy-manhattan");
    const Scene copy = s;
    FidelityKnobs none;
    CHECK(scene_hash(apply_fidelity(s, none, 1).scene) == scene_hash(s));

    FidelityKnobs concrete;
    concrete.material_override = Material{"concrete", 7.0};
    const Scene c = apply_fidelity(s, concrete, 1).scene;
    for (const Building& b : c.buildings) CHECK(b.material == "concrete");
    CHECK_NOTHROW(c.validate());

    FidelityKnobs jitter;
    jitter.geometry_noise_sigma = 0.5;
    const Scene a = apply_fidelity(s, jitter, 42).scene;
    const Scene b = apply_fidelity(s, jitter, 42).scene;
    const Scene d = apply_fidelity(s, jitter, 43).scene;
    CHECK(a == b);
    CHECK_FALSE(a == d);
    CHECK_FALSE(a == s);
    CHECK(s == copy);
    double max_shift = 0.0;
    for (std::size_t i = 0; i < s.buildings.size(); ++i) {
        max_shift = std::max(max_shift, std::abs(a.buildings[i].xmin - s.buildings[i].xmin));
        CHECK(a.buildings[i].height == s.buildings[i].height);
    }
    CHECK(max_shift > 0.0);
    CHECK(max_shift < 5.0);

    FidelityKnobs delta;
    delta.material_loss_delta_db = -100.0;
    for (const Material& m : apply_fidelity(s, delta, 1).scene.materials) CHECK(m.reflection_loss_db == 0.0);
    delta.material_loss_delta_db = 3.0;
    const Scene up = apply_fidelity(s, delta, 1).scene;
    for (std::size_t i = 0; i < s.materials.size(); ++i)
        CHECK(up.materials[i].reflection_loss_db == doctest::Approx(s.materials[i].reflection_loss_db + 3.0));

    Scene thin = s;
    thin.buildings = {{0, 0.2, 10, 10.2, 5.0, s.materials[0].name}};
    thin.bs_position = {50, 50, 10};
    FidelityKnobs huge;
    huge.geometry_noise_sigma = 10.0;
    int clamped = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const FidelityResult r = apply_fidelity(thin, huge, seed);
        clamped += r.clamped_buildings;
        for (const Building& b : r.scene.buildings) {
            CHECK(b.xmax - b.xmin >= 0.1 - 1e-12);
            CHECK(b.ymax - b.ymin >= 0.1 - 1e-12);
        }
    }
    CHECK(clamped > 0);
}

TEST_CASE("dataset generation") {
    Scene one = open_scene({0, 0, 10}, {5, 5, 5, 5, 1.0, 1.5});
    const ChannelDataset ds1 = generate_dataset(one, {}, kCfg, {});
    REQUIRE(ds1.size() == 1);
    CHECK(ds1.records[0].channel.path_count == 1);
    CHECK(ds1.records[0].is_los);

    Scene boxed = open_scene({0, 0, 10}, {40, 60, -10, 10, 5.0, 1.5});
    boxed.buildings = {{35, 37, -15, 15, 50, "m"}, {63, 65, -15, 15, 50, "m"}, {35, 65, -17, -15, 50, "m"},
                       {35, 65, 15, 17, 50, "m"}};
    FidelityKnobs k0;
    k0.max_reflection_order = 0;
    const ChannelDataset enclosed = generate_dataset(boxed, k0, kCfg, {});
    CHECK(enclosed.size() == 25);
    CHECK(outage_count(enclosed) == enclosed.size());

    const Scene toy = builtin_scene("toy-manhattan");
    std::vector<std::size_t> outages;
    std::size_t los0 = 0;
    for (int order = 0; order <= 2; ++order) {
        FidelityKnobs k;
        k.max_reflection_order = order;
        const ChannelDataset ds = generate_dataset(toy, k, kCfg, {});
        outages.push_back(outage_count(ds));
        if (order == 0) los0 = ds.los_count();
        CHECK(ds.los_count() == los0);
        CHECK(ds.los_count() < ds.size());
        std::vector<std::int64_t> ids;
        for (const auto& r : ds.records) {
            ids.push_back(r.user_id);
            CHECK(r.is_los == los_check(toy, r.position));
            CHECK(r.channel.is_los == r.is_los);
        }
        std::sort(ids.begin(), ids.end());
        CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
    }
    CHECK(outages[0] > 0);
    CHECK(outages[1] < outages[0]);
    CHECK(outages[2] < outages[1]);
}

TEST_CASE("dataset generation is deterministic and round-trips") {
    const Scene toy = builtin_scene("toy-manhattan");
    FidelityKnobs k;
    k.max_reflection_order = 1;
    k.geometry_noise_sigma = 0.5;
    k.material_override = Material{"concrete", 7.0};
    const ChannelDataset a = generate_dataset(toy, k, kCfg, {});
    const ChannelDataset b = generate_dataset(toy, k, kCfg, {});
    std::ostringstream sa, sb;
    write_dataset(sa, a);
    write_dataset(sb, b);
    CHECK(sa.str() == sb.str());

    std::istringstream in(sa.str());
    const ChannelDataset r = read_dataset(in);
    REQUIRE(r.size() == a.size());
    CHECK(r.scene_hash == a.scene_hash);
    CHECK(r.array == a.array);
    CHECK(r.grid == a.grid);
    CHECK(r.max_reflection_order == 1);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(r.records[i].user_id == a.records[i].user_id);
        CHECK(r.records[i].channel.h == a.records[i].channel.h);
        CHECK(r.records[i].channel.path_count == a.records[i].channel.path_count);
        CHECK(r.records[i].is_los == a.records[i].is_los);
    }
    std::ostringstream again;
    write_dataset(again, r);
    CHECK(again.str() == sa.str());

    // Duplicate user ids are rejected.
    std::string text = sa.str();
    const auto first = text.find('\n');
    const auto second = text.find('\n', first + 1);
    const std::string rec = text.substr(first + 1, second - first);
    std::string dup = text.substr(0, first + 1) + rec + rec;
    std::istringstream din(dup);
    CHECK_THROWS_AS(read_dataset(din), DataError);
    std::istringstream empty("");
    CHECK_THROWS_AS(read_dataset(empty), DataError);
}

TEST_CASE("scene files round-trip and report parse positions") {
    const auto dir = std::filesystem::temp_directory_path() / "dtcb_test_scene";
    std::filesystem::create_directories(dir);
    const Scene s = builtin_scene("toy-manhattan");
    const std::string path = (dir / "scene.json").string();
    save_scene(path, s);
    const Scene back = load_scene(path);
    CHECK(back == s);
    CHECK(scene_hash(back) == scene_hash(s));

    write_text_file((dir / "bad.json").string(), "{\n  \"name\": \"x\",\n  \"bs\": [1, 2,,]\n}\n");
    try {
        load_scene((dir / "bad.json").string());
        FAIL("expected a parse error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    CHECK_THROWS_AS(load_scene((dir / "missing.json").string()), DataError);
    std::filesystem::remove_all(dir);
}
