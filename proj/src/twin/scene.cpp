// SPDX-License-Identifier: Apache-2.0
#include "dtcb/error.hpp"
#include "dtcb/rng.hpp"
#include "dtcb/scene.hpp"

#include <algorithm>
#include <random>

namespace dtcb {

namespace {

constexpr double kMinExtent = 0.1;

bool clamp_extent(double& lo, double& hi) {
    if (hi - lo >= kMinExtent) return false;
    const double mid = 0.5 * (lo + hi);
    lo = mid - 0.5 * kMinExtent;
    hi = mid + 0.5 * kMinExtent;
    return true;
}

// One BS on a building facade looking south (-y) over an open plaza.
// Two perpendicular street canyons leave the plaza: one running east
// between y = -30 and y = -20, one running south between x = -40 and
// x = -28. Both are only partly visible from the BS, so their far ends
// are reached through wall reflections.
Scene toy_manhattan() {
    Scene s;
    s.name = "toy-manhattan";
    s.bs_position = {0.0, 0.0, 20.0};
    s.bs_boresight = -kPi / 2;
    s.materials = {{"concrete", 7.0}, {"glass", 4.0}, {"brick", 10.0}};
    s.buildings = {
        {-30.0, 30.0, 2.0, 30.0, 25.0, "concrete"},     // hosts the BS
        {40.0, 130.0, -20.0, 10.0, 35.0, "glass"},      // north side of the east street
        {40.0, 130.0, -40.0, -30.0, 30.0, "brick"},     // south side of the east street
        {-28.0, 130.0, -140.0, -40.0, 40.0, "glass"},   // south of the plaza
        {-130.0, -40.0, -140.0, 10.0, 30.0, "brick"},   // west of the plaza
    };
    s.user_grid = {-110.0, 110.0, -130.0, -4.0, 2.0, 1.5};
    s.rng_seed = 7;
    return s;
}

Scene open_field() {
    Scene s;
    s.name = "open-field";
    s.bs_position = {0.0, 0.0, 20.0};
    s.bs_boresight = -kPi / 2;
    s.materials = {{"concrete", 7.0}};
    s.user_grid = {-50.0, 50.0, -60.0, -10.0, 5.0, 1.5};
    s.rng_seed = 1;
    return s;
}

} // namespace

FidelityResult apply_fidelity(const Scene& scene, const FidelityKnobs& knobs, std::uint64_t seed) {
    knobs.validate();
    FidelityResult out{scene, 0};
    Scene& s = out.scene;

    if (knobs.geometry_noise_sigma > 0.0) {
        Rng rng(seed);
        std::normal_distribution<double> noise(0.0, knobs.geometry_noise_sigma);
        for (Building& b : s.buildings) {
            b.xmin += noise(rng);
            b.xmax += noise(rng);
            b.ymin += noise(rng);
            b.ymax += noise(rng);
            const bool cx = clamp_extent(b.xmin, b.xmax);
            const bool cy = clamp_extent(b.ymin, b.ymax);
            if (cx || cy) ++out.clamped_buildings;
        }
    }

    if (knobs.material_override) {
        const Material& m = *knobs.material_override;
        auto it = std::find_if(s.materials.begin(), s.materials.end(),
                               [&](const Material& x) { return x.name == m.name; });
        if (it == s.materials.end())
            s.materials.push_back(m);
        else
            *it = m;
        for (Building& b : s.buildings) b.material = m.name;
    }

    if (knobs.material_loss_delta_db != 0.0) {
        for (Material& m : s.materials)
            m.reflection_loss_db = std::max(0.0, m.reflection_loss_db + knobs.material_loss_delta_db);
    }
    return out;
}

Scene builtin_scene(const std::string& name) {
    if (name == "toy-manhattan") return toy_manhattan();
    if (name == "open-field") return open_field();
    throw ConfigError("unknown builtin scene '" + name + "'");
}

std::vector<std::string> builtin_scene_names() { return {"toy-manhattan", "open-field"}; }

} // namespace dtcb
