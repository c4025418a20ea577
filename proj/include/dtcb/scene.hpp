// SPDX-License-Identifier: Apache-2.0
//
// 2.5D urban scene (extruded axis-aligned buildings), fidelity degradation
// knobs, and a specular image-method ray tracer over vertical building faces.
#pragma once

#include "dtcb/mimo.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace dtcb {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    bool operator==(const Vec3&) const = default;
};

struct Material {
    std::string name;
    double reflection_loss_db = 0.0;  // per bounce
    bool operator==(const Material&) const = default;
};

struct Building {
    double xmin, xmax, ymin, ymax;
    double height;
    std::string material;
    bool operator==(const Building&) const = default;

    bool contains_xy(double x, double y) const {
        return x >= xmin && x <= xmax && y >= ymin && y <= ymax;
    }
};

struct UserGrid {
    double xmin = 0.0, xmax = 0.0, ymin = 0.0, ymax = 0.0;
    double spacing = 1.0;
    double height = 1.5;
    bool operator==(const UserGrid&) const = default;

    int nx() const;
    int ny() const;
    Vec3 point(int ix, int iy) const { return {xmin + ix * spacing, ymin + iy * spacing, height}; }
    bool contains(const Vec3& p) const;
};

struct Scene {
    std::string name;
    Vec3 bs_position;
    double bs_boresight = -kPi / 2;  // azimuth of the array broadside, radians
    std::vector<Material> materials;
    std::vector<Building> buildings;
    UserGrid user_grid;
    std::uint64_t rng_seed = 0;

    bool operator==(const Scene&) const = default;

    // Throws ConfigError on degenerate buildings, unknown materials, a
    // non-positive grid spacing or a BS inside a building.
    void validate() const;
    const Material& material(const std::string& name) const;
    bool inside_building(double x, double y) const;
};

struct FidelityKnobs {
    int max_reflection_order = 2;
    double geometry_noise_sigma = 0.0;     // meters, per rectangle coordinate
    std::optional<Material> material_override;
    double material_loss_delta_db = 0.0;   // added to every per-bounce loss, floored at 0

    void validate() const;
    bool operator==(const FidelityKnobs&) const = default;
};

inline constexpr int kMaxReflectionOrder = 4;

// True iff the segment BS -> UE crosses no building volume.
bool los_check(const Scene& scene, const Vec3& ue);

// LoS path (when unblocked) followed by every valid specular reflection path
// of order 1..max_reflection_order, in a deterministic order such that the
// result for order k is a prefix of the result for order k+1.
// Throws DataError when the UE lies outside the user grid.
std::vector<PathComponent> trace_paths(const Scene& scene, const FidelityKnobs& knobs, const Vec3& ue,
                                       const ArrayConfig& cfg);

// Geometry of one traced path, for inspection and tests.
struct TracedPath {
    std::vector<Vec3> points;  // BS, reflection points..., UE
    std::vector<int> faces;    // face index per reflection
    double length = 0.0;       // 3D unfolded length
    double loss_db = 0.0;      // summed per-bounce loss
    PathComponent component;
};
std::vector<TracedPath> trace_path_geometry(const Scene& scene, const FidelityKnobs& knobs,
                                            const Vec3& ue, const ArrayConfig& cfg);

struct FidelityResult {
    Scene scene;
    int clamped_buildings = 0;  // footprints clamped to the minimum extent
};

// Perturbed copy of the scene: coordinates jittered by N(0, sigma^2) drawn
// from `seed`, material override and loss delta applied.
FidelityResult apply_fidelity(const Scene& scene, const FidelityKnobs& knobs, std::uint64_t seed);

std::uint64_t scene_hash(const Scene& scene);

// Built-in scenarios. Known names: "toy-manhattan", "open-field".
Scene builtin_scene(const std::string& name);
std::vector<std::string> builtin_scene_names();

} // namespace dtcb
