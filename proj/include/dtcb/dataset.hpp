// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dtcb/mimo.hpp"
#include "dtcb/scene.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace dtcb {

struct ChannelRecord {
    std::int64_t user_id = 0;  // row-major index into the user grid
    Vec3 position;
    ChannelVector channel;
    bool is_los = false;
};

struct ChannelDataset {
    std::uint64_t scene_hash = 0;
    ArrayConfig array;
    LinkBudget link_budget;
    UserGrid grid;
    int max_reflection_order = 0;
    std::vector<ChannelRecord> records;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    std::vector<ChannelVector> channels() const;
    ChannelBlock block() const;
    std::size_t los_count() const;
    std::size_t outage_count() const;
};

// One record per grid point outside every building footprint of the
// (perturbed) scene. Perturbations use scene.rng_seed.
ChannelDataset generate_dataset(const Scene& scene, const FidelityKnobs& knobs, const ArrayConfig& cfg,
                                const LinkBudget& lb);

// JSON Lines: a header object followed by one object per record.
void write_dataset(std::ostream& out, const ChannelDataset& ds);
ChannelDataset read_dataset(std::istream& in);
void save_dataset(const std::string& path, const ChannelDataset& ds);
ChannelDataset load_dataset(const std::string& path);

} // namespace dtcb
