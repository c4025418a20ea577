// SPDX-License-Identifier: Apache-2.0
//
// Structured-text persistence for scenes, codebooks and clusterings.
#pragma once

#include "dtcb/mimo.hpp"
#include "dtcb/scene.hpp"

#include "json.hpp"
#include <string>

namespace dtcb {

using json = nlohmann::json;

json to_json(const Scene& scene);
Scene scene_from_json(const json& j);

// Parse failures are reported as DataError with the line and column.
json parse_json_text(const std::string& text, const std::string& origin);
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

Scene load_scene(const std::string& path);
void save_scene(const std::string& path, const Scene& scene);

json to_json(const ArrayConfig& cfg);
ArrayConfig array_config_from_json(const json& j);
json to_json(const LinkBudget& lb);
LinkBudget link_budget_from_json(const json& j);
json to_json(const Material& m);
Material material_from_json(const json& j);
json to_json(const FidelityKnobs& k);
FidelityKnobs fidelity_from_json(const json& j, const FidelityKnobs& defaults = {});

json to_json(const Codebook& cb);
Codebook codebook_from_json(const json& j);
void save_codebook(const std::string& path, const Codebook& cb);
Codebook load_codebook(const std::string& path);

// Shortest decimal text that round-trips, "inf"/"-inf"/"nan" otherwise.
std::string format_double(double v);

} // namespace dtcb
