#pragma once

// JSON (de)serialisation of configs, the taxonomy and the place index.
// Missing keys keep their defaults; unknown keys are rejected so typos do
// not silently change an experiment.

#include <filesystem>

#include <json.hpp>

#include "mcs/domain.hpp"
#include "mcs/harness.hpp"
#include "mcs/world.hpp"

namespace mcs {

using Json = nlohmann::json;

Json taxonomy_to_json(const Taxonomy& taxonomy);
Taxonomy taxonomy_from_json(const Json& j);

Json places_to_json(const std::vector<Place>& places);
// Place classes may be given by id or by class name.
std::vector<Place> places_from_json(const Json& j, const Taxonomy& taxonomy);

// {"taxonomy": {...}, "places": [...]} -> validated index.
LocationIndex location_index_from_json(const Json& j, Taxonomy* taxonomy_out = nullptr);

Json world_config_to_json(const WorldConfig& c);
WorldConfig world_config_from_json(const Json& j, WorldConfig base = {});

Json scenario_to_json(const ScenarioConfig& c);
// Starts from ScenarioConfig::defaults() and overrides what j provides.
// Throws InvalidConfig on malformed input.
ScenarioConfig scenario_from_json(const Json& j);

Json read_json_file(const std::filesystem::path& path);
ScenarioConfig load_scenario(const std::filesystem::path& path);

} // namespace mcs
