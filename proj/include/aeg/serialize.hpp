#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "aeg/classifier.hpp"
#include "aeg/features.hpp"
#include "aeg/game.hpp"
#include "aeg/generator.hpp"

namespace aeg {

using Json = nlohmann::ordered_json;

// Doubles are written as the shortest decimal that parses back to the same
// value, so every round trip is bit-exact. Readers reject unknown keys.

Json to_json(const FeatureMap& map);
FeatureMap feature_map_from_json(const Json& j);

/// {feature_map, num_classes, weights, l2_reg, trained_with:{algorithm, epsilon?, seed?}}
Json to_json(const LinearClassifier& f);
LinearClassifier classifier_from_json(const Json& j);

/// {kind, epsilon, ...kind-specific fields}
Json to_json(const Generator& g);
Generator generator_from_json(const Json& j);

Json to_json(const TrainOptions& o);
TrainOptions train_options_from_json(const Json& j);

Json to_json(const SolverSettings& s);
SolverSettings solver_settings_from_json(const Json& j);

/// GameConfig fields; datasets are referenced by path.
Json game_config_to_json(const GameConfig& cfg, const std::string& target_path, const std::string& reference_path);

/// Parses text, naming `source_name` on failure.
Json parse_json(std::string_view text, const std::string& source_name);
Json load_json(const std::string& path);
void save_json(const Json& j, const std::string& path);

LinearClassifier load_model(const std::string& path);
void save_model(const LinearClassifier& f, const std::string& path);
Generator load_generator(const std::string& path);
void save_generator(const Generator& g, const std::string& path);

}  // namespace aeg
