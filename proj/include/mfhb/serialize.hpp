#pragma once

#include <json.hpp>

#include "mfhb/types.hpp"

namespace mfhb {

// JSON checkpoint format. Field names follow the type definitions exactly and
// doubles round-trip losslessly, so serialize(deserialize(x)) == x bitwise.

nlohmann::json to_json(const ParamPoint& p);
nlohmann::json to_json(const ParticleState& p);
nlohmann::json to_json(const Ensemble& e);
nlohmann::json to_json(const Dataset& d);
nlohmann::json to_json(const RegularizerSpec& r);
nlohmann::json to_json(const RunConfig& c);

ParamPoint param_point_from_json(const nlohmann::json& j);
ParticleState particle_state_from_json(const nlohmann::json& j);
Ensemble ensemble_from_json(const nlohmann::json& j);
Dataset dataset_from_json(const nlohmann::json& j);
RegularizerSpec regularizer_from_json(const nlohmann::json& j);
RunConfig run_config_from_json(const nlohmann::json& j);

}  // namespace mfhb
