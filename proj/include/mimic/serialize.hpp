#pragma once

#include "mimic/distill.hpp"

#include <json.hpp>

namespace mimic {

// Shared JSON envelope: {"kind": ..., shapes, row-major parameter arrays,
// activation names, and the config used}. Loading reproduces predictions
// bitwise.
nlohmann::ordered_json to_json(const MlpModel& m);
nlohmann::ordered_json to_json(const SdaModel& m);
nlohmann::ordered_json to_json(const LstmModel& m);
nlohmann::ordered_json to_json(const LinearModel& m);
nlohmann::ordered_json to_json(const Tree& t);
nlohmann::ordered_json to_json(const GbtEnsemble& e);
nlohmann::ordered_json to_json(const MimicModel& m);
nlohmann::ordered_json to_json(const TrainConfig& c);
nlohmann::ordered_json to_json(const TreeConfig& c);

MlpModel mlp_from_json(const nlohmann::json& j);
SdaModel sda_from_json(const nlohmann::json& j);
LstmModel lstm_from_json(const nlohmann::json& j);
LinearModel linear_from_json(const nlohmann::json& j);
Tree tree_from_json(const nlohmann::json& j);
GbtEnsemble gbt_from_json(const nlohmann::json& j);
MimicModel mimic_from_json(const nlohmann::json& j);
TrainConfig train_config_from_json(const nlohmann::json& j);
TreeConfig tree_config_from_json(const nlohmann::json& j);

} // namespace mimic
