#pragma once

// Internal: JSON (de)serialization shared by model and stacked-model files.

#include "stackcast/models.hpp"

#include <json.hpp>

namespace stackcast {

nlohmann::ordered_json model_to_json(const ForecastModel& model);
ForecastModel model_from_json(const nlohmann::ordered_json& j);

} // namespace stackcast
