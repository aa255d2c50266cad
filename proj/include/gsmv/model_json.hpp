#pragma once

#include "gsmv/model.hpp"

#include <json.hpp>

#include <string>

namespace gsmv {

// JSON mirror of the text format (extension .gsm.json). Conditions,
// sentry conditions and task assignments are embedded as text fragments in
// the model syntax.
nlohmann::json model_to_json(const GsmModel &model);
GsmModel model_from_json(const nlohmann::json &doc);
GsmModel model_from_json_text(const std::string &text);

} // namespace gsmv
