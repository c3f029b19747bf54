#pragma once

// JSON output with floats at 17 significant digits.

#include <json.hpp>

#include <string>

namespace fock::detail {

std::string json_text(const nlohmann::json& j, int indent = 2);

}  // namespace fock::detail
