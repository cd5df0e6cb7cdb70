#pragma once

#include <string>

#include <nlohmann/json.hpp>

namespace echoreason {

// Compact (or 2-space indented) serialisation that never throws on invalid
// UTF-8: bad bytes are replaced with U+FFFD. Output ends with a newline.
std::string DumpJson(const nlohmann::json& doc, bool pretty = false);

}  // namespace echoreason
