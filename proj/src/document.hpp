#pragma once

#include <string>

#include "json.hpp"

namespace pushstab::detail {

// A document is either a JSON object or "key = value" lines whose values are
// JSON fragments (bare words are read as strings). '#' starts a comment.
nlohmann::json parse_document(const std::string& text);
nlohmann::json load_document(const std::string& path);

}  // namespace pushstab::detail
