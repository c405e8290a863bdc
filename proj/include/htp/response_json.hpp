#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

#include "htp/errors.hpp"

namespace htp {

// Extracts the first balanced JSON object from raw model output,
// tolerating surrounding prose and Markdown code fences. Strict JSON is
// tried first; if that fails, a single-quote-relaxed reading is
// attempted and `relaxed` (when non-null) is set so runs can report the
// relaxation. No other repair is performed.
nlohmann::json extract_json_object(std::string_view raw, bool* relaxed = nullptr);

// Strips a leading/trailing Markdown code fence pair if present.
std::string_view strip_code_fence(std::string_view raw);

// Rewrites single-quoted strings to double-quoted JSON strings. Exposed
// for tests.
std::string relax_single_quotes(std::string_view text);

} // namespace htp
