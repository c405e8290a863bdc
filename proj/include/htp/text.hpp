#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace htp {

// Normalizes clinical narrative text:
//   - tabs and whitespace runs collapse to a single space
//   - commas, hyphens (including en/em dashes), semicolons, single and
//     double quotes (straight and curly), forward and backslashes each
//     become a single space
//   - periods are kept so sentence boundaries survive
//   - leading/trailing whitespace is stripped
// Idempotent: preprocess(preprocess(x)) == preprocess(x).
std::string preprocess(std::string_view raw);

// ASCII lowercase.
std::string to_lower(std::string_view s);

// Splits on whitespace; no empty tokens.
std::vector<std::string> tokenize(std::string_view text);

// Whitespace-delimited token count.
std::size_t count_words(std::string_view text);

// Lookup key normalization: lowercase, collapse whitespace, strip
// surrounding punctuation. Used for ontology labels and sign matching.
std::string normalize_label(std::string_view s);

// Canonical form of a sign: preprocess then lowercase.
std::string canonical_sign(std::string_view s);

bool is_blank(std::string_view s);

// FNV-1a 64-bit over the file bytes, as "fnv1a64:<16 hex digits>".
// Recorded in reports so input provenance is auditable.
std::string file_checksum(const std::filesystem::path& path);

// Fixed-precision decimal formatting; pinned so emitted files are
// byte-stable across runs.
std::string fmt_double(double value, int decimals);

// Minimal RFC-4180 CSV support. Fields are quoted only when needed so
// output bytes stay deterministic.
std::string csv_field(std::string_view field);
std::vector<std::string> parse_csv_line(std::string_view line);
std::vector<std::vector<std::string>> parse_csv(std::string_view content);

} // namespace htp
