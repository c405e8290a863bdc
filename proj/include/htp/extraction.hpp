#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "htp/backend.hpp"
#include "htp/types.hpp"

namespace htp {

struct IdentifyOptions {
    bool include_synopsis = true;
    RetryPolicy retry;
};

// Composes the summary text handed to the identify stage: labeled
// Description and Clinical Features sections, plus the Clinical
// Synopsis when present and enabled.
std::string compose_document(const ClinicalSummary& summary, bool include_synopsis);

// Parses a raw identify response: a JSON object whose "Signs" key maps
// to an array of strings. Tolerates code fences and surrounding prose;
// accepts single-quote-relaxed JSON (reported via `relaxed`). Empty and
// duplicate entries are dropped; parse failures throw ParseError.
std::vector<Sign> parse_sign_response(std::string_view raw, bool* relaxed = nullptr);

// Extracts signs for one usable summary through the backend. The result
// is ordered, de-duplicated case-insensitively, and preprocessed; an
// empty list marks the disease unusable downstream. Transport and parse
// failures are retried up to the policy bound (skipped for
// deterministic backends) and then rethrown.
std::vector<Sign> identify_signs(Backend& backend, const ClinicalSummary& summary,
                                 const IdentifyOptions& options = {},
                                 LlmExchange* exchange = nullptr);

// Deterministic whole-word scan: reports each lexicon phrase occurring
// in the text, longest phrase winning at overlapping positions, ordered
// by first occurrence, each phrase reported once.
std::vector<Sign> lexicon_extract(const std::vector<std::string>& lexicon, std::string_view text);

} // namespace htp
