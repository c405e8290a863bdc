#include "htp/extraction.hpp"

#include <set>

#include <json.hpp>

#include "htp/response_json.hpp"
#include "htp/text.hpp"

namespace htp {

namespace {

// Tokens with their start offset in the preprocessed text, used for
// whole-word phrase matching.
struct TokenAt {
    std::string text;
    std::size_t offset;
};

std::vector<TokenAt> tokens_with_offsets(std::string_view text) {
    std::vector<TokenAt> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && (text[i] == ' ' || text[i] == '\n' || text[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < text.size() && text[i] != ' ' && text[i] != '\n' && text[i] != '\t') ++i;
        if (i > start) out.push_back({std::string(text.substr(start, i - start)), start});
    }
    return out;
}

// Sentence punctuation sticks to tokens after preprocessing ("noted.");
// strip it for word comparison.
std::string word_key(std::string_view token) {
    return normalize_label(token);
}

} // namespace

std::string compose_document(const ClinicalSummary& summary, bool include_synopsis) {
    std::string doc;
    auto add_section = [&](std::string_view title, const std::string& body) {
        if (is_blank(body)) return;
        if (!doc.empty()) doc += "\n\n";
        doc += title;
        doc += ":\n";
        doc += body;
    };
    add_section("Description", summary.description);
    add_section("Clinical Features", summary.clinical_features);
    if (include_synopsis) add_section("Clinical Synopsis", summary.clinical_synopsis);
    return doc;
}

std::vector<Sign> parse_sign_response(std::string_view raw, bool* relaxed) {
    const nlohmann::json doc = extract_json_object(raw, relaxed);
    if (!doc.is_object()) throw ParseError("identify response is not a JSON object");
    auto it = doc.find("Signs");
    if (it == doc.end()) throw ParseError("identify response is missing the \"Signs\" key");
    if (!it->is_array()) throw ParseError("identify response \"Signs\" is not an array");

    std::vector<Sign> signs;
    std::set<std::string> seen;
    for (const nlohmann::json& member : *it) {
        if (!member.is_string()) {
            throw ParseError("identify response \"Signs\" contains a non-string member: " + member.dump());
        }
        const std::string raw_sign = member.get<std::string>();
        const std::string canonical = canonical_sign(raw_sign);
        if (canonical.empty()) continue;
        if (!seen.insert(canonical).second) continue;
        signs.push_back(Sign::make(raw_sign));
    }
    return signs;
}

std::vector<Sign> identify_signs(Backend& backend, const ClinicalSummary& summary,
                                 const IdentifyOptions& options, LlmExchange* exchange) {
    if (!is_usable(summary)) {
        throw ValidationError("summary for MIM " + summary.mim.str() +
                              " is not usable; callers must filter via is_usable");
    }
    const std::string document = compose_document(summary, options.include_synopsis);
    auto rendered = identify_prompt().render({{"text", document}});

    StageRequest request;
    request.stage = Stage::identify;
    request.context_key = summary.mim.str();
    request.system_text = std::move(rendered.system_text);
    request.user_text = std::move(rendered.user_text);
    request.document = document;

    LlmExchange local;
    LlmExchange& log = exchange ? *exchange : local;
    log.stage = Stage::identify;
    log.context_key = request.context_key;

    return call_stage(
        backend, request, options.retry,
        [&](const std::string& raw) {
            bool relaxed = false;
            std::vector<Sign> signs = parse_sign_response(raw, &relaxed);
            log.relaxed_json = relaxed;
            return signs;
        },
        &log);
}

std::vector<Sign> lexicon_extract(const std::vector<std::string>& lexicon, std::string_view text) {
    // Phrases as word-key sequences; empty phrases are ignored.
    std::vector<std::vector<std::string>> phrase_words;
    phrase_words.reserve(lexicon.size());
    for (const std::string& phrase : lexicon) {
        std::vector<std::string> words;
        for (const std::string& tok : tokenize(canonical_sign(phrase))) {
            const std::string key = word_key(tok);
            if (!key.empty()) words.push_back(key);
        }
        phrase_words.push_back(std::move(words));
    }

    const std::string canonical = canonical_sign(text);
    const std::vector<TokenAt> tokens = tokens_with_offsets(canonical);
    std::vector<std::string> token_keys(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) token_keys[i] = word_key(tokens[i].text);

    std::vector<Sign> found;
    std::set<std::string> seen;
    std::size_t pos = 0;
    while (pos < tokens.size()) {
        std::size_t best_len = 0;
        std::size_t best_phrase = 0;
        for (std::size_t p = 0; p < phrase_words.size(); ++p) {
            const auto& words = phrase_words[p];
            if (words.empty() || words.size() > tokens.size() - pos) continue;
            if (words.size() <= best_len) continue;
            bool match = true;
            for (std::size_t k = 0; k < words.size(); ++k) {
                if (token_keys[pos + k] != words[k]) {
                    match = false;
                    break;
                }
            }
            if (match) {
                best_len = words.size();
                best_phrase = p;
            }
        }
        if (best_len == 0) {
            ++pos;
            continue;
        }
        const Sign sign = Sign::make(lexicon[best_phrase]);
        if (seen.insert(sign.canonical).second) found.push_back(sign);
        pos += best_len;
    }
    return found;
}

} // namespace htp
