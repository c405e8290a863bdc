#include "htp/normalize.hpp"

#include <algorithm>

#include <json.hpp>

#include "htp/response_json.hpp"
#include "htp/text.hpp"

namespace htp {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr const char* kNotMappable = "not-mappable";

NormalizedSign not_mappable(const Sign& sign, MapStrategy strategy, std::string detail) {
    NormalizedSign result;
    result.input = sign;
    result.mapped = false;
    result.strategy = strategy;
    result.note = VerifyNote::not_applicable;
    result.detail = std::move(detail);
    return result;
}

struct BackendMapping {
    std::string term;
    std::string id;
    bool explicit_not_mappable = false;
};

// Accepts the documented map form {sign: {"HPO Term":..., "HPO ID":...}}
// and the single-record {"input":..., "HPO Term":..., "HPO ID":...}
// form shown in the stage prompt's example.
std::map<std::string, BackendMapping> parse_normalize_response(const std::string& raw) {
    const json doc = extract_json_object(raw);
    if (!doc.is_object()) throw ParseError("normalize response is not a JSON object");

    auto read_entry = [](const json& value, const std::string& context) {
        BackendMapping mapping;
        if (!value.is_object()) {
            throw ParseError("normalize response entry for \"" + context + "\" is not an object");
        }
        if (!value.contains("HPO Term") || !value.contains("HPO ID")) {
            throw ParseError("normalize response entry for \"" + context +
                             "\" is missing 'HPO Term' or 'HPO ID'");
        }
        if (!value["HPO Term"].is_string() || !value["HPO ID"].is_string()) {
            throw ParseError("normalize response entry for \"" + context + "\" has non-string fields");
        }
        mapping.term = value["HPO Term"].get<std::string>();
        mapping.id = value["HPO ID"].get<std::string>();
        const auto lowered_term = to_lower(mapping.term);
        const auto lowered_id = to_lower(mapping.id);
        mapping.explicit_not_mappable = lowered_term == kNotMappable || lowered_id == kNotMappable;
        return mapping;
    };

    std::map<std::string, BackendMapping> mappings;
    if (doc.contains("input") && doc.contains("HPO Term")) {
        const std::string sign = doc["input"].is_string() ? doc["input"].get<std::string>() : "";
        mappings.emplace(canonical_sign(sign), read_entry(doc, sign));
        return mappings;
    }
    for (const auto& [sign, value] : doc.items()) {
        mappings.emplace(canonical_sign(sign), read_entry(value, sign));
    }
    return mappings;
}

} // namespace

std::string_view strategy_name(MapStrategy s) {
    return s == MapStrategy::embedding ? "embedding" : "backend";
}

std::string_view verify_note_name(VerifyNote note) {
    switch (note) {
    case VerifyNote::exact_label_match: return "exact-label-match";
    case VerifyNote::label_mismatch: return "label-mismatch";
    case VerifyNote::unknown_id: return "unknown-id";
    case VerifyNote::obsolete_id: return "obsolete-id";
    case VerifyNote::not_applicable: return "not-applicable";
    }
    return "unknown";
}

CandidateCache::CandidateCache(const EmbeddingStore& store, const HpoIndex& index,
                               bool include_synonyms) {
    for (const HpoTerm& term : index.terms()) {
        if (term.obsolete) continue;
        auto add = [&](const std::string& text, bool is_label) {
            auto vec = store.embed_phrase(text);
            if (!vec) {
                ++unembeddable_;
                return;
            }
            candidates_.push_back(Candidate{&term, text, is_label, std::move(*vec)});
        };
        add(term.label, true);
        if (include_synonyms) {
            for (const std::string& synonym : term.synonyms) add(synonym, false);
        }
    }
}

NormalizedSign normalize_embedding(const EmbeddingStore& store, const HpoIndex& index,
                                   const Sign& sign, double min_similarity,
                                   const CandidateCache* cache) {
    std::optional<CandidateCache> local;
    if (!cache) {
        local.emplace(store, index);
        cache = &*local;
    }

    const auto sign_vec = store.embed_phrase(sign.canonical);
    if (!sign_vec) return not_mappable(sign, MapStrategy::embedding, "unembeddable-sign");

    const CandidateCache::Candidate* best = nullptr;
    double best_score = 0.0;
    for (const auto& candidate : cache->candidates()) {
        double score;
        try {
            score = cosine(sign_vec->values, candidate.vec.values);
        } catch (const UndefinedMetricError&) {
            continue; // degenerate zero-norm vector
        }
        if (!best || score > best_score) {
            best = &candidate;
            best_score = score;
        }
    }
    if (!best) return not_mappable(sign, MapStrategy::embedding, "no-embeddable-candidates");
    if (best_score < min_similarity) {
        return not_mappable(sign, MapStrategy::embedding, "below-threshold");
    }

    NormalizedSign result;
    result.input = sign;
    result.mapped = true;
    result.strategy = MapStrategy::embedding;
    result.hpo_id = best->term->id.str();
    result.hpo_label = best->term->label;
    result.similarity = best_score;
    auto [verified, note] = verify_mapping(index, result.hpo_id, result.hpo_label);
    result.id_verified = verified;
    result.note = note;
    return result;
}

std::pair<bool, VerifyNote> verify_mapping(const HpoIndex& index, const std::string& hpo_id,
                                           const std::string& hpo_label) {
    const auto id = HpoId::try_parse(hpo_id);
    if (!id) return {false, VerifyNote::unknown_id};
    const HpoTerm* term = index.find(*id);
    if (!term) return {false, VerifyNote::unknown_id};
    if (term->obsolete) return {false, VerifyNote::obsolete_id};
    const std::string wanted = normalize_label(hpo_label);
    if (wanted == normalize_label(term->label)) return {true, VerifyNote::exact_label_match};
    for (const std::string& synonym : term->synonyms) {
        if (wanted == normalize_label(synonym)) return {true, VerifyNote::exact_label_match};
    }
    return {false, VerifyNote::label_mismatch};
}

std::vector<NormalizedSign> normalize_backend(Backend& backend, const HpoIndex& index,
                                              const std::vector<Sign>& signs,
                                              const NormalizeOptions& options,
                                              std::vector<LlmExchange>* exchanges) {
    if (signs.empty()) throw ValidationError("normalize_backend requires a non-empty sign list");

    std::map<std::string, BackendMapping> mappings;
    const std::size_t chunk_size = std::max<std::size_t>(1, options.max_signs_per_call);
    for (std::size_t begin = 0; begin < signs.size(); begin += chunk_size) {
        const std::size_t end = std::min(signs.size(), begin + chunk_size);

        ordered_json sign_list = ordered_json::array();
        for (std::size_t i = begin; i < end; ++i) sign_list.push_back(signs[i].text);
        auto rendered = normalize_prompt().render({{"signs", sign_list.dump()}});

        StageRequest request;
        request.stage = Stage::normalize;
        request.system_text = std::move(rendered.system_text);
        request.user_text = std::move(rendered.user_text);
        for (std::size_t i = begin; i < end; ++i) request.items.push_back(signs[i].text);

        LlmExchange log;
        log.stage = Stage::normalize;
        auto chunk_mappings = call_stage(
            backend, request, options.retry,
            [](const std::string& raw) { return parse_normalize_response(raw); }, &log);
        if (exchanges) exchanges->push_back(std::move(log));
        mappings.merge(chunk_mappings);
    }

    std::vector<NormalizedSign> results;
    results.reserve(signs.size());
    for (const Sign& sign : signs) {
        auto it = mappings.find(sign.canonical);
        if (it == mappings.end()) {
            results.push_back(not_mappable(sign, MapStrategy::backend, "missing-from-response"));
            continue;
        }
        const BackendMapping& mapping = it->second;
        if (mapping.explicit_not_mappable) {
            results.push_back(not_mappable(sign, MapStrategy::backend, ""));
            continue;
        }
        NormalizedSign result;
        result.input = sign;
        result.mapped = true;
        result.strategy = MapStrategy::backend;
        result.hpo_id = mapping.id;
        result.hpo_label = mapping.term;
        auto [verified, note] = verify_mapping(index, result.hpo_id, result.hpo_label);
        result.id_verified = verified;
        result.note = note;
        results.push_back(std::move(result));
    }
    return results;
}

} // namespace htp
