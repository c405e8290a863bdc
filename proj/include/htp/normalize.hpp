#pragma once

#include <optional>
#include <string>
#include <vector>

#include "htp/backend.hpp"
#include "htp/embeddings.hpp"
#include "htp/ontology.hpp"
#include "htp/types.hpp"

namespace htp {

enum class MapStrategy { embedding, backend };

std::string_view strategy_name(MapStrategy s);

// Outcome of checking a produced HPO id/label pair against the index.
enum class VerifyNote {
    exact_label_match,
    label_mismatch,
    unknown_id,
    obsolete_id,
    not_applicable, // not-mappable results
};

std::string_view verify_note_name(VerifyNote note);

struct NormalizedSign {
    Sign input;
    bool mapped = false;
    std::string hpo_id;    // valid when mapped
    std::string hpo_label; // valid when mapped
    std::optional<double> similarity; // present iff strategy == embedding and mapped
    MapStrategy strategy = MapStrategy::embedding;
    bool id_verified = false; // meaningful only when mapped
    VerifyNote note = VerifyNote::not_applicable;
    std::string detail; // free-text diagnostic (unembeddable, missing, ...)
};

// Phrase vectors for every candidate match target, computed once per
// run; the per-sign scan is then linear. Candidates iterate in
// ascending HpoId order with each term's label ahead of its synonyms,
// which pins the tie-break.
class CandidateCache {
public:
    struct Candidate {
        const HpoTerm* term;
        std::string text;
        bool is_label;
        PhraseVector vec;
    };

    CandidateCache(const EmbeddingStore& store, const HpoIndex& index,
                   bool include_synonyms = true);

    const std::vector<Candidate>& candidates() const { return candidates_; }
    int unembeddable_candidates() const { return unembeddable_; }

private:
    std::vector<Candidate> candidates_;
    int unembeddable_ = 0;
};

// Nearest-neighbor normalization over label/synonym phrase vectors by
// cosine similarity. Ties break by lowest HpoId, then label before
// synonym. NotMappable when the sign is unembeddable, no candidate is
// embeddable, or the best score falls below min_similarity.
NormalizedSign normalize_embedding(const EmbeddingStore& store, const HpoIndex& index,
                                   const Sign& sign, double min_similarity = 0.0,
                                   const CandidateCache* cache = nullptr);

// Checks an id/label pair against the index: unknown-id for absent or
// malformed ids, obsolete-id for flagged terms, exact-label-match when
// the normalized label equals the term's label or a synonym,
// label-mismatch otherwise. id_verified is true only for
// exact-label-match.
std::pair<bool, VerifyNote> verify_mapping(const HpoIndex& index, const std::string& hpo_id,
                                           const std::string& hpo_label);

struct NormalizeOptions {
    std::size_t max_signs_per_call = 50;
    RetryPolicy retry;
};

// Backend (prompted) normalization. Every mapped result is passed
// through verify_mapping; explicit "not-mappable" responses are
// honored, and signs missing from the response come back NotMappable
// with a diagnostic.
std::vector<NormalizedSign> normalize_backend(Backend& backend, const HpoIndex& index,
                                              const std::vector<Sign>& signs,
                                              const NormalizeOptions& options = {},
                                              std::vector<LlmExchange>* exchanges = nullptr);

} // namespace htp
