#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "htp/categorize.hpp"
#include "htp/embeddings.hpp"
#include "htp/normalize.hpp"
#include "htp/ontology.hpp"
#include "htp/types.hpp"

namespace htp {

// One gold annotation row. Category and HPO id are optional; the HPO id
// may be the literal "not-mappable".
struct AnnotationRecord {
    MimNumber mim;
    Sign sign;
    std::optional<Category> category;
    std::optional<std::string> hpo_id;
};

// All gold rows of one annotator, grouped per disease. Signs are
// preprocessed on load.
struct AnnotationSet {
    std::string annotator;
    std::map<MimNumber, std::vector<AnnotationRecord>> by_disease;

    std::set<MimNumber> mims() const;
};

// CSV columns: mim, annotator, sign, category (optional), hpo_id
// (optional). Returns one set per annotator, sorted by annotator id.
std::vector<AnnotationSet> load_annotations(const std::filesystem::path& path);

// |a n b| / |a u b|; 1.0 when both sets are empty.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

struct MaxSimilarityResult {
    double index = 0.0;    // 100 x mean best-cosine over embeddable sys signs
    double weak_pct = 0.0; // 100 x weak fraction over all sys signs
    int weak_count = 0;
    int unembeddable_sys = 0;
    int unembeddable_gold = 0;
};

// For each embeddable system sign, the best cosine against embeddable
// gold signs. Unembeddable system signs count as weak matches and are
// excluded from the mean. Throws UndefinedMetricError when no
// embeddable pair exists.
MaxSimilarityResult max_similarity_index(const EmbeddingStore& store, const std::vector<Sign>& sys,
                                         const std::vector<Sign>& gold,
                                         double weak_threshold = 0.80);

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// A system sign is a true positive iff its best cosine against gold
// reaches the threshold; a gold sign is covered iff its best cosine
// against the system reaches the threshold.
Prf identification_prf(const EmbeddingStore& store, const std::vector<Sign>& sys,
                       const std::vector<Sign>& gold, double threshold = 0.80);

struct CategorizationMetrics {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    int evaluated = 0;
};

// Computed over (disease, sign) pairs present in both maps. Macro
// averages skip categories without members on the relevant side and
// exclude Unclassified. Throws UndefinedMetricError when the
// intersection is empty.
using SignCategoryMap = std::map<std::pair<std::string, std::string>, Category>;
CategorizationMetrics categorization_metrics(const SignCategoryMap& pred,
                                             const SignCategoryMap& gold);

struct NormalizationMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    int evaluated = 0;
    int label_only = 0; // right label text, wrong or unknown id
    int gold_mappable = 0;
    int predicted_mapped = 0;
    int correct_mapped = 0;
};

// Gold maps (disease, sign) to an HPO id or nullopt for not-mappable.
// Every gold sign must have a prediction; otherwise an error names the
// missing sign. The optional index resolves gold ids to labels for the
// label-only diagnostic.
using GoldNormalization = std::map<std::pair<std::string, std::string>, std::optional<std::string>>;
struct PredictedNormalization {
    bool mapped = false;
    std::string hpo_id;
    std::string hpo_label;
};
using PredictedNormalizationMap = std::map<std::pair<std::string, std::string>, PredictedNormalization>;

NormalizationMetrics normalization_metrics(const HpoIndex* index,
                                           const PredictedNormalizationMap& pred,
                                           const GoldNormalization& gold);

// Wall-clock counters accumulated by a pipeline run.
struct RunLog {
    int diseases_processed = 0;
    std::size_t words_processed = 0;
    double wall_seconds = 0.0;
    double identify_seconds = 0.0;
    double categorize_seconds = 0.0;
    double normalize_seconds = 0.0;
    int signs_identified = 0;
    int signs_categorized = 0;
    int signs_normalized = 0;
};

struct RunTimings {
    int diseases_processed = 0;
    std::size_t words_processed = 0;
    double seconds_per_disease = 0.0;
    double identification_rate = 0.0; // signs/sec
    double categorization_rate = 0.0;
    double normalization_rate = 0.0;
};

// Rates guard division by zero: an instantaneous stage reports rate 0
// rather than infinity.
RunTimings timing_report(const RunLog& log);

} // namespace htp
