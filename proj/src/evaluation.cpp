#include "htp/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "htp/text.hpp"

namespace htp {

namespace {

// Column resolution for the annotation CSV header.
int column_of(const std::vector<std::string>& header, std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (normalize_label(header[i]) == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<std::optional<PhraseVector>> embed_all(const EmbeddingStore& store,
                                                   const std::vector<Sign>& signs) {
    std::vector<std::optional<PhraseVector>> vecs;
    vecs.reserve(signs.size());
    for (const Sign& sign : signs) vecs.push_back(store.embed_phrase(sign.canonical));
    return vecs;
}

// Best cosine of one vector against a list; nullopt when the list has
// no embeddable member.
std::optional<double> best_cosine(const PhraseVector& vec,
                                  const std::vector<std::optional<PhraseVector>>& others) {
    std::optional<double> best;
    for (const auto& other : others) {
        if (!other) continue;
        double score;
        try {
            score = cosine(vec.values, other->values);
        } catch (const UndefinedMetricError&) {
            continue;
        }
        if (!best || score > *best) best = score;
    }
    return best;
}

} // namespace

std::set<MimNumber> AnnotationSet::mims() const {
    std::set<MimNumber> result;
    for (const auto& [mim, records] : by_disease) result.insert(mim);
    return result;
}

std::vector<AnnotationSet> load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open annotation file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto rows = parse_csv(buffer.str());
    if (rows.size() < 2) throw ParseError("annotation file has no data rows: " + path.string());

    const auto& header = rows.front();
    const int mim_col = column_of(header, "mim");
    const int annotator_col = column_of(header, "annotator");
    const int sign_col = column_of(header, "sign");
    const int category_col = column_of(header, "category");
    const int hpo_col = column_of(header, "hpo id");
    if (mim_col < 0 || annotator_col < 0 || sign_col < 0) {
        throw ParseError("annotation file must have mim, annotator and sign columns");
    }

    std::map<std::string, AnnotationSet> sets;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        auto cell = [&](int col) -> std::string {
            return col >= 0 && static_cast<std::size_t>(col) < row.size() ? row[static_cast<std::size_t>(col)] : "";
        };
        const std::string annotator = cell(annotator_col);
        if (annotator.empty()) {
            throw ParseError("annotation row " + std::to_string(r + 1) + " has no annotator");
        }
        AnnotationRecord record{MimNumber::parse(cell(mim_col)), Sign::make(cell(sign_col)), {}, {}};
        if (const std::string cat = cell(category_col); !cat.empty()) {
            auto category = category_from_name(cat);
            if (!category) {
                throw ParseError("annotation row " + std::to_string(r + 1) +
                                 " has unknown category '" + cat + "'");
            }
            record.category = *category;
        }
        if (const std::string hpo = cell(hpo_col); !hpo.empty()) record.hpo_id = hpo;

        auto [it, inserted] = sets.try_emplace(annotator);
        if (inserted) it->second.annotator = annotator;
        it->second.by_disease[record.mim].push_back(std::move(record));
    }

    std::vector<AnnotationSet> result;
    for (auto& [annotator, set] : sets) result.push_back(std::move(set));
    return result;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return 1.0;
    std::size_t intersection = 0;
    for (const std::string& item : a) intersection += b.count(item);
    const std::size_t uni = a.size() + b.size() - intersection;
    return static_cast<double>(intersection) / static_cast<double>(uni);
}

MaxSimilarityResult max_similarity_index(const EmbeddingStore& store, const std::vector<Sign>& sys,
                                         const std::vector<Sign>& gold, double weak_threshold) {
    if (sys.empty() || gold.empty()) {
        throw UndefinedMetricError("max_similarity_index requires non-empty sign lists");
    }
    const auto sys_vecs = embed_all(store, sys);
    const auto gold_vecs = embed_all(store, gold);

    MaxSimilarityResult result;
    for (const auto& vec : gold_vecs) {
        if (!vec) ++result.unembeddable_gold;
    }

    double sum = 0.0;
    int scored = 0;
    for (const auto& vec : sys_vecs) {
        if (!vec) {
            // Unembeddable system signs are weak by definition but do
            // not enter the mean.
            ++result.unembeddable_sys;
            ++result.weak_count;
            continue;
        }
        const auto best = best_cosine(*vec, gold_vecs);
        if (!best) continue; // no embeddable gold sign at all
        sum += *best;
        ++scored;
        if (*best < weak_threshold) ++result.weak_count;
    }
    if (scored == 0) {
        throw UndefinedMetricError("max_similarity_index: no embeddable system/gold sign pair");
    }
    result.index = 100.0 * (sum / scored);
    result.weak_pct = 100.0 * result.weak_count / static_cast<double>(sys.size());
    return result;
}

Prf identification_prf(const EmbeddingStore& store, const std::vector<Sign>& sys,
                       const std::vector<Sign>& gold, double threshold) {
    Prf prf;
    if (sys.empty() || gold.empty()) return prf;
    const auto sys_vecs = embed_all(store, sys);
    const auto gold_vecs = embed_all(store, gold);

    int true_positives = 0;
    for (const auto& vec : sys_vecs) {
        if (!vec) continue;
        const auto best = best_cosine(*vec, gold_vecs);
        if (best && *best >= threshold) ++true_positives;
    }
    int covered = 0;
    for (const auto& vec : gold_vecs) {
        if (!vec) continue;
        const auto best = best_cosine(*vec, sys_vecs);
        if (best && *best >= threshold) ++covered;
    }
    prf.precision = static_cast<double>(true_positives) / static_cast<double>(sys.size());
    prf.recall = static_cast<double>(covered) / static_cast<double>(gold.size());
    prf.f1 = (prf.precision + prf.recall) == 0.0
                 ? 0.0
                 : 2.0 * prf.precision * prf.recall / (prf.precision + prf.recall);
    return prf;
}

CategorizationMetrics categorization_metrics(const SignCategoryMap& pred,
                                             const SignCategoryMap& gold) {
    int evaluated = 0;
    int exact = 0;
    std::array<int, kCategoryCount> tp{};
    std::array<int, kCategoryCount> fp{};
    std::array<int, kCategoryCount> fn{};

    for (const auto& [key, gold_category] : gold) {
        auto it = pred.find(key);
        if (it == pred.end()) continue;
        const Category predicted = it->second;
        ++evaluated;
        if (predicted == gold_category) {
            ++exact;
            ++tp[static_cast<std::size_t>(predicted)];
        } else {
            ++fp[static_cast<std::size_t>(predicted)];
            ++fn[static_cast<std::size_t>(gold_category)];
        }
    }
    if (evaluated == 0) {
        throw UndefinedMetricError("categorization_metrics: no sign is present in both maps");
    }

    CategorizationMetrics metrics;
    metrics.evaluated = evaluated;
    metrics.accuracy = static_cast<double>(exact) / evaluated;

    double precision_sum = 0.0;
    int precision_categories = 0;
    double recall_sum = 0.0;
    int recall_categories = 0;
    for (int c = 0; c < kCategoryCount; ++c) {
        if (static_cast<Category>(c) == Category::Unclassified) continue;
        const std::size_t i = static_cast<std::size_t>(c);
        if (tp[i] + fp[i] > 0) {
            precision_sum += static_cast<double>(tp[i]) / (tp[i] + fp[i]);
            ++precision_categories;
        }
        if (tp[i] + fn[i] > 0) {
            recall_sum += static_cast<double>(tp[i]) / (tp[i] + fn[i]);
            ++recall_categories;
        }
    }
    metrics.macro_precision = precision_categories ? precision_sum / precision_categories : 0.0;
    metrics.macro_recall = recall_categories ? recall_sum / recall_categories : 0.0;
    return metrics;
}

NormalizationMetrics normalization_metrics(const HpoIndex* index,
                                           const PredictedNormalizationMap& pred,
                                           const GoldNormalization& gold) {
    if (gold.empty()) throw UndefinedMetricError("normalization_metrics: empty gold set");

    NormalizationMetrics metrics;
    int correct = 0;
    for (const auto& [key, gold_id] : gold) {
        auto it = pred.find(key);
        if (it == pred.end()) {
            throw ValidationError("normalization_metrics: gold sign '" + key.second +
                                  "' (MIM " + key.first + ") has no prediction");
        }
        ++metrics.evaluated;
        const PredictedNormalization& p = it->second;
        const bool gold_mappable = gold_id.has_value();
        if (gold_mappable) ++metrics.gold_mappable;
        if (p.mapped) ++metrics.predicted_mapped;

        if (!gold_mappable && !p.mapped) {
            ++correct;
            continue;
        }
        if (gold_mappable && p.mapped) {
            if (p.hpo_id == *gold_id) {
                ++correct;
                ++metrics.correct_mapped;
            } else if (index) {
                // Plausible label, wrong id: the diagnostic the id
                // verification machinery exists for.
                if (auto gid = HpoId::try_parse(*gold_id)) {
                    if (const HpoTerm* term = index->find(*gid)) {
                        const std::string wanted = normalize_label(p.hpo_label);
                        bool label_match = wanted == normalize_label(term->label);
                        for (const std::string& syn : term->synonyms) {
                            label_match = label_match || wanted == normalize_label(syn);
                        }
                        if (label_match) ++metrics.label_only;
                    }
                }
            }
        }
    }
    metrics.accuracy = static_cast<double>(correct) / metrics.evaluated;
    metrics.precision = metrics.predicted_mapped
                            ? static_cast<double>(metrics.correct_mapped) / metrics.predicted_mapped
                            : 0.0;
    metrics.recall = metrics.gold_mappable
                         ? static_cast<double>(metrics.correct_mapped) / metrics.gold_mappable
                         : 0.0;
    return metrics;
}

RunTimings timing_report(const RunLog& log) {
    RunTimings timings;
    timings.diseases_processed = log.diseases_processed;
    timings.words_processed = log.words_processed;
    auto rate = [](int count, double seconds) {
        return seconds > 0.0 ? static_cast<double>(count) / seconds : 0.0;
    };
    timings.seconds_per_disease =
        log.diseases_processed > 0 ? log.wall_seconds / log.diseases_processed : 0.0;
    timings.identification_rate = rate(log.signs_identified, log.identify_seconds);
    timings.categorization_rate = rate(log.signs_categorized, log.categorize_seconds);
    timings.normalization_rate = rate(log.signs_normalized, log.normalize_seconds);
    return timings;
}

} // namespace htp
