#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "htp/backend.hpp"
#include "htp/types.hpp"

namespace htp {

// The 30 high-level phenotype categories. Canonical index is the
// position in this alphabetical list.
inline constexpr int kCategoryCount = 30;

enum class Category : int {
    Behavior,
    BowelAndBladder,
    Cognitive,
    Deformity,
    Dysautonomia,
    Dystonia,
    ExtraocularMovements,
    Fatigue,
    Gait,
    HeadShape,
    Hearing,
    Hyperkinesia,
    Hyperreflexia,
    Hypertonia,
    Hypokinesia,
    Hyporeflexia,
    Hypotonia,
    Incoordination,
    MuscleAtrophy,
    OtherCranialNerve,
    Pain,
    Seizure,
    Sensory,
    Skin,
    Sleep,
    Speech,
    Tremor,
    Unclassified,
    Vision,
    Weakness,
};

const std::array<std::string, kCategoryCount>& category_names();
std::string_view category_name(Category c);

// Exact display-name match (case-insensitive, whitespace-normalized);
// nullopt for names outside the closed set.
std::optional<Category> category_from_name(std::string_view name);

// One disease's signs grouped by category. Empty categories are absent.
using CategorizedSigns = std::map<Category, std::vector<Sign>>;

struct DiseaseVector {
    MimNumber mim;
    std::array<std::uint8_t, kCategoryCount> bits{};
};

struct CategorizeOptions {
    std::size_t max_signs_per_call = 150;
    RetryPolicy retry;
};

// Assigns each sign to exactly one category via the backend. Signs the
// backend places under unknown category names, assigns more than once,
// or drops entirely end up in Unclassified (first canonical category
// wins for duplicates), each with a warning. The returned map always
// conserves the input sign list.
CategorizedSigns categorize_signs(Backend& backend, const std::vector<Sign>& signs,
                                  const CategorizeOptions& options = {},
                                  std::vector<std::string>* warnings = nullptr,
                                  std::vector<LlmExchange>* exchanges = nullptr);

// Presence bit per category.
std::array<std::uint8_t, kCategoryCount> binarize(const CategorizedSigns& categorized);

// Disease-vector table with canonical column order and rows in
// ascending MIM order.
struct VectorTable {
    std::vector<DiseaseVector> rows;
};

VectorTable vectorize_corpus(const std::vector<std::pair<MimNumber, CategorizedSigns>>& diseases);

void write_vector_csv(const VectorTable& table, std::ostream& out);
VectorTable read_vector_csv(std::string_view content);

} // namespace htp
