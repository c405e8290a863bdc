#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "htp/errors.hpp"

namespace htp {

// Six-digit OMIM disease identifier.
class MimNumber {
public:
    static MimNumber parse(std::string_view s);
    static std::optional<MimNumber> try_parse(std::string_view s);

    const std::string& str() const { return value_; }
    auto operator<=>(const MimNumber&) const = default;

private:
    explicit MimNumber(std::string v) : value_(std::move(v)) {}
    std::string value_;
};

// Phenotypic series identifier: "PS" followed by six digits.
class PhenotypicSeriesId {
public:
    static PhenotypicSeriesId parse(std::string_view s);
    static std::optional<PhenotypicSeriesId> try_parse(std::string_view s);

    const std::string& str() const { return value_; }
    auto operator<=>(const PhenotypicSeriesId&) const = default;

private:
    explicit PhenotypicSeriesId(std::string v) : value_(std::move(v)) {}
    std::string value_;
};

struct SeriesEntry {
    MimNumber mim;
    std::string name;
};

// Series membership list as retrieved from the API or a manifest file.
struct SeriesManifest {
    PhenotypicSeriesId series_id;
    std::string name;
    std::vector<SeriesEntry> diseases;

    // Throws ValidationError if the disease list is empty or contains
    // duplicate MIM numbers.
    void validate() const;
};

// One disease's preprocessed narrative text. Any of the three text
// fields may be empty when the corresponding OMIM section is absent.
struct ClinicalSummary {
    MimNumber mim;
    std::string description;
    std::string clinical_features;
    std::string clinical_synopsis;
    std::string retrieved_at; // ISO 8601 UTC

    bool operator==(const ClinicalSummary&) const = default;
};

// True when description + clinical_features together carry at least
// min_chars non-whitespace characters.
bool is_usable(const ClinicalSummary& summary, std::size_t min_chars = 1);

// A free-text symptom or examination finding. `text` is the
// preprocessed surface form, `canonical` its lowercase key used for
// de-duplication and exact matching.
struct Sign {
    std::string text;
    std::string canonical;

    static Sign make(std::string_view raw);

    bool operator==(const Sign&) const = default;
    auto operator<=>(const Sign&) const = default;
};

} // namespace htp
