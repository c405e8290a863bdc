#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "htp/errors.hpp"

namespace htp {

// Human Phenotype Ontology identifier: "HP:" followed by seven digits.
class HpoId {
public:
    static HpoId parse(std::string_view s);
    static std::optional<HpoId> try_parse(std::string_view s);

    const std::string& str() const { return value_; }
    auto operator<=>(const HpoId&) const = default;

private:
    explicit HpoId(std::string v) : value_(std::move(v)) {}
    std::string value_;
};

struct HpoTerm {
    HpoId id;
    std::string label;
    std::vector<std::string> synonyms; // de-duplicated case-insensitively
    std::vector<HpoId> parents;        // parsed but not traversed
    bool obsolete = false;
};

// Immutable indexed term store. Terms iterate in ascending HpoId order.
// Label lookup covers labels and synonyms of non-obsolete terms only;
// id lookup also returns obsolete terms so callers can distinguish
// "obsolete" from "invented". Safe for concurrent readers.
class HpoIndex {
public:
    std::size_t size() const { return terms_.size(); }
    const std::vector<HpoTerm>& terms() const { return terms_; }

    // Exact id lookup; nullptr when absent.
    const HpoTerm* find(const HpoId& id) const;

    // Validates the raw id string first: malformed ids throw
    // ValidationError, which is distinct from an absent term.
    const HpoTerm* find_id(std::string_view raw_id) const;

    // Case-insensitive, whitespace-normalized match over labels and
    // synonyms. Collisions resolve to the lowest HpoId.
    const HpoTerm* find_label(std::string_view label) const;

    // Checksum of the source release file, for report provenance.
    const std::string& checksum() const { return checksum_; }

private:
    friend HpoIndex load_ontology(const std::filesystem::path&, std::vector<std::string>*);

    std::vector<HpoTerm> terms_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::size_t> by_label_;
    std::string checksum_;
};

// Loads an hp.obo stanza file or an HPO JSON graph document; the format
// is detected from the first non-blank byte. Malformed term stanzas are
// skipped with a warning, but the load fails if more than 1% of stanzas
// are malformed. Label collisions are reported through `warnings`.
HpoIndex load_ontology(const std::filesystem::path& path,
                       std::vector<std::string>* warnings = nullptr);

} // namespace htp
