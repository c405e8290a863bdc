#include "htp/types.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "htp/text.hpp"

namespace htp {

namespace {

bool all_digits(std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isdigit(c) != 0; });
}

} // namespace

std::optional<MimNumber> MimNumber::try_parse(std::string_view s) {
    if (s.size() != 6 || !all_digits(s)) return std::nullopt;
    return MimNumber(std::string(s));
}

MimNumber MimNumber::parse(std::string_view s) {
    auto mim = try_parse(s);
    if (!mim) throw ValidationError("invalid MIM number: '" + std::string(s) + "' (expected 6 digits)");
    return *mim;
}

std::optional<PhenotypicSeriesId> PhenotypicSeriesId::try_parse(std::string_view s) {
    if (s.size() != 8 || s.substr(0, 2) != "PS" || !all_digits(s.substr(2))) return std::nullopt;
    return PhenotypicSeriesId(std::string(s));
}

PhenotypicSeriesId PhenotypicSeriesId::parse(std::string_view s) {
    auto id = try_parse(s);
    if (!id) throw ValidationError("invalid phenotypic series id: '" + std::string(s) + "' (expected PS followed by 6 digits)");
    return *id;
}

void SeriesManifest::validate() const {
    if (diseases.empty()) {
        throw ValidationError("series " + series_id.str() + " has an empty disease list");
    }
    std::set<MimNumber> seen;
    for (const SeriesEntry& e : diseases) {
        if (!seen.insert(e.mim).second) {
            throw ValidationError("series " + series_id.str() + " lists MIM " + e.mim.str() + " twice");
        }
    }
}

bool is_usable(const ClinicalSummary& summary, std::size_t min_chars) {
    std::size_t chars = 0;
    for (const std::string* field : {&summary.description, &summary.clinical_features}) {
        for (char c : *field) {
            if (!std::isspace(static_cast<unsigned char>(c))) ++chars;
            if (chars >= min_chars) return true;
        }
    }
    return min_chars == 0;
}

Sign Sign::make(std::string_view raw) {
    Sign sign;
    sign.text = preprocess(raw);
    sign.canonical = to_lower(sign.text);
    if (sign.canonical.empty()) {
        throw ValidationError("sign text is empty after preprocessing: '" + std::string(raw) + "'");
    }
    return sign;
}

} // namespace htp
