#include "htp/omim_client.hpp"

#include <ctime>
#include <fstream>
#include <set>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "htp/text.hpp"

namespace htp {

namespace {

using nlohmann::json;

std::string utc_now_iso8601() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json parse_json_or_throw(const std::string& body, const std::string& context) {
    json doc = json::parse(body, nullptr, false);
    if (doc.is_discarded()) throw ParseError("malformed JSON response for " + context);
    return doc;
}

// A clinical synopsis document maps body-system keys to narrative
// strings, mixed with metadata. Keep the narrative, drop the metadata.
std::string flatten_synopsis(const json& synopsis) {
    static const std::set<std::string> kSkip = {
        "mimNumber", "prefix", "preferredTitle", "oldFormat", "editHistory",
        "creationDate", "epochCreated", "dateCreated", "epochUpdated", "dateUpdated",
        "contributors",
    };
    std::string text;
    for (const auto& [key, value] : synopsis.items()) {
        if (!value.is_string() || kSkip.count(key)) continue;
        if (key.size() > 6 && key.compare(key.size() - 6, 6, "Exists") == 0) continue;
        if (!text.empty()) text += "\n";
        text += value.get<std::string>();
    }
    return text;
}

std::string mim_as_string(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer()) return std::to_string(value.get<long>());
    return {};
}

} // namespace

OmimClient::OmimClient(OmimConfig config, DiskCache cache)
    : config_(std::move(config)), cache_(std::move(cache)) {}

std::string OmimClient::series_cache_key(const PhenotypicSeriesId& id) {
    return id.str() + ".series.json";
}

std::string OmimClient::summary_cache_key(const MimNumber& mim) {
    return mim.str() + ".summary.json";
}

std::string OmimClient::get_with_retry(const std::string& path_and_query, const std::string& what) {
    auto backoff = config_.initial_backoff;
    const int max_attempts = std::max(1, config_.max_attempts);
    std::string url = path_and_query;
    if (!config_.api_key.empty()) {
        url += (url.find('?') == std::string::npos ? '?' : '&');
        url += "apiKey=" + config_.api_key;
    }
    for (int attempt = 1;; ++attempt) {
        try {
            httplib::Client client(config_.base_url);
            client.set_connection_timeout(config_.timeout_seconds, 0);
            client.set_read_timeout(config_.timeout_seconds, 0);
            if (config_.limiter) config_.limiter->acquire();
            auto res = client.Get(url);
            if (!res) {
                throw NetworkError(what + ": request failed: " + httplib::to_string(res.error()));
            }
            if (res->status == 401 || res->status == 403) {
                throw AuthError(what + ": authentication rejected (HTTP " +
                                std::to_string(res->status) + ")");
            }
            if (res->status == 404) {
                throw NotFoundError(what + ": not found (HTTP 404)");
            }
            if (res->status == 429 || res->status >= 500) {
                throw NetworkError(what + ": HTTP " + std::to_string(res->status));
            }
            if (res->status != 200) {
                throw Error(what + ": unexpected HTTP " + std::to_string(res->status));
            }
            return res->body;
        } catch (const NetworkError&) {
            if (attempt >= max_attempts) throw;
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
}

SeriesManifest OmimClient::fetch_series(const PhenotypicSeriesId& series_id) {
    const std::string key = series_cache_key(series_id);
    if (auto cached = cache_.read(key)) {
        return parse_cached_manifest(*cached, series_id.str());
    }
    if (config_.offline) {
        throw NotFoundError("series " + series_id.str() + " is not cached and offline mode is on");
    }

    const std::string raw = get_with_retry(
        "/api/phenotypicSeries?phenotypicSeriesNumber=" + series_id.str() + "&format=json",
        "series " + series_id.str());
    const json doc = parse_json_or_throw(raw, "series " + series_id.str());

    const json series_list = doc.value("omim", json::object()).value("phenotypicSeriesList", json::array());
    if (!series_list.is_array() || series_list.empty()) {
        throw NotFoundError("unknown phenotypic series " + series_id.str());
    }
    const json& series = series_list[0].value("phenotypicSeries", json::object());

    SeriesManifest manifest{series_id, series.value("phenotypicSeries", ""), {}};
    std::set<std::string> seen;
    for (const json& entry : series.value("phenotypeMapList", json::array())) {
        const json& map = entry.value("phenotypeMap", json::object());
        const std::string mim_str = mim_as_string(map.value("phenotypeMimNumber", json()));
        auto mim = MimNumber::try_parse(mim_str);
        if (!mim) continue;
        // Series map lists repeat a phenotype MIM per gene locus; the
        // manifest keeps each disease once.
        if (!seen.insert(mim_str).second) continue;
        manifest.diseases.push_back(SeriesEntry{*mim, map.value("phenotype", "")});
    }
    if (manifest.diseases.empty()) {
        throw ParseError("series " + series_id.str() + " response contains no diseases");
    }
    manifest.validate();

    json cached = {
        {"series_id", manifest.series_id.str()},
        {"name", manifest.name},
        {"diseases", json::array()},
        {"raw", raw},
    };
    for (const SeriesEntry& e : manifest.diseases) {
        cached["diseases"].push_back({{"mim", e.mim.str()}, {"name", e.name}});
    }
    cache_.write(key, cached.dump(2) + "\n");
    return parse_cached_manifest(*cache_.read(key), series_id.str());
}

ClinicalSummary OmimClient::fetch_summary(const MimNumber& mim) {
    const std::string key = summary_cache_key(mim);
    if (auto cached = cache_.read(key)) {
        return parse_cached_summary(*cached, mim.str());
    }
    if (config_.offline) {
        throw NotFoundError("MIM " + mim.str() + " is not cached and offline mode is on");
    }

    const std::string what = "MIM " + mim.str();
    const std::string raw_entry =
        get_with_retry("/api/entry?mimNumber=" + mim.str() + "&include=text&format=json", what);
    const json entry_doc = parse_json_or_throw(raw_entry, what);
    const json entry_list = entry_doc.value("omim", json::object()).value("entryList", json::array());
    if (!entry_list.is_array() || entry_list.empty()) {
        throw NotFoundError("MIM " + mim.str() + " not found in the database");
    }
    const json& entry = entry_list[0].value("entry", json::object());

    std::string description;
    std::string clinical_features;
    for (const json& section_entry : entry.value("textSectionList", json::array())) {
        const json& section = section_entry.value("textSection", json::object());
        const std::string name = section.value("textSectionName", "");
        if (name == "description") {
            description = section.value("textSectionContent", "");
        } else if (name == "clinicalFeatures") {
            clinical_features = section.value("textSectionContent", "");
        }
    }

    const std::string raw_synopsis =
        get_with_retry("/api/clinicalSynopsis?mimNumber=" + mim.str() + "&format=json", what);
    const json synopsis_doc = parse_json_or_throw(raw_synopsis, what);
    std::string synopsis_text;
    const json synopsis_list =
        synopsis_doc.value("omim", json::object()).value("clinicalSynopsisList", json::array());
    if (synopsis_list.is_array() && !synopsis_list.empty()) {
        synopsis_text = flatten_synopsis(synopsis_list[0].value("clinicalSynopsis", json::object()));
    }

    const json cached = {
        {"mim", mim.str()},
        {"retrieved_at", utc_now_iso8601()},
        {"raw", {{"entry", raw_entry}, {"clinical_synopsis", raw_synopsis}}},
        {"summary",
         {
             {"description", preprocess(description)},
             {"clinical_features", preprocess(clinical_features)},
             {"clinical_synopsis", preprocess(synopsis_text)},
         }},
    };
    cache_.write(key, cached.dump(2) + "\n");
    return parse_cached_summary(*cache_.read(key), mim.str());
}

ClinicalSummary parse_cached_summary(const std::string& bytes, const std::string& context) {
    const json doc = parse_json_or_throw(bytes, "cached summary " + context);
    if (!doc.contains("mim") || !doc.contains("summary")) {
        throw ParseError("cached summary " + context + " is missing required fields");
    }
    const json& summary = doc["summary"];
    return ClinicalSummary{
        MimNumber::parse(doc["mim"].get<std::string>()),
        summary.value("description", ""),
        summary.value("clinical_features", ""),
        summary.value("clinical_synopsis", ""),
        doc.value("retrieved_at", ""),
    };
}

SeriesManifest parse_cached_manifest(const std::string& bytes, const std::string& context) {
    const json doc = parse_json_or_throw(bytes, "cached manifest " + context);
    if (!doc.contains("series_id") || !doc.contains("diseases")) {
        throw ParseError("cached manifest " + context + " is missing required fields");
    }
    SeriesManifest manifest{PhenotypicSeriesId::parse(doc["series_id"].get<std::string>()),
                            doc.value("name", ""),
                            {}};
    for (const json& entry : doc["diseases"]) {
        manifest.diseases.push_back(
            SeriesEntry{MimNumber::parse(entry.value("mim", "")), entry.value("name", "")});
    }
    manifest.validate();
    return manifest;
}

std::vector<SeriesManifest> load_manifest_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open manifest file: " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array()) {
        throw ParseError("manifest file must be a JSON array: " + path.string());
    }
    std::vector<SeriesManifest> manifests;
    for (const json& item : doc) {
        SeriesManifest manifest{PhenotypicSeriesId::parse(item.value("series_id", "")),
                                item.value("name", ""),
                                {}};
        for (const json& entry : item.value("diseases", json::array())) {
            manifest.diseases.push_back(
                SeriesEntry{MimNumber::parse(entry.value("mim", "")), entry.value("name", "")});
        }
        manifest.validate();
        manifests.push_back(std::move(manifest));
    }
    return manifests;
}

} // namespace htp
