#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "htp/cache.hpp"
#include "htp/rate_limiter.hpp"
#include "htp/types.hpp"

namespace htp {

struct OmimConfig {
    std::string base_url = "https://api.omim.org";
    std::string api_key; // OMIM_API_KEY
    bool offline = false;
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{250};
    int timeout_seconds = 60;
    std::shared_ptr<TokenBucket> limiter;
};

// OMIM-style API client with a mandatory disk cache. Each fetch first
// consults the cache; network results are written back as one JSON file
// per key with the raw responses preserved alongside the preprocessed
// text, so preprocessing can be revised without refetching.
//
// Endpoints (JSON):
//   GET /api/phenotypicSeries?phenotypicSeriesNumber=PS...&format=json
//   GET /api/entry?mimNumber=...&include=text&format=json
//   GET /api/clinicalSynopsis?mimNumber=...&format=json
// The key travels as an apiKey query parameter. 401/403 raise
// AuthError; connection failures, 429 and 5xx retry with exponential
// backoff up to max_attempts.
class OmimClient {
public:
    OmimClient(OmimConfig config, DiskCache cache);

    SeriesManifest fetch_series(const PhenotypicSeriesId& series_id);
    ClinicalSummary fetch_summary(const MimNumber& mim);

    static std::string series_cache_key(const PhenotypicSeriesId& id);
    static std::string summary_cache_key(const MimNumber& mim);

    const DiskCache& cache() const { return cache_; }

private:
    std::string get_with_retry(const std::string& path_and_query, const std::string& what);

    OmimConfig config_;
    DiskCache cache_;
};

// Reads a cached summary file; used by offline pipeline stages.
ClinicalSummary parse_cached_summary(const std::string& bytes, const std::string& context);

// Reads a cached series manifest file.
SeriesManifest parse_cached_manifest(const std::string& bytes, const std::string& context);

// User-supplied manifest file: a JSON array of
// {series_id, name, diseases: [{mim, name}]}.
std::vector<SeriesManifest> load_manifest_file(const std::filesystem::path& path);

} // namespace htp
