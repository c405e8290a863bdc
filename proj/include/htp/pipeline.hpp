#pragma once

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "htp/backend.hpp"
#include "htp/categorize.hpp"
#include "htp/normalize.hpp"
#include "htp/types.hpp"

namespace htp {

// Everything the subcommands need, resolved from flags and environment
// by the CLI (or directly by tests).
struct RunConfig {
    std::filesystem::path cache_dir = "cache";
    std::filesystem::path out_dir = "out";
    std::filesystem::path hpo_path;
    std::filesystem::path vectors_path;
    std::filesystem::path manifest_path; // optional series manifest file
    std::filesystem::path replay_dir;    // replay backend fixtures
    std::filesystem::path lexicon_path;  // lexicon backend phrases

    std::string backend = "chat"; // chat | lexicon | replay
    std::string model = "gpt-4";
    std::string normalize_strategy = "embedding"; // embedding | backend

    double min_similarity = 0.0;
    double match_threshold = 0.80;
    double weak_threshold = 0.80;
    int max_inflight = 4;
    bool offline = false;
    bool include_synopsis = true;
    bool labels_only = false;
    std::size_t min_summary_chars = 1;
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{250};
    double requests_per_second = 4.0;

    // Environment-sourced endpoints and credentials.
    std::string omim_base_url = "https://api.omim.org";
    std::string omim_api_key;
    std::string llm_base_url = "https://api.openai.com";
    std::string llm_api_key;
};

// Builds the configured extraction backend.
std::unique_ptr<Backend> make_backend(const RunConfig& config);

// Retrieves series manifests and member summaries into the cache.
// Per-disease failures are reported and do not fail the batch; fatal
// errors (authentication, unusable configuration) do.
int cmd_fetch(const RunConfig& config, const std::vector<std::string>& series_ids,
              std::ostream& out, std::ostream& err);

// Runs identification, categorization and normalization over every
// cached summary, writing per-disease outputs, the disease-vector CSV
// and a run report under out_dir.
int cmd_phenotype(const RunConfig& config, std::ostream& out, std::ostream& err);

// Produces heatmaps (both column orders), the PCA scatter with series
// centroids (at most 5 series) and term/category frequency tables for
// the selected series.
int cmd_analyze(const RunConfig& config, const std::vector<std::string>& series_selection,
                std::ostream& out, std::ostream& err);

// Computes Tables II-V style concordance metrics against a gold
// annotation CSV, per annotator, for the annotator union, and between
// annotators.
int cmd_evaluate(const RunConfig& config, const std::filesystem::path& annotations_path,
                 std::ostream& out, std::ostream& err);

// Output files for one disease, used by phenotype and evaluate.
struct DiseaseOutputs {
    MimNumber mim;
    std::vector<Sign> signs;
    CategorizedSigns categories;
    std::vector<NormalizedSign> normalized;
};

std::string signs_csv(const DiseaseOutputs& outputs);
std::string categories_csv(const DiseaseOutputs& outputs);
std::string normalized_csv(const DiseaseOutputs& outputs);

std::vector<Sign> read_signs_csv(const std::string& content, const std::string& context);
CategorizedSigns read_categories_csv(const std::string& content, const std::string& context);
std::vector<NormalizedSign> read_normalized_csv(const std::string& content,
                                                const std::string& context);

// mim -> series over the available manifests; when two series claim the
// same disease the lowest series id wins (with a warning).
std::map<MimNumber, PhenotypicSeriesId> load_membership(const std::vector<SeriesManifest>& manifests,
                                                        std::vector<std::string>* warnings = nullptr);

// Manifests from the user-supplied file when configured, otherwise from
// the cache directory.
std::vector<SeriesManifest> load_available_manifests(const RunConfig& config);

// Ascending MIMs of all cached summaries.
std::vector<MimNumber> list_cached_summaries(const std::filesystem::path& cache_dir);

} // namespace htp
