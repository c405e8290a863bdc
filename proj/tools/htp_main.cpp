#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "htp/pipeline.hpp"

namespace {

std::string env_or(const char* name, const std::string& fallback) {
    const char* value = std::getenv(name);
    return value && *value ? value : fallback;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-throughput phenotyping of OMIM clinical summaries"};
    app.require_subcommand(1);

    htp::RunConfig config;
    config.omim_api_key = env_or("OMIM_API_KEY", "");
    config.llm_api_key = env_or("LLM_API_KEY", "");
    config.llm_base_url = env_or("LLM_BASE_URL", config.llm_base_url);

    std::string cache_dir = config.cache_dir.string();
    std::string out_dir = config.out_dir.string();
    std::string hpo_path;
    std::string vectors_path;
    std::string manifest_path;
    std::string replay_dir;
    std::string lexicon_path;

    app.add_option("--cache-dir", cache_dir, "Directory for cached API responses");
    app.add_option("--out-dir", out_dir, "Directory for pipeline outputs");
    app.add_option("--hpo", hpo_path, "HPO release file (hp.obo or hp.json)");
    app.add_option("--vectors", vectors_path, "Word vectors in word2vec text format (.gz ok)");
    app.add_option("--backend", config.backend, "Extractor backend: chat, lexicon or replay");
    app.add_option("--model", config.model, "Chat model name");
    app.add_option("--min-similarity", config.min_similarity,
                   "Minimum cosine similarity for an embedding mapping")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--match-threshold", config.match_threshold,
                   "Cosine threshold for identification precision/recall")
        ->check(CLI::Range(0.0, 1.0));
    app.add_option("--max-inflight", config.max_inflight, "Maximum concurrent requests")
        ->check(CLI::PositiveNumber);
    app.add_flag("--offline", config.offline, "Serve everything from the cache; never hit the network");
    app.add_option("--manifest", manifest_path, "Series manifest JSON file (replaces series fetch)");
    app.add_option("--replay-dir", replay_dir, "Fixture directory for the replay backend");
    app.add_option("--lexicon", lexicon_path, "Phrase file for the lexicon backend");
    app.add_option("--normalize-strategy", config.normalize_strategy,
                   "Normalization strategy: embedding or backend");
    app.add_flag("--labels-only", config.labels_only,
                 "Match embedding normalization against term labels only (no synonyms)");
    app.add_flag("!--no-synopsis", config.include_synopsis,
                 "Exclude the clinical synopsis from identification input");
    app.add_option("--omim-base-url", config.omim_base_url, "OMIM-style API base URL");
    app.add_option("--rate", config.requests_per_second, "API requests per second")
        ->check(CLI::PositiveNumber);
    app.add_option("--max-attempts", config.max_attempts, "Retries per request/stage")
        ->check(CLI::PositiveNumber);

    std::vector<std::string> series;
    auto* fetch = app.add_subcommand("fetch", "Retrieve series manifests and clinical summaries");
    fetch->add_option("series", series, "Phenotypic series ids (PS followed by 6 digits)");

    auto* phenotype =
        app.add_subcommand("phenotype", "Identify, categorize and normalize signs for cached summaries");

    std::vector<std::string> analyze_series;
    auto* analyze = app.add_subcommand("analyze", "Heatmaps, PCA scatter and frequency tables");
    analyze->add_option("--series", analyze_series, "Series to analyze (default: all cached)")
        ->delimiter(',');

    std::string annotations;
    auto* evaluate = app.add_subcommand("evaluate", "Concordance metrics against gold annotations");
    evaluate->add_option("--annotations", annotations, "Gold annotation CSV")->required();

    CLI11_PARSE(app, argc, argv);

    config.cache_dir = cache_dir;
    config.out_dir = out_dir;
    config.hpo_path = hpo_path;
    config.vectors_path = vectors_path;
    config.manifest_path = manifest_path;
    config.replay_dir = replay_dir;
    config.lexicon_path = lexicon_path;

    if (fetch->parsed()) return htp::cmd_fetch(config, series, std::cout, std::cerr);
    if (phenotype->parsed()) return htp::cmd_phenotype(config, std::cout, std::cerr);
    if (analyze->parsed()) return htp::cmd_analyze(config, analyze_series, std::cout, std::cerr);
    if (evaluate->parsed()) return htp::cmd_evaluate(config, annotations, std::cout, std::cerr);
    return 1;
}
