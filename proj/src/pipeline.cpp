#include "htp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "htp/analytics.hpp"
#include "htp/embeddings.hpp"
#include "htp/errors.hpp"
#include "htp/evaluation.hpp"
#include "htp/extraction.hpp"
#include "htp/omim_client.hpp"
#include "htp/ontology.hpp"
#include "htp/text.hpp"

namespace htp {

namespace {

using nlohmann::json;

constexpr const char* kNotMappable = "not-mappable";

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

double seconds_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Runs fn(i) for i in [0, n) on up to max_inflight worker threads.
// Exceptions propagate after all workers finish.
void parallel_for(std::size_t n, int max_inflight, const std::function<void(std::size_t)>& fn) {
    const int workers = std::max(1, std::min<int>(max_inflight, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(w)] = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& t : pool) t.join();
    for (const std::exception_ptr& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

// Per-disease phenotyping result gathered by the worker threads.
struct DiseaseRun {
    MimNumber mim;
    bool usable_summary = false;
    bool usable = false;
    std::string failure;          // stage failure message, batch continues
    std::string unusable_reason;  // empty-summary | no-signs
    DiseaseOutputs outputs;
    std::vector<std::string> warnings;
    std::size_t words = 0;
    double identify_seconds = 0.0;
    double categorize_seconds = 0.0;
    double normalize_seconds = 0.0;
    int relaxed_responses = 0;

    explicit DiseaseRun(MimNumber m) : mim(m), outputs{m, {}, {}, {}} {}
};

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const AuthError*>(&e)) return 2;
    return 1;
}

std::string join_series(const std::vector<PhenotypicSeriesId>& series) {
    std::string joined;
    for (const PhenotypicSeriesId& s : series) {
        if (!joined.empty()) joined += "+";
        joined += s.str();
    }
    return joined;
}

} // namespace

std::unique_ptr<Backend> make_backend(const RunConfig& config) {
    if (config.backend == "chat") {
        ChatConfig chat;
        chat.base_url = config.llm_base_url;
        chat.api_key = config.llm_api_key;
        chat.model = config.model;
        chat.limiter = std::make_shared<TokenBucket>(config.requests_per_second,
                                                     std::max(1.0, config.requests_per_second));
        return std::make_unique<ChatBackend>(std::move(chat));
    }
    if (config.backend == "replay") {
        if (config.replay_dir.empty()) {
            throw ValidationError("replay backend requires --replay-dir");
        }
        return std::make_unique<ReplayBackend>(config.replay_dir);
    }
    if (config.backend == "lexicon") {
        if (config.lexicon_path.empty()) {
            throw ValidationError("lexicon backend requires --lexicon");
        }
        return std::make_unique<LexiconBackend>(load_lexicon(config.lexicon_path));
    }
    throw ValidationError("unknown backend '" + config.backend + "' (expected chat, lexicon or replay)");
}

std::vector<MimNumber> list_cached_summaries(const std::filesystem::path& cache_dir) {
    std::vector<MimNumber> mims;
    if (!std::filesystem::is_directory(cache_dir)) return mims;
    for (const auto& entry : std::filesystem::directory_iterator(cache_dir)) {
        const std::string name = entry.path().filename().string();
        const std::string suffix = ".summary.json";
        if (name.size() <= suffix.size() || name.compare(name.size() - suffix.size(), suffix.size(), suffix) != 0) {
            continue;
        }
        if (auto mim = MimNumber::try_parse(name.substr(0, name.size() - suffix.size()))) {
            mims.push_back(*mim);
        }
    }
    std::sort(mims.begin(), mims.end());
    return mims;
}

std::vector<SeriesManifest> load_available_manifests(const RunConfig& config) {
    if (!config.manifest_path.empty()) return load_manifest_file(config.manifest_path);
    std::vector<std::filesystem::path> paths;
    if (std::filesystem::is_directory(config.cache_dir)) {
        for (const auto& entry : std::filesystem::directory_iterator(config.cache_dir)) {
            const std::string name = entry.path().filename().string();
            if (name.size() > 12 && name.compare(name.size() - 12, 12, ".series.json") == 0) {
                paths.push_back(entry.path());
            }
        }
    }
    std::sort(paths.begin(), paths.end());
    std::vector<SeriesManifest> manifests;
    for (const auto& path : paths) {
        manifests.push_back(parse_cached_manifest(read_file(path), path.filename().string()));
    }
    return manifests;
}

std::map<MimNumber, PhenotypicSeriesId> load_membership(const std::vector<SeriesManifest>& manifests,
                                                        std::vector<std::string>* warnings) {
    std::vector<SeriesManifest> sorted = manifests;
    std::sort(sorted.begin(), sorted.end(), [](const SeriesManifest& a, const SeriesManifest& b) {
        return a.series_id < b.series_id;
    });
    std::map<MimNumber, PhenotypicSeriesId> membership;
    for (const SeriesManifest& manifest : sorted) {
        for (const SeriesEntry& entry : manifest.diseases) {
            auto [it, inserted] = membership.emplace(entry.mim, manifest.series_id);
            if (!inserted && warnings && it->second != manifest.series_id) {
                warnings->push_back("membership: MIM " + entry.mim.str() + " appears in " +
                                    it->second.str() + " and " + manifest.series_id.str() +
                                    "; keeping " + it->second.str());
            }
        }
    }
    return membership;
}

// ---------------------------------------------------------------------------
// Per-disease output files

std::string signs_csv(const DiseaseOutputs& outputs) {
    std::string out = "sign\n";
    for (const Sign& sign : outputs.signs) out += csv_field(sign.text) + "\n";
    return out;
}

std::string categories_csv(const DiseaseOutputs& outputs) {
    std::string out = "category,sign\n";
    for (const auto& [category, members] : outputs.categories) {
        for (const Sign& sign : members) {
            out += csv_field(category_name(category)) + "," + csv_field(sign.text) + "\n";
        }
    }
    return out;
}

std::string normalized_csv(const DiseaseOutputs& outputs) {
    std::string out = "input_sign,strategy,hpo_id,hpo_label,similarity,id_verified,verification_note\n";
    for (const NormalizedSign& n : outputs.normalized) {
        out += csv_field(n.input.text);
        out += ",";
        out += strategy_name(n.strategy);
        out += ",";
        out += csv_field(n.mapped ? n.hpo_id : kNotMappable);
        out += ",";
        out += csv_field(n.mapped ? n.hpo_label : kNotMappable);
        out += ",";
        if (n.similarity) out += fmt_double(*n.similarity, 6);
        out += ",";
        if (n.mapped) out += n.id_verified ? "true" : "false";
        out += ",";
        out += verify_note_name(n.note);
        out += "\n";
    }
    return out;
}

std::vector<Sign> read_signs_csv(const std::string& content, const std::string& context) {
    const auto rows = parse_csv(content);
    if (rows.empty() || rows[0].empty() || rows[0][0] != "sign") {
        throw ParseError("bad signs file header in " + context);
    }
    std::vector<Sign> signs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (!rows[r].empty() && !rows[r][0].empty()) signs.push_back(Sign::make(rows[r][0]));
    }
    return signs;
}

CategorizedSigns read_categories_csv(const std::string& content, const std::string& context) {
    const auto rows = parse_csv(content);
    if (rows.empty() || rows[0].size() < 2 || rows[0][0] != "category") {
        throw ParseError("bad categories file header in " + context);
    }
    CategorizedSigns categorized;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() < 2) continue;
        auto category = category_from_name(rows[r][0]);
        if (!category) throw ParseError("unknown category '" + rows[r][0] + "' in " + context);
        categorized[*category].push_back(Sign::make(rows[r][1]));
    }
    return categorized;
}

std::vector<NormalizedSign> read_normalized_csv(const std::string& content,
                                                const std::string& context) {
    const auto rows = parse_csv(content);
    if (rows.empty() || rows[0].empty() || rows[0][0] != "input_sign") {
        throw ParseError("bad normalized file header in " + context);
    }
    std::vector<NormalizedSign> normalized;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() < 7) throw ParseError("short normalized row in " + context);
        NormalizedSign n;
        n.input = Sign::make(row[0]);
        n.strategy = row[1] == "backend" ? MapStrategy::backend : MapStrategy::embedding;
        n.mapped = row[2] != kNotMappable;
        if (n.mapped) {
            n.hpo_id = row[2];
            n.hpo_label = row[3];
            n.id_verified = row[5] == "true";
        }
        if (!row[4].empty()) n.similarity = std::stod(row[4]);
        normalized.push_back(std::move(n));
    }
    return normalized;
}

// ---------------------------------------------------------------------------
// fetch

int cmd_fetch(const RunConfig& config, const std::vector<std::string>& series_ids,
              std::ostream& out, std::ostream& err) {
    try {
        if (!config.offline && config.omim_api_key.empty() && config.manifest_path.empty()) {
            throw AuthError("OMIM_API_KEY is not set (required unless --offline or --manifest)");
        }

        OmimConfig omim;
        omim.base_url = config.omim_base_url;
        omim.api_key = config.omim_api_key;
        omim.offline = config.offline;
        omim.max_attempts = config.max_attempts;
        omim.initial_backoff = config.initial_backoff;
        omim.limiter = std::make_shared<TokenBucket>(config.requests_per_second,
                                                     std::max(1.0, config.requests_per_second));
        OmimClient client(omim, DiskCache(config.cache_dir));

        // Manifests come from the API or from a user-supplied file; the
        // file path exists because series ids are configuration, never
        // hardcoded.
        std::vector<SeriesManifest> manifests;
        std::vector<std::pair<std::string, std::string>> series_failures;
        if (!config.manifest_path.empty()) {
            manifests = load_manifest_file(config.manifest_path);
            DiskCache cache(config.cache_dir);
            for (const SeriesManifest& manifest : manifests) {
                json doc = {{"series_id", manifest.series_id.str()},
                            {"name", manifest.name},
                            {"diseases", json::array()},
                            {"raw", ""}};
                for (const SeriesEntry& e : manifest.diseases) {
                    doc["diseases"].push_back({{"mim", e.mim.str()}, {"name", e.name}});
                }
                cache.write(OmimClient::series_cache_key(manifest.series_id), doc.dump(2) + "\n");
            }
        } else {
            for (const std::string& raw_id : series_ids) {
                const auto series_id = PhenotypicSeriesId::parse(raw_id);
                try {
                    manifests.push_back(client.fetch_series(series_id));
                } catch (const AuthError&) {
                    throw;
                } catch (const std::exception& e) {
                    series_failures.emplace_back(series_id.str(), e.what());
                }
            }
        }

        std::vector<MimNumber> mims;
        {
            std::set<MimNumber> unique;
            for (const SeriesManifest& manifest : manifests) {
                for (const SeriesEntry& e : manifest.diseases) unique.insert(e.mim);
            }
            mims.assign(unique.begin(), unique.end());
        }

        std::vector<std::string> failures(mims.size());
        std::atomic<int> fetched{0};
        std::atomic<bool> auth_failed{false};
        std::string auth_message;
        std::mutex auth_mutex;
        parallel_for(mims.size(), config.max_inflight, [&](std::size_t i) {
            if (auth_failed.load()) return;
            try {
                client.fetch_summary(mims[i]);
                ++fetched;
            } catch (const AuthError& e) {
                auth_failed.store(true);
                std::lock_guard<std::mutex> lock(auth_mutex);
                auth_message = e.what();
            } catch (const std::exception& e) {
                failures[i] = e.what();
            }
        });
        if (auth_failed.load()) throw AuthError(auth_message);

        out << "fetched " << manifests.size() << " series manifest(s), " << fetched.load()
            << " of " << mims.size() << " summaries into " << config.cache_dir.string() << "\n";
        for (const auto& [series, reason] : series_failures) {
            err << "series " << series << " failed: " << reason << "\n";
        }
        for (std::size_t i = 0; i < mims.size(); ++i) {
            if (!failures[i].empty()) {
                err << "MIM " << mims[i].str() << " failed: " << failures[i] << "\n";
            }
        }
        return 0;
    } catch (const std::exception& e) {
        err << "fetch: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

// ---------------------------------------------------------------------------
// phenotype

int cmd_phenotype(const RunConfig& config, std::ostream& out, std::ostream& err) {
    try {
        const auto wall_start = std::chrono::steady_clock::now();
        if (config.hpo_path.empty()) throw ValidationError("phenotype requires --hpo");
        std::vector<std::string> load_warnings;
        const HpoIndex index = load_ontology(config.hpo_path, &load_warnings);

        const bool embedding_strategy = config.normalize_strategy == "embedding";
        if (!embedding_strategy && config.normalize_strategy != "backend") {
            throw ValidationError("unknown normalize strategy '" + config.normalize_strategy + "'");
        }
        std::optional<EmbeddingStore> store;
        std::optional<CandidateCache> candidates;
        if (embedding_strategy) {
            if (config.vectors_path.empty()) {
                throw ValidationError("embedding normalization requires --vectors");
            }
            store.emplace(load_vectors(config.vectors_path, &load_warnings));
            candidates.emplace(*store, index, !config.labels_only);
        }

        const std::unique_ptr<Backend> backend = make_backend(config);
        const std::vector<MimNumber> mims = list_cached_summaries(config.cache_dir);
        if (mims.empty()) {
            throw NotFoundError("no cached summaries under " + config.cache_dir.string() +
                                "; run fetch first");
        }
        DiskCache cache(config.cache_dir);
        std::filesystem::create_directories(config.out_dir);

        const RetryPolicy retry{config.max_attempts, config.initial_backoff};
        std::vector<DiseaseRun> runs;
        runs.reserve(mims.size());
        for (const MimNumber& mim : mims) runs.emplace_back(mim);

        parallel_for(mims.size(), config.max_inflight, [&](std::size_t i) {
            DiseaseRun& run = runs[i];
            try {
                const auto cached = cache.read(OmimClient::summary_cache_key(run.mim));
                if (!cached) throw IoError("cached summary for " + run.mim.str() + " disappeared");
                const ClinicalSummary summary = parse_cached_summary(*cached, run.mim.str());
                run.words = count_words(compose_document(summary, config.include_synopsis));
                run.usable_summary = is_usable(summary, config.min_summary_chars);
                if (!run.usable_summary) {
                    run.unusable_reason = "empty-summary";
                    return;
                }
                LlmExchange identify_log;
                IdentifyOptions identify_options{config.include_synopsis, retry};
                run.outputs.signs = identify_signs(*backend, summary, identify_options, &identify_log);
                run.identify_seconds = identify_log.latency_seconds;
                if (identify_log.relaxed_json) ++run.relaxed_responses;
                if (run.outputs.signs.empty()) {
                    run.unusable_reason = "no-signs";
                    return;
                }
                run.usable = true;

                std::vector<LlmExchange> categorize_logs;
                CategorizeOptions categorize_options;
                categorize_options.retry = retry;
                const auto categorize_start = std::chrono::steady_clock::now();
                run.outputs.categories = categorize_signs(*backend, run.outputs.signs,
                                                          categorize_options, &run.warnings,
                                                          &categorize_logs);
                run.categorize_seconds = seconds_since(categorize_start);

                const auto normalize_start = std::chrono::steady_clock::now();
                if (embedding_strategy) {
                    for (const Sign& sign : run.outputs.signs) {
                        run.outputs.normalized.push_back(normalize_embedding(
                            *store, index, sign, config.min_similarity, &*candidates));
                    }
                } else {
                    NormalizeOptions normalize_options;
                    normalize_options.retry = retry;
                    std::vector<LlmExchange> normalize_logs;
                    run.outputs.normalized = normalize_backend(*backend, index, run.outputs.signs,
                                                               normalize_options, &normalize_logs);
                }
                run.normalize_seconds = seconds_since(normalize_start);
            } catch (const std::exception& e) {
                run.failure = e.what();
                run.usable = false;
            }
        });

        // Deterministic write-out in ascending MIM order.
        RunLog log;
        std::set<std::string> unique_signs;
        std::vector<std::pair<MimNumber, CategorizedSigns>> vector_input;
        json failures = json::object();
        json unusable = json::object();
        std::vector<std::string> warnings = load_warnings;
        int relaxed_responses = 0;

        for (const DiseaseRun& run : runs) {
            ++log.diseases_processed;
            log.words_processed += run.words;
            relaxed_responses += run.relaxed_responses;
            for (const std::string& w : run.warnings) warnings.push_back(w);
            if (!run.failure.empty()) {
                failures[run.mim.str()] = run.failure;
                continue;
            }
            if (!run.usable) {
                unusable[run.mim.str()] = run.unusable_reason;
                continue;
            }
            log.identify_seconds += run.identify_seconds;
            log.categorize_seconds += run.categorize_seconds;
            log.normalize_seconds += run.normalize_seconds;
            log.signs_identified += static_cast<int>(run.outputs.signs.size());
            log.signs_categorized += static_cast<int>(run.outputs.signs.size());
            log.signs_normalized += static_cast<int>(run.outputs.normalized.size());
            for (const Sign& sign : run.outputs.signs) unique_signs.insert(sign.canonical);

            write_file(config.out_dir / (run.mim.str() + ".signs.csv"), signs_csv(run.outputs));
            write_file(config.out_dir / (run.mim.str() + ".categories.csv"),
                       categories_csv(run.outputs));
            write_file(config.out_dir / (run.mim.str() + ".normalized.csv"),
                       normalized_csv(run.outputs));
            vector_input.emplace_back(run.mim, run.outputs.categories);
        }

        const VectorTable table = vectorize_corpus(vector_input);
        {
            std::ostringstream csv;
            write_vector_csv(table, csv);
            write_file(config.out_dir / "vectors.csv", csv.str());
        }

        log.wall_seconds = seconds_since(wall_start);
        const RunTimings timings = timing_report(log);

        json report = {
            {"backend", backend->name()},
            {"normalize_strategy", config.normalize_strategy},
            {"thresholds",
             {{"min_similarity", config.min_similarity}, {"min_summary_chars", config.min_summary_chars}}},
            {"checksums",
             {{"hpo", index.checksum()}, {"vectors", store ? store->checksum() : ""}}},
            {"counts",
             {{"diseases", log.diseases_processed},
              {"usable_diseases", static_cast<int>(vector_input.size())},
              {"signs_identified", log.signs_identified},
              {"unique_signs", static_cast<int>(unique_signs.size())},
              {"words_processed", log.words_processed}}},
            {"failures", failures},
            {"unusable", unusable},
            {"relaxed_json_responses", relaxed_responses},
            {"warnings", warnings},
            {"timings",
             {{"wall_seconds", log.wall_seconds},
              {"seconds_per_disease", timings.seconds_per_disease},
              {"identification_rate", timings.identification_rate},
              {"categorization_rate", timings.categorization_rate},
              {"normalization_rate", timings.normalization_rate}}},
        };
        write_file(config.out_dir / "run_report.json", report.dump(2) + "\n");

        out << "phenotyped " << vector_input.size() << " of " << log.diseases_processed
            << " diseases (" << failures.size() << " failures, " << unusable.size()
            << " unusable); outputs in " << config.out_dir.string() << "\n";
        for (const std::string& w : warnings) err << "warning: " << w << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "phenotype: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const RunConfig& config, const std::vector<std::string>& series_selection,
                std::ostream& out, std::ostream& err) {
    try {
        const VectorTable table = read_vector_csv(read_file(config.out_dir / "vectors.csv"));
        const std::vector<SeriesManifest> manifests = load_available_manifests(config);
        if (manifests.empty()) {
            throw NotFoundError("no series manifests available (cache or --manifest)");
        }
        std::vector<std::string> warnings;
        const auto membership = load_membership(manifests, &warnings);

        std::map<PhenotypicSeriesId, const SeriesManifest*> by_id;
        for (const SeriesManifest& manifest : manifests) by_id.emplace(manifest.series_id, &manifest);

        std::vector<PhenotypicSeriesId> selected;
        const bool explicit_selection = !series_selection.empty();
        if (explicit_selection) {
            for (const std::string& raw : series_selection) {
                const auto id = PhenotypicSeriesId::parse(raw);
                if (!by_id.count(id)) throw NotFoundError("unknown series " + id.str());
                selected.push_back(id);
            }
        } else {
            for (const auto& [id, manifest] : by_id) selected.push_back(id);
        }
        std::sort(selected.begin(), selected.end());
        selected.erase(std::unique(selected.begin(), selected.end()), selected.end());

        std::map<MimNumber, const DiseaseVector*> vector_of;
        for (const DiseaseVector& row : table.rows) vector_of.emplace(row.mim, &row);

        std::filesystem::create_directories(config.out_dir);
        for (const PhenotypicSeriesId& series : selected) {
            const SeriesManifest& manifest = *by_id.at(series);
            VectorTable subset;
            std::vector<std::vector<Sign>> member_signs;
            std::vector<CategorizedSigns> member_categories;
            for (const SeriesEntry& entry : manifest.diseases) {
                auto it = vector_of.find(entry.mim);
                if (it == vector_of.end()) continue; // unusable disease
                subset.rows.push_back(*it->second);
                const std::string stem = entry.mim.str();
                member_signs.push_back(read_signs_csv(
                    read_file(config.out_dir / (stem + ".signs.csv")), stem));
                member_categories.push_back(read_categories_csv(
                    read_file(config.out_dir / (stem + ".categories.csv")), stem));
            }
            if (subset.rows.empty()) {
                warnings.push_back("series " + series.str() + " has no usable diseases; skipped");
                continue;
            }
            std::sort(subset.rows.begin(), subset.rows.end(),
                      [](const DiseaseVector& a, const DiseaseVector& b) { return a.mim < b.mim; });

            for (const ColumnOrder order : {ColumnOrder::alphabetical, ColumnOrder::by_prevalence}) {
                const HeatmapMatrix matrix = build_heatmap(subset, order);
                const std::string stem =
                    series.str() + (order == ColumnOrder::alphabetical ? ".heatmap_alphabetical"
                                                                       : ".heatmap_by_prevalence");
                render_heatmap_svg(matrix, config.out_dir / (stem + ".svg"));
                std::ostringstream csv;
                write_heatmap_csv(matrix, csv);
                write_file(config.out_dir / (stem + ".csv"), csv.str());
            }
            {
                std::ostringstream csv;
                write_frequency_csv(term_frequencies(member_signs), "term", csv);
                write_file(config.out_dir / (series.str() + ".terms.csv"), csv.str());
            }
            {
                std::ostringstream csv;
                write_frequency_csv(category_frequencies(member_categories), "category", csv);
                write_file(config.out_dir / (series.str() + ".categories.csv"), csv.str());
            }
        }

        // Scatter + centroids. An explicit selection above the cap is an
        // error; an implicit one just skips the plot.
        if (selected.size() > 5) {
            if (explicit_selection) {
                throw ValidationError("scatter plot is capped at 5 phenotypic series, got " +
                                      std::to_string(selected.size()));
            }
            warnings.push_back("more than 5 series available; pass an explicit selection to draw "
                               "the centroid scatter");
        } else {
            const Projection2D projection = pca_project(table);
            std::map<MimNumber, PhenotypicSeriesId> projected_membership;
            for (const MimNumber& mim : projection.mims) {
                auto it = membership.find(mim);
                if (it == membership.end()) {
                    throw ValidationError("no phenotypic series covers projected MIM " + mim.str());
                }
                projected_membership.emplace(mim, it->second);
            }
            const std::vector<SeriesCentroid> all_centroids =
                centroids(projection, projected_membership);
            std::vector<SeriesCentroid> selected_centroids;
            for (const SeriesCentroid& centroid : all_centroids) {
                if (std::count(selected.begin(), selected.end(), centroid.series)) {
                    selected_centroids.push_back(centroid);
                }
            }
            const std::string stem = join_series(selected);
            render_scatter_svg(projection, projected_membership, selected_centroids,
                               config.out_dir / (stem + ".scatter.svg"));
            {
                std::ostringstream csv;
                write_points_csv(projection, projected_membership, csv);
                write_file(config.out_dir / (stem + ".points.csv"), csv.str());
            }
            {
                std::ostringstream csv;
                write_centroids_csv(selected_centroids, csv);
                write_file(config.out_dir / (stem + ".centroids.csv"), csv.str());
            }
        }

        out << "analyzed " << selected.size() << " series; outputs in " << config.out_dir.string()
            << "\n";
        for (const std::string& w : warnings) err << "warning: " << w << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "analyze: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

// ---------------------------------------------------------------------------
// evaluate

namespace {

// Pooled per-annotator gold material over the annotated diseases.
struct GoldPool {
    std::vector<Sign> signs;            // unique by canonical form
    SignCategoryMap categories;         // (mim, canonical sign) -> category
    GoldNormalization normalization;    // (mim, canonical sign) -> id or not-mappable
};

GoldPool pool_gold(const AnnotationSet& set) {
    GoldPool pool;
    std::set<std::string> seen;
    for (const auto& [mim, records] : set.by_disease) {
        for (const AnnotationRecord& record : records) {
            if (seen.insert(record.sign.canonical).second) pool.signs.push_back(record.sign);
            if (record.category) {
                pool.categories[{mim.str(), record.sign.canonical}] = *record.category;
            }
            if (record.hpo_id) {
                const std::string id = *record.hpo_id;
                pool.normalization[{mim.str(), record.sign.canonical}] =
                    to_lower(id) == kNotMappable ? std::optional<std::string>{} : std::optional<std::string>{id};
            }
        }
    }
    return pool;
}

json identification_block(const EmbeddingStore& store, const std::vector<Sign>& sys,
                          const std::vector<Sign>& gold, double match_threshold,
                          double weak_threshold) {
    std::set<std::string> sys_set;
    std::set<std::string> gold_set;
    for (const Sign& s : sys) sys_set.insert(s.canonical);
    for (const Sign& g : gold) gold_set.insert(g.canonical);

    json block = {
        {"signs_identified", sys.size()},
        {"gold_signs", gold.size()},
        {"jaccard", jaccard(sys_set, gold_set)},
    };
    try {
        const MaxSimilarityResult sim = max_similarity_index(store, sys, gold, weak_threshold);
        block["max_similarity_index"] = sim.index;
        block["weak_match_pct"] = sim.weak_pct;
        block["unembeddable_system"] = sim.unembeddable_sys;
        block["unembeddable_gold"] = sim.unembeddable_gold;
    } catch (const UndefinedMetricError& e) {
        block["max_similarity_error"] = e.what();
    }
    const Prf prf = identification_prf(store, sys, gold, match_threshold);
    block["precision"] = prf.precision;
    block["recall"] = prf.recall;
    block["f1"] = prf.f1;
    return block;
}

} // namespace

int cmd_evaluate(const RunConfig& config, const std::filesystem::path& annotations_path,
                 std::ostream& out, std::ostream& err) {
    try {
        const std::vector<AnnotationSet> annotators = load_annotations(annotations_path);
        if (config.vectors_path.empty()) throw ValidationError("evaluate requires --vectors");
        std::vector<std::string> warnings;
        const EmbeddingStore store = load_vectors(config.vectors_path, &warnings);
        std::optional<HpoIndex> index;
        if (!config.hpo_path.empty()) index.emplace(load_ontology(config.hpo_path, &warnings));

        // Annotated diseases must exist in the pipeline outputs.
        std::set<MimNumber> annotated;
        for (const AnnotationSet& set : annotators) {
            const auto mims = set.mims();
            annotated.insert(mims.begin(), mims.end());
        }
        std::vector<std::string> missing;
        for (const MimNumber& mim : annotated) {
            if (!std::filesystem::exists(config.out_dir / (mim.str() + ".signs.csv"))) {
                missing.push_back(mim.str());
            }
        }
        if (!missing.empty()) {
            std::string joined;
            for (const std::string& mim : missing) joined += (joined.empty() ? "" : ", ") + mim;
            throw ValidationError("annotations reference MIMs without pipeline outputs: " + joined);
        }

        // System outputs pooled over the annotated diseases.
        std::vector<Sign> sys_signs;
        std::set<std::string> sys_seen;
        SignCategoryMap sys_categories;
        PredictedNormalizationMap sys_normalization;
        for (const MimNumber& mim : annotated) {
            const std::string stem = mim.str();
            for (const Sign& sign :
                 read_signs_csv(read_file(config.out_dir / (stem + ".signs.csv")), stem)) {
                if (sys_seen.insert(sign.canonical).second) sys_signs.push_back(sign);
            }
            const CategorizedSigns categorized = read_categories_csv(
                read_file(config.out_dir / (stem + ".categories.csv")), stem);
            for (const auto& [category, members] : categorized) {
                for (const Sign& sign : members) {
                    sys_categories[{mim.str(), sign.canonical}] = category;
                }
            }
            for (const NormalizedSign& n : read_normalized_csv(
                     read_file(config.out_dir / (stem + ".normalized.csv")), stem)) {
                sys_normalization[{mim.str(), n.input.canonical}] =
                    PredictedNormalization{n.mapped, n.hpo_id, n.hpo_label};
            }
        }

        json identification = {{"per_annotator", json::object()}};
        json categorization = {{"per_annotator", json::object()}};
        json normalization = {{"per_annotator", json::object()}};
        json coverage = json::object();

        std::vector<Sign> union_signs;
        std::set<std::string> union_seen;
        SignCategoryMap union_categories;
        GoldNormalization union_normalization;

        for (const AnnotationSet& set : annotators) {
            const GoldPool pool = pool_gold(set);
            identification["per_annotator"][set.annotator] = identification_block(
                store, sys_signs, pool.signs, config.match_threshold, config.weak_threshold);

            if (!pool.categories.empty()) {
                try {
                    const CategorizationMetrics metrics =
                        categorization_metrics(sys_categories, pool.categories);
                    categorization["per_annotator"][set.annotator] = {
                        {"accuracy", metrics.accuracy},
                        {"macro_precision", metrics.macro_precision},
                        {"macro_recall", metrics.macro_recall},
                        {"evaluated", metrics.evaluated},
                    };
                } catch (const UndefinedMetricError& e) {
                    categorization["per_annotator"][set.annotator] = {{"error", e.what()}};
                }
            }

            if (!pool.normalization.empty()) {
                // The op requires every gold sign to carry a prediction;
                // gold rows for signs the system never extracted are
                // filtered out and counted instead of raising.
                GoldNormalization covered;
                int uncovered = 0;
                for (const auto& [key, gold_id] : pool.normalization) {
                    if (sys_normalization.count(key)) covered.emplace(key, gold_id);
                    else ++uncovered;
                }
                coverage[set.annotator] = {{"gold_rows_without_prediction", uncovered}};
                if (!covered.empty()) {
                    const NormalizationMetrics metrics = normalization_metrics(
                        index ? &*index : nullptr, sys_normalization, covered);
                    normalization["per_annotator"][set.annotator] = {
                        {"accuracy", metrics.accuracy},
                        {"precision", metrics.precision},
                        {"recall", metrics.recall},
                        {"evaluated", metrics.evaluated},
                        {"label_only", metrics.label_only},
                        {"gold_mappable", metrics.gold_mappable},
                        {"predicted_mapped", metrics.predicted_mapped},
                        {"correct_mapped", metrics.correct_mapped},
                    };
                }
            }

            for (const Sign& sign : pool.signs) {
                if (union_seen.insert(sign.canonical).second) union_signs.push_back(sign);
            }
            // First annotator (ascending id) wins union conflicts.
            for (const auto& [key, category] : pool.categories) union_categories.emplace(key, category);
            for (const auto& [key, gold_id] : pool.normalization) union_normalization.emplace(key, gold_id);
        }

        if (annotators.size() > 1) {
            identification["union"] = identification_block(store, sys_signs, union_signs,
                                                           config.match_threshold,
                                                           config.weak_threshold);
            json inter = json::object();
            for (const AnnotationSet& a : annotators) {
                for (const AnnotationSet& b : annotators) {
                    if (a.annotator == b.annotator) continue;
                    inter[a.annotator + "_vs_" + b.annotator] = identification_block(
                        store, pool_gold(a).signs, pool_gold(b).signs, config.match_threshold,
                        config.weak_threshold);
                }
            }
            identification["inter_annotator"] = inter;
        }

        json report = {
            {"decisions",
             {{"match_threshold", config.match_threshold},
              {"weak_threshold", config.weak_threshold},
              {"direction", "system signs are scored against each annotator's gold set; "
                            "recall covers gold signs against the system set"},
              {"exact_match_form", "lowercase preprocessed sign text"},
              {"checksums",
               {{"vectors", store.checksum()}, {"hpo", index ? index->checksum() : ""}}},
              {"normalization_coverage", coverage}}},
            {"identification", identification},
            {"categorization", categorization},
            {"normalization", normalization},
        };
        if (auto run_report = std::filesystem::path(config.out_dir / "run_report.json");
            std::filesystem::exists(run_report)) {
            const json run = json::parse(read_file(run_report), nullptr, false);
            if (!run.is_discarded() && run.contains("counts")) report["counts"] = run["counts"];
        }

        write_file(config.out_dir / "evaluation.json", report.dump(2) + "\n");
        out << "evaluation written to " << (config.out_dir / "evaluation.json").string() << "\n";
        for (const std::string& w : warnings) err << "warning: " << w << "\n";
        return 0;
    } catch (const std::exception& e) {
        err << "evaluate: " << e.what() << "\n";
        return exit_code_for(e);
    }
}

} // namespace htp
