#pragma once

#include <chrono>
#include <filesystem>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "htp/errors.hpp"
#include "htp/prompts.hpp"
#include "htp/rate_limiter.hpp"

namespace htp {

// One stage call. Chat backends consume the rendered prompt texts;
// deterministic backends use the structured payload fields directly so
// they never re-parse prompts.
struct StageRequest {
    Stage stage;
    std::string context_key; // MIM driving replay fixture lookup
    std::string system_text;
    std::string user_text;
    std::string document;            // identify: composed summary text
    std::vector<std::string> items;  // categorize/normalize: sign texts
};

// Record of one stage call, kept for run reports and timing metrics.
struct LlmExchange {
    Stage stage;
    std::string context_key;
    std::string raw_response;
    bool parsed = false;
    bool relaxed_json = false;
    int attempts = 0;
    double latency_seconds = 0.0;
    std::string error; // last failure; empty on success
};

struct RetryPolicy {
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{250};
};

// Pluggable extractor backend. Implementations must be safely shareable
// across concurrent per-disease tasks.
class Backend {
public:
    virtual ~Backend() = default;
    virtual const std::string& name() const = 0;

    // Deterministic backends return identical output for identical
    // input and configuration; retrying them cannot change the result.
    virtual bool deterministic() const = 0;

    // Returns raw response text. Throws NetworkError for retriable
    // transport failures.
    virtual std::string complete(const StageRequest& request) = 0;
};

// Chat-completions HTTP backend.
struct ChatConfig {
    std::string base_url = "https://api.openai.com";
    std::string api_key;
    std::string model = "gpt-4";
    double temperature = 0.0;
    bool request_json_object = true;
    int timeout_seconds = 120;
    std::shared_ptr<TokenBucket> limiter; // optional shared rate limit
};

class ChatBackend : public Backend {
public:
    explicit ChatBackend(ChatConfig config);
    const std::string& name() const override { return name_; }
    bool deterministic() const override { return false; }
    std::string complete(const StageRequest& request) override;

private:
    ChatConfig config_;
    std::string name_;
};

// Serves canned responses from files named <context_key>.<stage>.json.
class ReplayBackend : public Backend {
public:
    explicit ReplayBackend(std::filesystem::path fixture_dir);
    const std::string& name() const override { return name_; }
    bool deterministic() const override { return true; }
    std::string complete(const StageRequest& request) override;

private:
    std::filesystem::path dir_;
    std::string name_;
};

// Deterministic offline backend: identifies signs by longest-match
// lexicon scan, categorizes by category-name substring, and reports
// every sign as not-mappable for normalization.
class LexiconBackend : public Backend {
public:
    explicit LexiconBackend(std::vector<std::string> phrases);
    const std::string& name() const override { return name_; }
    bool deterministic() const override { return true; }
    std::string complete(const StageRequest& request) override;

    const std::vector<std::string>& phrases() const { return phrases_; }

private:
    std::vector<std::string> phrases_;
    std::string name_;
};

// One phrase per line, UTF-8; blank lines and '#' comments skipped.
// Phrases are preprocessed on load.
std::vector<std::string> load_lexicon(const std::filesystem::path& path);

// Calls backend.complete and parses the raw response, retrying up to
// policy.max_attempts total attempts across transport and parse
// failures (exponential backoff after transport errors only).
// Deterministic backends get a single attempt: identical input yields
// identical output, so retries cannot help.
template <typename Parse>
auto call_stage(Backend& backend, const StageRequest& request, const RetryPolicy& policy,
                Parse&& parse, LlmExchange* exchange = nullptr) -> decltype(parse(std::string{})) {
    const int max_attempts = backend.deterministic() ? 1 : std::max(1, policy.max_attempts);
    auto backoff = policy.initial_backoff;
    const auto start = std::chrono::steady_clock::now();
    auto stamp_latency = [&] {
        if (exchange) {
            exchange->latency_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    };
    for (int attempt = 1;; ++attempt) {
        if (exchange) ++exchange->attempts;
        bool transport_failure = false;
        try {
            std::string raw = backend.complete(request);
            if (exchange) exchange->raw_response = raw;
            auto result = parse(raw);
            if (exchange) exchange->parsed = true;
            stamp_latency();
            return result;
        } catch (const NetworkError& e) {
            if (exchange) exchange->error = e.what();
            transport_failure = true;
            if (attempt >= max_attempts) {
                stamp_latency();
                throw;
            }
        } catch (const ParseError& e) {
            if (exchange) exchange->error = e.what();
            if (attempt >= max_attempts) {
                stamp_latency();
                throw;
            }
        }
        if (transport_failure) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
}

} // namespace htp
