#include "htp/backend.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "htp/categorize.hpp"
#include "htp/errors.hpp"
#include "htp/extraction.hpp"
#include "htp/text.hpp"

namespace htp {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

} // namespace

ChatBackend::ChatBackend(ChatConfig config)
    : config_(std::move(config)), name_("chat:" + config_.model) {}

std::string ChatBackend::complete(const StageRequest& request) {
    if (config_.limiter) config_.limiter->acquire();

    json body = {
        {"model", config_.model},
        {"temperature", config_.temperature},
        {"messages",
         json::array({
             json{{"role", "system"}, {"content", request.system_text}},
             json{{"role", "user"}, {"content", request.user_text}},
         })},
    };
    if (config_.request_json_object) {
        body["response_format"] = json{{"type", "json_object"}};
    }

    httplib::Client client(config_.base_url);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + config_.api_key);
    }

    auto res = client.Post("/v1/chat/completions", headers, body.dump(), "application/json");
    if (!res) {
        throw NetworkError("chat backend: request failed: " + httplib::to_string(res.error()));
    }
    if (res->status == 401 || res->status == 403) {
        throw AuthError("chat backend: authentication rejected (HTTP " + std::to_string(res->status) + ")");
    }
    if (res->status == 429 || res->status >= 500) {
        throw NetworkError("chat backend: HTTP " + std::to_string(res->status));
    }
    if (res->status != 200) {
        throw Error("chat backend: unexpected HTTP " + std::to_string(res->status) + ": " + res->body);
    }

    const json doc = json::parse(res->body, nullptr, false);
    if (doc.is_discarded() || !doc.contains("choices") || !doc["choices"].is_array() ||
        doc["choices"].empty() || !doc["choices"][0].contains("message")) {
        throw ParseError("chat backend: malformed completion response body");
    }
    return doc["choices"][0]["message"].value("content", "");
}

ReplayBackend::ReplayBackend(std::filesystem::path fixture_dir)
    : dir_(std::move(fixture_dir)), name_("replay") {}

std::string ReplayBackend::complete(const StageRequest& request) {
    const std::filesystem::path path =
        dir_ / (request.context_key + "." + std::string(stage_name(request.stage)) + ".json");
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw NotFoundError("replay backend: no fixture " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

LexiconBackend::LexiconBackend(std::vector<std::string> phrases)
    : phrases_(std::move(phrases)), name_("lexicon") {}

std::string LexiconBackend::complete(const StageRequest& request) {
    switch (request.stage) {
    case Stage::identify: {
        ordered_json signs = ordered_json::array();
        for (const Sign& sign : lexicon_extract(phrases_, request.document)) {
            signs.push_back(sign.text);
        }
        return ordered_json{{"Signs", signs}}.dump();
    }
    case Stage::categorize: {
        // First canonical category whose lowercased name occurs in the
        // sign text; no match lands in Unclassified.
        ordered_json result = ordered_json::object();
        for (const std::string& item : request.items) {
            const std::string canonical = canonical_sign(item);
            std::string assigned(category_name(Category::Unclassified));
            for (int c = 0; c < kCategoryCount; ++c) {
                const std::string needle = to_lower(category_names()[static_cast<std::size_t>(c)]);
                if (canonical.find(needle) != std::string::npos) {
                    assigned = category_names()[static_cast<std::size_t>(c)];
                    break;
                }
            }
            if (!result.contains(assigned)) result[assigned] = ordered_json::array();
            result[assigned].push_back(item);
        }
        return result.dump();
    }
    case Stage::normalize: {
        // A plain lexicon has no ontology knowledge.
        ordered_json result = ordered_json::object();
        for (const std::string& item : request.items) {
            result[item] = ordered_json{{"HPO Term", "not-mappable"}, {"HPO ID", "not-mappable"}};
        }
        return result.dump();
    }
    }
    throw Error("lexicon backend: unknown stage");
}

std::vector<std::string> load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open lexicon file: " + path.string());
    std::vector<std::string> phrases;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (is_blank(line) || line.front() == '#') continue;
        const std::string phrase = preprocess(line);
        if (!phrase.empty()) phrases.push_back(phrase);
    }
    return phrases;
}

} // namespace htp
