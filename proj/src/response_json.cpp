#include "htp/response_json.hpp"

#include <cctype>
#include <optional>

namespace htp {

namespace {

// Substring spanning the first balanced {...} group, honoring
// double-quoted strings and escapes. nullopt when absent or unbalanced.
std::optional<std::string_view> first_balanced_object(std::string_view text) {
    const std::size_t open = text.find('{');
    if (open == std::string_view::npos) return std::nullopt;
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = open; i < text.size(); ++i) {
        const char c = text[i];
        if (in_string) {
            if (c == '\\') ++i;
            else if (c == '"') in_string = false;
            continue;
        }
        if (c == '"') in_string = true;
        else if (c == '{') ++depth;
        else if (c == '}') {
            if (--depth == 0) return text.substr(open, i - open + 1);
        }
    }
    return std::nullopt;
}

bool closes_single_quoted_string(std::string_view text, std::size_t after_quote) {
    for (std::size_t i = after_quote; i < text.size(); ++i) {
        const char c = text[i];
        if (c == ' ' || c == '\t') continue;
        return c == ',' || c == ':' || c == ']' || c == '}' || c == '\n' || c == '\r';
    }
    return true; // end of input
}

} // namespace

std::string_view strip_code_fence(std::string_view raw) {
    const std::size_t open = raw.find("```");
    if (open == std::string_view::npos) return raw;
    std::size_t body = open + 3;
    // Optional language tag on the fence line.
    while (body < raw.size() && raw[body] != '\n' && raw[body] != '{' && raw[body] != '[') ++body;
    if (body < raw.size() && raw[body] == '\n') ++body;
    const std::size_t close = raw.find("```", body);
    if (close == std::string_view::npos) return raw.substr(body);
    return raw.substr(body, close - body);
}

std::string relax_single_quotes(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool in_double = false;
    bool in_single = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_double) {
            out.push_back(c);
            if (c == '\\' && i + 1 < text.size()) {
                out.push_back(text[++i]);
            } else if (c == '"') {
                in_double = false;
            }
            continue;
        }
        if (in_single) {
            if (c == '\'') {
                if (closes_single_quoted_string(text, i + 1)) {
                    out.push_back('"');
                    in_single = false;
                } else {
                    out.push_back('\''); // interior apostrophe
                }
            } else if (c == '"') {
                out += "\\\"";
            } else if (c == '\\') {
                out += "\\\\";
            } else {
                out.push_back(c);
            }
            continue;
        }
        if (c == '"') {
            in_double = true;
            out.push_back(c);
        } else if (c == '\'') {
            in_single = true;
            out.push_back('"');
        } else {
            out.push_back(c);
        }
    }
    return out;
}

nlohmann::json extract_json_object(std::string_view raw, bool* relaxed) {
    if (relaxed) *relaxed = false;
    const std::string_view body = strip_code_fence(raw);

    if (auto strict = first_balanced_object(body)) {
        auto parsed = nlohmann::json::parse(*strict, nullptr, false);
        if (!parsed.is_discarded()) return parsed;
    }

    const std::string relaxed_body = relax_single_quotes(body);
    if (auto candidate = first_balanced_object(relaxed_body)) {
        auto parsed = nlohmann::json::parse(*candidate, nullptr, false);
        if (!parsed.is_discarded()) {
            if (relaxed) *relaxed = true;
            return parsed;
        }
    }

    if (body.find('{') == std::string_view::npos) {
        throw ParseError("response contains no JSON object");
    }
    throw ParseError("response contains no parseable JSON object");
}

} // namespace htp
