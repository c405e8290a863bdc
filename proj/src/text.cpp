#include "htp/text.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>

#include "htp/errors.hpp"

namespace htp {

namespace {

bool is_space_byte(unsigned char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_replaced_punct(unsigned char c) {
    switch (c) {
    case ',':
    case '-':
    case ';':
    case '\'':
    case '"':
    case '/':
    case '\\':
        return true;
    default:
        return false;
    }
}

// UTF-8 dash/quote variants that standardize to a space alongside their
// ASCII forms: en dash, em dash, curly single and double quotes.
std::size_t utf8_replaced_punct(std::string_view s, std::size_t i) {
    if (i + 2 < s.size() && static_cast<unsigned char>(s[i]) == 0xE2 &&
        static_cast<unsigned char>(s[i + 1]) == 0x80) {
        switch (static_cast<unsigned char>(s[i + 2])) {
        case 0x93: // en dash
        case 0x94: // em dash
        case 0x98: // left single quote
        case 0x99: // right single quote
        case 0x9C: // left double quote
        case 0x9D: // right double quote
            return 3;
        default:
            break;
        }
    }
    return 0;
}

} // namespace

std::string preprocess(std::string_view raw) {
    std::string out;
    out.reserve(raw.size());
    bool pending_space = false;
    std::size_t i = 0;
    while (i < raw.size()) {
        const unsigned char c = static_cast<unsigned char>(raw[i]);
        std::size_t skip = 1;
        bool as_space = false;
        if (is_space_byte(c) || is_replaced_punct(c)) {
            as_space = true;
        } else if (std::size_t n = utf8_replaced_punct(raw, i); n > 0) {
            as_space = true;
            skip = n;
        }
        if (as_space) {
            pending_space = true;
        } else {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.append(raw.substr(i, skip));
        }
        i += skip;
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !is_space_byte(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) tokens.emplace_back(text.substr(start, i - start));
    }
    return tokens;
}

std::size_t count_words(std::string_view text) {
    std::size_t count = 0;
    bool in_token = false;
    for (char ch : text) {
        if (is_space_byte(static_cast<unsigned char>(ch))) {
            in_token = false;
        } else if (!in_token) {
            in_token = true;
            ++count;
        }
    }
    return count;
}

std::string normalize_label(std::string_view s) {
    std::string lowered = to_lower(s);
    std::vector<std::string> tokens = tokenize(lowered);
    std::string out;
    for (const std::string& tok : tokens) {
        std::size_t b = 0;
        std::size_t e = tok.size();
        while (b < e && std::ispunct(static_cast<unsigned char>(tok[b]))) ++b;
        while (e > b && std::ispunct(static_cast<unsigned char>(tok[e - 1]))) --e;
        if (b == e) continue;
        if (!out.empty()) out.push_back(' ');
        out.append(tok.substr(b, e - b));
    }
    return out;
}

std::string canonical_sign(std::string_view s) {
    return to_lower(preprocess(s));
}

bool is_blank(std::string_view s) {
    for (char ch : s) {
        if (!is_space_byte(static_cast<unsigned char>(ch))) return false;
    }
    return true;
}

std::string file_checksum(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read file for checksum: " + path.string());
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    char buf[65536];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        const std::streamsize n = in.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ULL;
        }
    }
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx", static_cast<unsigned long long>(hash));
    return hex;
}

std::string fmt_double(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

std::string csv_field(std::string_view field) {
    const bool needs_quotes = field.find_first_of(",\"\n\r") != std::string_view::npos;
    if (!needs_quotes) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::vector<std::string> parse_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool in_quotes = false;
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"' && cur.empty()) {
            in_quotes = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
        ++i;
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::vector<std::vector<std::string>> parse_csv(std::string_view content) {
    std::vector<std::vector<std::string>> rows;
    std::size_t start = 0;
    while (start <= content.size()) {
        if (start == content.size()) break;
        std::size_t end = content.find('\n', start);
        std::string_view line;
        if (end == std::string_view::npos) {
            line = content.substr(start);
            start = content.size();
        } else {
            line = content.substr(start, end - start);
            start = end + 1;
        }
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        rows.push_back(parse_csv_line(line));
    }
    return rows;
}

} // namespace htp
