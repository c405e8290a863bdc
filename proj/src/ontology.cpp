#include "htp/ontology.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "htp/text.hpp"

namespace htp {

namespace {

using nlohmann::json;

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

// A term stanza under construction, plus where it started for error
// reporting.
struct RawStanza {
    std::size_t line = 0;
    std::optional<std::string> id;
    std::optional<std::string> name;
    std::vector<std::string> synonyms;
    std::vector<std::string> parents;
    bool obsolete = false;
};

// synonym: "Oral apraxia" EXACT []  ->  Oral apraxia
std::optional<std::string> parse_synonym_value(std::string_view value) {
    const std::size_t open = value.find('"');
    if (open == std::string_view::npos) return std::nullopt;
    std::size_t close = open + 1;
    std::string out;
    while (close < value.size()) {
        if (value[close] == '\\' && close + 1 < value.size()) {
            out.push_back(value[close + 1]);
            close += 2;
            continue;
        }
        if (value[close] == '"') return out;
        out.push_back(value[close]);
        ++close;
    }
    return std::nullopt;
}

void add_synonym(HpoTerm& term, std::string_view synonym) {
    const std::string norm = normalize_label(synonym);
    if (norm.empty()) return;
    if (normalize_label(term.label) == norm) return;
    for (const std::string& existing : term.synonyms) {
        if (normalize_label(existing) == norm) return;
    }
    term.synonyms.emplace_back(synonym);
}

std::optional<HpoTerm> finish_stanza(const RawStanza& stanza, std::vector<std::string>* warnings) {
    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };
    if (!stanza.id) {
        warn("ontology: stanza at line " + std::to_string(stanza.line) + " has no id, skipped");
        return std::nullopt;
    }
    auto id = HpoId::try_parse(*stanza.id);
    if (!id) {
        warn("ontology: stanza at line " + std::to_string(stanza.line) + " has malformed id '" +
             *stanza.id + "', skipped");
        return std::nullopt;
    }
    if (!stanza.name || is_blank(*stanza.name)) {
        warn("ontology: stanza at line " + std::to_string(stanza.line) + " (" + id->str() +
             ") has no name, skipped");
        return std::nullopt;
    }
    HpoTerm term{*id, std::string(trim(*stanza.name)), {}, {}, stanza.obsolete};
    for (const std::string& syn : stanza.synonyms) add_synonym(term, syn);
    for (const std::string& parent : stanza.parents) {
        if (auto pid = HpoId::try_parse(parent)) term.parents.push_back(*pid);
    }
    return term;
}

std::vector<HpoTerm> parse_obo(std::istream& in, std::vector<std::string>* warnings) {
    std::vector<HpoTerm> terms;
    std::size_t total_stanzas = 0;
    std::size_t malformed = 0;

    std::optional<RawStanza> current;
    bool in_term = false;
    std::string line;
    std::size_t lineno = 0;

    auto close_current = [&]() {
        if (!in_term || !current) return;
        ++total_stanzas;
        if (auto term = finish_stanza(*current, warnings)) {
            terms.push_back(std::move(*term));
        } else {
            ++malformed;
        }
        current.reset();
    };

    while (std::getline(in, line)) {
        ++lineno;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '!') continue;
        if (sv.front() == '[') {
            close_current();
            in_term = (sv == "[Term]");
            if (in_term) {
                current.emplace();
                current->line = lineno;
            }
            continue;
        }
        if (!in_term || !current) continue;
        const std::size_t colon = sv.find(':');
        if (colon == std::string_view::npos) continue;
        const std::string_view key = trim(sv.substr(0, colon));
        std::string_view value = trim(sv.substr(colon + 1));
        // Strip trailing OBO comments outside quotes.
        if (key != "synonym") {
            const std::size_t bang = value.find('!');
            if (bang != std::string_view::npos) value = trim(value.substr(0, bang));
        }
        if (key == "id") {
            current->id = std::string(value);
        } else if (key == "name") {
            current->name = std::string(value);
        } else if (key == "synonym") {
            if (auto syn = parse_synonym_value(value)) current->synonyms.push_back(*syn);
        } else if (key == "is_a") {
            current->parents.emplace_back(value);
        } else if (key == "is_obsolete") {
            current->obsolete = (value == "true");
        }
    }
    close_current();

    if (total_stanzas > 0 && malformed * 100 > total_stanzas) {
        throw ParseError("ontology: " + std::to_string(malformed) + " of " +
                         std::to_string(total_stanzas) + " term stanzas are malformed (>1%)");
    }
    return terms;
}

// Accepts both CURIE ("HP:0000687") and OBO PURL
// ("http://purl.obolibrary.org/obo/HP_0000687") node identifiers.
std::optional<HpoId> node_id_to_hpo(std::string_view node_id) {
    if (auto id = HpoId::try_parse(node_id)) return id;
    const std::size_t slash = node_id.rfind('/');
    std::string tail(slash == std::string_view::npos ? node_id : node_id.substr(slash + 1));
    std::replace(tail.begin(), tail.end(), '_', ':');
    return HpoId::try_parse(tail);
}

std::vector<HpoTerm> parse_json_graph(const std::string& content, std::vector<std::string>* warnings) {
    json doc;
    try {
        doc = json::parse(content);
    } catch (const json::exception& e) {
        throw ParseError(std::string("ontology: invalid JSON graph document: ") + e.what());
    }
    if (!doc.contains("graphs") || !doc["graphs"].is_array() || doc["graphs"].empty()) {
        throw ParseError("ontology: JSON document has no graphs array");
    }

    std::vector<HpoTerm> terms;
    std::size_t total_nodes = 0;
    std::size_t malformed = 0;
    std::map<std::string, std::size_t> index_of;

    for (const json& graph : doc["graphs"]) {
        for (const json& node : graph.value("nodes", json::array())) {
            if (!node.contains("id")) continue;
            auto id = node_id_to_hpo(node["id"].get<std::string>());
            if (!id) continue; // non-HP node (property, other ontology)
            ++total_nodes;
            std::string label = node.value("lbl", "");
            if (is_blank(label)) {
                ++malformed;
                if (warnings) {
                    warnings->push_back("ontology: node " + id->str() + " has no label, skipped");
                }
                continue;
            }
            HpoTerm term{*id, std::string(trim(label)), {}, {}, false};
            if (node.contains("meta")) {
                const json& meta = node["meta"];
                term.obsolete = meta.value("deprecated", false);
                for (const json& syn : meta.value("synonyms", json::array())) {
                    if (syn.contains("val")) add_synonym(term, syn["val"].get<std::string>());
                }
            }
            index_of[term.id.str()] = terms.size();
            terms.push_back(std::move(term));
        }
        for (const json& edge : graph.value("edges", json::array())) {
            if (edge.value("pred", "") != "is_a") continue;
            auto sub = node_id_to_hpo(edge.value("sub", ""));
            auto obj = node_id_to_hpo(edge.value("obj", ""));
            if (!sub || !obj) continue;
            auto it = index_of.find(sub->str());
            if (it != index_of.end()) terms[it->second].parents.push_back(*obj);
        }
    }

    if (total_nodes > 0 && malformed * 100 > total_nodes) {
        throw ParseError("ontology: " + std::to_string(malformed) + " of " +
                         std::to_string(total_nodes) + " HP nodes are malformed (>1%)");
    }
    return terms;
}

} // namespace

std::optional<HpoId> HpoId::try_parse(std::string_view s) {
    if (s.size() != 10 || s.substr(0, 3) != "HP:") return std::nullopt;
    for (char c : s.substr(3)) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return std::nullopt;
    }
    return HpoId(std::string(s));
}

HpoId HpoId::parse(std::string_view s) {
    auto id = try_parse(s);
    if (!id) throw ValidationError("invalid HPO id: '" + std::string(s) + "' (expected HP: plus 7 digits)");
    return *id;
}

const HpoTerm* HpoIndex::find(const HpoId& id) const {
    auto it = by_id_.find(id.str());
    return it == by_id_.end() ? nullptr : &terms_[it->second];
}

const HpoTerm* HpoIndex::find_id(std::string_view raw_id) const {
    return find(HpoId::parse(raw_id));
}

const HpoTerm* HpoIndex::find_label(std::string_view label) const {
    auto it = by_label_.find(normalize_label(label));
    return it == by_label_.end() ? nullptr : &terms_[it->second];
}

HpoIndex load_ontology(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open ontology file: " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    const std::size_t first = content.find_first_not_of(" \t\r\n");
    std::vector<HpoTerm> terms;
    if (first != std::string::npos && content[first] == '{') {
        terms = parse_json_graph(content, warnings);
    } else {
        std::istringstream stream(content);
        terms = parse_obo(stream, warnings);
    }
    if (terms.empty()) throw ParseError("ontology: no terms found in " + path.string());

    std::sort(terms.begin(), terms.end(),
              [](const HpoTerm& a, const HpoTerm& b) { return a.id < b.id; });

    HpoIndex index;
    index.terms_ = std::move(terms);
    index.checksum_ = file_checksum(path);
    for (std::size_t i = 0; i < index.terms_.size(); ++i) {
        const HpoTerm& term = index.terms_[i];
        if (!index.by_id_.emplace(term.id.str(), i).second) {
            throw ParseError("ontology: duplicate term id " + term.id.str());
        }
        if (term.obsolete) continue;
        auto claim = [&](const std::string& text) {
            const std::string key = normalize_label(text);
            if (key.empty()) return;
            auto [it, inserted] = index.by_label_.emplace(key, i);
            if (!inserted && warnings && index.terms_[it->second].id != term.id) {
                // Ascending id order means the existing claim already wins.
                warnings->push_back("ontology: label '" + key + "' of " + term.id.str() +
                                    " collides with " + index.terms_[it->second].id.str() +
                                    " (lowest id wins)");
            }
        };
        claim(term.label);
        for (const std::string& syn : term.synonyms) claim(syn);
    }
    return index;
}

} // namespace htp
