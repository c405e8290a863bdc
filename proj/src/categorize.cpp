#include "htp/categorize.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "htp/response_json.hpp"
#include "htp/text.hpp"

namespace htp {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const std::map<std::string, Category>& category_lookup() {
    static const std::map<std::string, Category> lookup = [] {
        std::map<std::string, Category> m;
        for (int i = 0; i < kCategoryCount; ++i) {
            m.emplace(normalize_label(category_names()[static_cast<std::size_t>(i)]),
                      static_cast<Category>(i));
        }
        return m;
    }();
    return lookup;
}

// Per-chunk backend call: renders the prompt over the chunk's sign
// texts and parses the category -> signs object.
std::map<std::string, std::vector<std::string>> categorize_chunk(
    Backend& backend, const std::vector<Sign>& chunk, const CategorizeOptions& options,
    std::vector<LlmExchange>* exchanges) {
    ordered_json sign_list = ordered_json::array();
    for (const Sign& sign : chunk) sign_list.push_back(sign.text);
    auto rendered = categorize_prompt().render({{"signs", sign_list.dump()}});

    StageRequest request;
    request.stage = Stage::categorize;
    request.system_text = std::move(rendered.system_text);
    request.user_text = std::move(rendered.user_text);
    for (const Sign& sign : chunk) request.items.push_back(sign.text);

    LlmExchange log;
    log.stage = Stage::categorize;
    auto result = call_stage(
        backend, request, options.retry,
        [](const std::string& raw) {
            const json doc = extract_json_object(raw);
            if (!doc.is_object()) throw ParseError("categorize response is not a JSON object");
            std::map<std::string, std::vector<std::string>> assignments;
            for (const auto& [key, value] : doc.items()) {
                if (!value.is_array()) {
                    throw ParseError("categorize response category \"" + key + "\" is not an array");
                }
                auto& bucket = assignments[key];
                for (const json& member : value) {
                    if (!member.is_string()) {
                        throw ParseError("categorize response category \"" + key +
                                         "\" contains a non-string member");
                    }
                    bucket.push_back(member.get<std::string>());
                }
            }
            return assignments;
        },
        &log);
    if (exchanges) exchanges->push_back(std::move(log));
    return result;
}

} // namespace

const std::array<std::string, kCategoryCount>& category_names() {
    static const std::array<std::string, kCategoryCount> names = {
        "Behavior",       "Bowel and Bladder",   "Cognitive",     "Deformity",
        "Dysautonomia",   "Dystonia",            "Extraocular Movements", "Fatigue",
        "Gait",           "Head Shape",          "Hearing",       "Hyperkinesia",
        "Hyperreflexia",  "Hypertonia",          "Hypokinesia",   "Hyporeflexia",
        "Hypotonia",      "Incoordination",      "Muscle Atrophy", "Other Cranial Nerve",
        "Pain",           "Seizure",             "Sensory",       "Skin",
        "Sleep",          "Speech",              "Tremor",        "Unclassified",
        "Vision",         "Weakness",
    };
    return names;
}

std::string_view category_name(Category c) {
    return category_names()[static_cast<std::size_t>(c)];
}

std::optional<Category> category_from_name(std::string_view name) {
    const auto& lookup = category_lookup();
    auto it = lookup.find(normalize_label(name));
    if (it == lookup.end()) return std::nullopt;
    return it->second;
}

CategorizedSigns categorize_signs(Backend& backend, const std::vector<Sign>& signs,
                                  const CategorizeOptions& options,
                                  std::vector<std::string>* warnings,
                                  std::vector<LlmExchange>* exchanges) {
    if (signs.empty()) throw ValidationError("categorize_signs requires a non-empty sign list");
    auto warn = [&](const std::string& msg) {
        if (warnings) warnings->push_back(msg);
    };

    // Backend assignment per canonical sign form; first canonical
    // category wins when the backend assigns one sign twice.
    std::map<std::string, Category> assigned;
    const std::size_t chunk_size = std::max<std::size_t>(1, options.max_signs_per_call);
    for (std::size_t begin = 0; begin < signs.size(); begin += chunk_size) {
        const std::size_t end = std::min(signs.size(), begin + chunk_size);
        const std::vector<Sign> chunk(signs.begin() + static_cast<std::ptrdiff_t>(begin),
                                      signs.begin() + static_cast<std::ptrdiff_t>(end));
        auto response = categorize_chunk(backend, chunk, options, exchanges);

        std::set<std::string> chunk_keys;
        for (const Sign& sign : chunk) chunk_keys.insert(sign.canonical);

        // Every response entry becomes a (category, sign) claim; signs
        // under unrecognized names claim Unclassified. Claims resolve
        // in canonical category order, first one wins.
        std::vector<std::pair<Category, std::string>> claims;
        for (const auto& [name, members] : response) {
            const auto category = category_from_name(name);
            if (!category) {
                warn("categorize: unrecognized category \"" + name + "\"; signs moved to Unclassified");
            }
            for (const std::string& member : members) {
                claims.emplace_back(category.value_or(Category::Unclassified), member);
            }
        }
        std::stable_sort(claims.begin(), claims.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });

        for (const auto& [category, member] : claims) {
            const std::string key = canonical_sign(member);
            if (!chunk_keys.count(key)) {
                warn("categorize: response sign \"" + member + "\" is not in the input; ignored");
                continue;
            }
            auto [it, inserted] = assigned.emplace(key, category);
            if (!inserted && it->second != category) {
                warn("categorize: sign \"" + member + "\" assigned to multiple categories; keeping " +
                     std::string(category_name(it->second)));
            }
        }
    }

    CategorizedSigns result;
    for (const Sign& sign : signs) {
        auto it = assigned.find(sign.canonical);
        Category category = Category::Unclassified;
        if (it != assigned.end()) {
            category = it->second;
        } else {
            warn("categorize: sign \"" + sign.text + "\" missing from response; moved to Unclassified");
        }
        result[category].push_back(sign);
    }
    return result;
}

std::array<std::uint8_t, kCategoryCount> binarize(const CategorizedSigns& categorized) {
    std::array<std::uint8_t, kCategoryCount> bits{};
    for (const auto& [category, members] : categorized) {
        if (!members.empty()) bits[static_cast<std::size_t>(category)] = 1;
    }
    return bits;
}

VectorTable vectorize_corpus(const std::vector<std::pair<MimNumber, CategorizedSigns>>& diseases) {
    VectorTable table;
    table.rows.reserve(diseases.size());
    std::set<MimNumber> seen;
    for (const auto& [mim, categorized] : diseases) {
        if (!seen.insert(mim).second) {
            throw ValidationError("vectorize_corpus: duplicate MIM " + mim.str());
        }
        table.rows.push_back(DiseaseVector{mim, binarize(categorized)});
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const DiseaseVector& a, const DiseaseVector& b) { return a.mim < b.mim; });
    return table;
}

void write_vector_csv(const VectorTable& table, std::ostream& out) {
    out << "mim";
    for (const std::string& name : category_names()) out << ',' << csv_field(name);
    out << '\n';
    for (const DiseaseVector& row : table.rows) {
        out << row.mim.str();
        for (int i = 0; i < kCategoryCount; ++i) out << ',' << int(row.bits[static_cast<std::size_t>(i)]);
        out << '\n';
    }
}

VectorTable read_vector_csv(std::string_view content) {
    const auto rows = parse_csv(content);
    if (rows.empty()) throw ParseError("vector table: empty file");
    const auto& header = rows.front();
    if (header.size() != kCategoryCount + 1 || header[0] != "mim") {
        throw ParseError("vector table: bad header");
    }
    for (int i = 0; i < kCategoryCount; ++i) {
        if (header[static_cast<std::size_t>(i) + 1] != category_names()[static_cast<std::size_t>(i)]) {
            throw ParseError("vector table: column " + std::to_string(i + 1) +
                             " is not in canonical category order");
        }
    }
    VectorTable table;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != kCategoryCount + 1) {
            throw ParseError("vector table: row " + std::to_string(r + 1) + " has wrong arity");
        }
        DiseaseVector dv{MimNumber::parse(row[0]), {}};
        for (int i = 0; i < kCategoryCount; ++i) {
            const std::string& cell = row[static_cast<std::size_t>(i) + 1];
            if (cell != "0" && cell != "1") {
                throw ParseError("vector table: row " + std::to_string(r + 1) + " has non-binary cell '" +
                                 cell + "'");
            }
            dv.bits[static_cast<std::size_t>(i)] = cell == "1" ? 1 : 0;
        }
        table.rows.push_back(std::move(dv));
    }
    return table;
}

} // namespace htp
