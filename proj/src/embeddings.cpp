#include "htp/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <zlib.h>

#include "htp/text.hpp"

namespace htp {

namespace {

// gzgets-based line reader; zlib reads plain files transparently.
class VectorFileReader {
public:
    explicit VectorFileReader(const std::filesystem::path& path)
        : file_(gzopen(path.string().c_str(), "rb")) {
        if (!file_) throw IoError("cannot open vector file: " + path.string());
    }
    ~VectorFileReader() {
        if (file_) gzclose(file_);
    }
    VectorFileReader(const VectorFileReader&) = delete;
    VectorFileReader& operator=(const VectorFileReader&) = delete;

    bool next_line(std::string& out) {
        out.clear();
        char buf[4096];
        bool got_any = false;
        while (gzgets(file_, buf, sizeof(buf)) != nullptr) {
            got_any = true;
            out += buf;
            if (!out.empty() && out.back() == '\n') {
                out.pop_back();
                if (!out.empty() && out.back() == '\r') out.pop_back();
                return true;
            }
        }
        return got_any;
    }

private:
    gzFile file_;
};

bool parse_positive_int(const std::string& tok, long& out) {
    char* end = nullptr;
    const long v = std::strtol(tok.c_str(), &end, 10);
    if (end == nullptr || *end != '\0' || v <= 0) return false;
    out = v;
    return true;
}

} // namespace

const std::vector<float>* EmbeddingStore::find(std::string_view token) const {
    auto it = vocab_.find(to_lower(token));
    return it == vocab_.end() ? nullptr : &it->second;
}

std::optional<PhraseVector> EmbeddingStore::embed_phrase(std::string_view phrase) const {
    const std::vector<std::string> tokens = tokenize(to_lower(phrase));
    PhraseVector result;
    result.total = static_cast<int>(tokens.size());
    std::vector<double> sum(static_cast<std::size_t>(dimension_), 0.0);
    for (const std::string& token : tokens) {
        auto it = vocab_.find(token);
        if (it == vocab_.end()) continue;
        for (int d = 0; d < dimension_; ++d) sum[d] += it->second[d];
        ++result.covered;
    }
    if (result.covered == 0) return std::nullopt;
    for (double& v : sum) v /= result.covered;
    result.values = std::move(sum);
    return result;
}

EmbeddingStore load_vectors(const std::filesystem::path& path, std::vector<std::string>* warnings) {
    VectorFileReader reader(path);
    std::string line;
    if (!reader.next_line(line)) throw ParseError("vectors: empty file " + path.string());

    const std::vector<std::string> header = tokenize(line);
    long count = 0;
    long dimension = 0;
    if (header.size() != 2 || !parse_positive_int(header[0], count) ||
        !parse_positive_int(header[1], dimension)) {
        throw ParseError("vectors: line 1: expected header '<count> <dimension>', got '" + line + "'");
    }

    EmbeddingStore store;
    store.dimension_ = static_cast<int>(dimension);
    store.vocab_.reserve(static_cast<std::size_t>(count));

    for (long row = 0; row < count; ++row) {
        const std::size_t lineno = static_cast<std::size_t>(row) + 2;
        if (!reader.next_line(line)) {
            throw ParseError("vectors: expected " + std::to_string(count) + " rows, file ends after " +
                             std::to_string(row));
        }
        const std::vector<std::string> fields = tokenize(line);
        if (fields.size() != static_cast<std::size_t>(dimension) + 1) {
            throw ParseError("vectors: line " + std::to_string(lineno) + ": expected token plus " +
                             std::to_string(dimension) + " floats, got " +
                             std::to_string(fields.empty() ? 0 : fields.size() - 1));
        }
        std::vector<float> values(static_cast<std::size_t>(dimension));
        for (long d = 0; d < dimension; ++d) {
            char* end = nullptr;
            values[static_cast<std::size_t>(d)] = std::strtof(fields[static_cast<std::size_t>(d) + 1].c_str(), &end);
            if (end == nullptr || *end != '\0') {
                throw ParseError("vectors: line " + std::to_string(lineno) + ": bad float '" +
                                 fields[static_cast<std::size_t>(d) + 1] + "'");
            }
        }
        std::string token = to_lower(fields[0]);
        // try_emplace leaves `values` untouched when the key exists.
        auto [it, inserted] = store.vocab_.try_emplace(std::move(token), std::move(values));
        if (!inserted) {
            it->second = std::move(values);
            if (warnings) {
                warnings->push_back("vectors: line " + std::to_string(lineno) + ": duplicate token '" +
                                    it->first + "', last row wins");
            }
        }
    }
    if (reader.next_line(line) && !is_blank(line)) {
        throw ParseError("vectors: trailing content after " + std::to_string(count) + " declared rows");
    }
    store.checksum_ = file_checksum(path);
    return store;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    double dot = 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        norm_a += a[i] * a[i];
        norm_b += b[i] * b[i];
    }
    if (norm_a == 0.0 || norm_b == 0.0) {
        throw UndefinedMetricError("cosine undefined for zero-norm vector");
    }
    // Self-similarity is exact by definition; sqrt round-off must not
    // leak into identity comparisons.
    if (a == b) return 1.0;
    // Round-off can push near-parallel vectors a hair past the
    // contractual [-1, 1] range.
    return std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), -1.0, 1.0);
}

} // namespace htp
