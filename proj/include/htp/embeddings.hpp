#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "htp/errors.hpp"

namespace htp {

// Mean of a phrase's in-vocabulary token vectors. `values` is defined
// only when covered >= 1.
struct PhraseVector {
    std::vector<double> values;
    int covered = 0;
    int total = 0;
};

// Word-vector table loaded from word2vec text format. Tokens are stored
// lowercase; vectors keep the file's 32-bit precision. Immutable after
// load and safe for concurrent readers.
class EmbeddingStore {
public:
    int dimension() const { return dimension_; }
    std::size_t size() const { return vocab_.size(); }

    // Vector for a token (lowercased by the caller or not; lookup
    // lowercases internally). nullptr when out of vocabulary.
    const std::vector<float>* find(std::string_view token) const;

    // Lowercases and whitespace-tokenizes the phrase, then averages the
    // in-vocabulary token vectors with 64-bit accumulation. nullopt when
    // no token is in vocabulary.
    std::optional<PhraseVector> embed_phrase(std::string_view phrase) const;

    const std::string& checksum() const { return checksum_; }

private:
    friend EmbeddingStore load_vectors(const std::filesystem::path&, std::vector<std::string>*);

    int dimension_ = 0;
    std::unordered_map<std::string, std::vector<float>> vocab_;
    std::string checksum_;
};

// Reads "<count> <dimension>" then exactly count rows of
// "token v1 ... vd". Accepts plain or gzip-compressed files. Duplicate
// tokens keep the last row and emit a warning.
EmbeddingStore load_vectors(const std::filesystem::path& path,
                            std::vector<std::string>* warnings = nullptr);

// dot(a,b) / (|a||b|). Throws ValidationError on dimension mismatch and
// UndefinedMetricError on zero-norm input. Identical vectors compare to
// exactly 1.0.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

} // namespace htp
