#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace htp {

// One file per key under a cache directory. Writes land in a temp file
// first and are renamed into place, so concurrent writers for distinct
// keys never expose partial content.
class DiskCache {
public:
    explicit DiskCache(std::filesystem::path dir);

    const std::filesystem::path& dir() const { return dir_; }
    std::filesystem::path path_for(const std::string& key) const;
    bool contains(const std::string& key) const;
    std::optional<std::string> read(const std::string& key) const;
    void write(const std::string& key, const std::string& bytes) const;

private:
    std::filesystem::path dir_;
};

} // namespace htp
