#include "htp/cache.hpp"

#include <atomic>
#include <fstream>
#include <sstream>

#include "htp/errors.hpp"

namespace htp {

DiskCache::DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

std::filesystem::path DiskCache::path_for(const std::string& key) const {
    return dir_ / key;
}

bool DiskCache::contains(const std::string& key) const {
    return std::filesystem::exists(path_for(key));
}

std::optional<std::string> DiskCache::read(const std::string& key) const {
    std::ifstream in(path_for(key), std::ios::binary);
    if (!in) return std::nullopt;
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void DiskCache::write(const std::string& key, const std::string& bytes) const {
    static std::atomic<unsigned> counter{0};
    const std::filesystem::path target = path_for(key);
    const std::filesystem::path temp =
        dir_ / (key + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++));
    {
        std::ofstream out(temp, std::ios::binary);
        if (!out) throw IoError("cache: cannot write " + temp.string());
        out << bytes;
    }
    std::filesystem::rename(temp, target);
}

} // namespace htp
