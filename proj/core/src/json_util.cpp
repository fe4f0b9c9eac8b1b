#include "json_util.hpp"

#include <fstream>

namespace segforge::jsonu {

json parse_file(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    try {
        return json::parse(f);
    } catch (const json::parse_error& e) {
        throw ConfigError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_file(const std::filesystem::path& path, const json& doc) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << doc.dump(2) << "\n";
    if (!f) throw IoError("write failed: " + path.string());
}

} // namespace segforge::jsonu
