#pragma once

// Internal strict-JSON helpers (unknown keys are configuration typos).

#include <set>
#include <string>

#include <json.hpp>

#include "segforge/error.hpp"

namespace segforge::jsonu {

using json = nlohmann::ordered_json;

class ObjectReader {
public:
    ObjectReader(const json& obj, std::string context) : obj_(obj), context_(std::move(context)) {
        if (!obj_.is_object()) throw ConfigError(context_ + ": expected a JSON object");
    }

    bool has(const std::string& key) const { return obj_.contains(key); }

    template <typename T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        if (!obj_.contains(key)) return fallback;
        return read<T>(key);
    }

    template <typename T>
    T require(const std::string& key) {
        seen_.insert(key);
        if (!obj_.contains(key)) throw ConfigError(context_ + ": missing required key '" + key + "'");
        return read<T>(key);
    }

    const json& child(const std::string& key) {
        seen_.insert(key);
        if (!obj_.contains(key)) throw ConfigError(context_ + ": missing required key '" + key + "'");
        return obj_.at(key);
    }

    bool has_child(const std::string& key) {
        seen_.insert(key);
        return obj_.contains(key);
    }

    /// Call last: rejects keys that were never consumed.
    void done() const {
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (!seen_.count(it.key())) {
                throw ConfigError(context_ + ": unknown key '" + it.key() + "'");
            }
        }
    }

private:
    template <typename T>
    T read(const std::string& key) {
        try {
            return obj_.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(context_ + ": bad value type for key '" + key + "'");
        }
    }

    const json& obj_;
    std::string context_;
    std::set<std::string> seen_;
};

json parse_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const json& doc);

} // namespace segforge::jsonu
