#pragma once

#include <set>
#include <string>

#include <fmt/format.h>

#include "aviary/error.hpp"
#include "json.hpp"

namespace aviary::detail {

// JSON object reader that rejects keys it was never asked about.
class StrictObject {
public:
    StrictObject(const nlohmann::json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ValidationError(path_ + " must be an object");
    }

    template <typename T>
    void read(const char* key, T& out) {
        seen_.insert(key);
        const auto it = j_.find(key);
        if (it == j_.end()) return;
        try {
            out = it->get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ValidationError(fmt::format("{}.{} has the wrong type", path_, key));
        }
    }

    const nlohmann::json* child(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const std::string& path() const noexcept { return path_; }

    void finish() const {
        for (const auto& item : j_.items()) {
            if (!seen_.contains(item.key())) {
                throw ValidationError(fmt::format("unknown key '{}' in {}", item.key(), path_));
            }
        }
    }

private:
    const nlohmann::json& j_;
    std::string path_;
    std::set<std::string, std::less<>> seen_;
};

}  // namespace aviary::detail
