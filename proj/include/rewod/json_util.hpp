// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rewod/error.hpp"
#include "rewod/geometry.hpp"
#include "rewod/pyramid.hpp"

namespace rewod {

// Reads optional fields out of a JSON object and rejects keys nobody asked
// for, so a misspelled option fails loudly instead of silently defaulting.
class StrictObject {
public:
    StrictObject(const nlohmann::json& j, std::string context);

    template <typename T>
    void get(const char* key, T& out) {
        seen_.insert(key);
        if (!j_.contains(key)) {
            return;
        }
        try {
            out = j_.at(key).get<T>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::Config, context_ + "." + key + ": " + e.what());
        }
    }

    void get_levels(const char* key, std::vector<Level>& out);

    // Child object, or nullptr when absent.
    const nlohmann::json* child(const char* key);

    void finish() const;

private:
    const nlohmann::json& j_;
    std::string context_;
    std::set<std::string> seen_;
};

nlohmann::json box_to_json(const Box& box);
Box box_from_json(const nlohmann::json& j);

nlohmann::json levels_to_json(const std::vector<Level>& levels);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace rewod
