// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/json_util.hpp"

#include <fstream>

namespace rewod {

StrictObject::StrictObject(const nlohmann::json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) {
        throw Error(ErrorCode::Config, context_ + " must be a JSON object");
    }
}

void StrictObject::get_levels(const char* key, std::vector<Level>& out) {
    std::vector<std::string> names;
    if (!j_.contains(key)) {
        seen_.insert(key);
        return;
    }
    get(key, names);
    out.clear();
    for (const auto& name : names) {
        try {
            out.push_back(parse_level(name));
        } catch (const Error& e) {
            throw Error(ErrorCode::Config, context_ + "." + key + ": " + e.what());
        }
    }
}

const nlohmann::json* StrictObject::child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) {
        return nullptr;
    }
    return &*it;
}

void StrictObject::finish() const {
    for (const auto& item : j_.items()) {
        if (!seen_.contains(item.key())) {
            throw Error(ErrorCode::Config, context_ + ": unrecognized key '" + item.key() + "'");
        }
    }
}

nlohmann::json box_to_json(const Box& box) { return nlohmann::json::array({box.x(), box.y(), box.width(), box.height()}); }

Box box_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4) {
        throw Error(ErrorCode::Parse, "box must be an array [x, y, w, h]");
    }
    try {
        return Box(j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("box: ") + e.what());
    } catch (const Error& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
}

nlohmann::json levels_to_json(const std::vector<Level>& levels) {
    nlohmann::json out = nlohmann::json::array();
    for (auto level : levels) {
        out.push_back(std::string(level_name(level)));
    }
    return out;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw Error(ErrorCode::Io, "write failed for " + path);
    }
}

}  // namespace rewod
