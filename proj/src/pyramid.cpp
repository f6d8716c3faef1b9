// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/pyramid.hpp"

#include "rewod/error.hpp"

namespace rewod {

int stride(Level level) { return 1 << static_cast<int>(level); }

int default_latent_dim(Level level) {
    switch (level) {
    case Level::P3: return 32;
    case Level::P4: return 16;
    case Level::P5: return 8;
    case Level::P6: return 4;
    }
    return 0;
}

SizeRange default_size_range(Level level) {
    switch (level) {
    case Level::P3: return {32.0, 64.0};
    case Level::P4: return {64.0, 128.0};
    case Level::P5: return {128.0, 256.0};
    case Level::P6: return {256.0, 512.0};
    }
    return {0.0, 0.0};
}

std::size_t level_index(Level level) { return static_cast<std::size_t>(level) - 3; }

std::string_view level_name(Level level) {
    switch (level) {
    case Level::P3: return "P3";
    case Level::P4: return "P4";
    case Level::P5: return "P5";
    case Level::P6: return "P6";
    }
    return "?";
}

Level parse_level(std::string_view name) {
    for (auto level : kAllLevels) {
        if (level_name(level) == name) {
            return level;
        }
    }
    throw Error(ErrorCode::Parse, "unknown pyramid level '" + std::string(name) + "'");
}

bool is_level_code(std::uint32_t code) { return code >= 3 && code <= 6; }

}  // namespace rewod
