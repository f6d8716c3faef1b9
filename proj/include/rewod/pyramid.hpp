// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace rewod {

// Feature pyramid level. The enumerator value doubles as the on-disk code.
enum class Level : std::uint32_t { P3 = 3, P4 = 4, P5 = 5, P6 = 6 };

inline constexpr std::array<Level, 4> kAllLevels = {Level::P3, Level::P4, Level::P5, Level::P6};

// Object side-length band, in input pixels, handled by a level.
struct SizeRange {
    double min_side;
    double max_side;
};

int stride(Level level);
int default_latent_dim(Level level);
SizeRange default_size_range(Level level);
std::size_t level_index(Level level);

std::string_view level_name(Level level);
Level parse_level(std::string_view name);
bool is_level_code(std::uint32_t code);

}  // namespace rewod
