// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <json.hpp>

#include "rewod/exp_weibull.hpp"
#include "rewod/feature_map.hpp"
#include "rewod/geometry.hpp"
#include "rewod/pyramid.hpp"

namespace rewod {

// Foreground (known objects) and background error models for one level.
struct WeibullPair {
    Level level = Level::P3;
    ExpWeibull fg;
    ExpWeibull bg;
    std::size_t fg_sample_count = 0;
    std::size_t bg_sample_count = 0;
};

struct SampledErrors {
    std::vector<double> foreground;
    std::vector<double> background;
};

// Splits error cells by their centre ((col + 0.5) * stride, (row + 0.5) * stride):
// foreground when the centre lies in a known box, background when it lies in
// neither a known nor a pseudo box. No subsampling.
SampledErrors classify_cells(const ErrorMap& e, std::span<const Box> known_boxes, std::span<const Box> pseudo_boxes,
                             int stride);

// classify_cells followed by a uniform subsample of at most max_samples per
// side. Throws EmptySamples when either side has no cells.
SampledErrors sample_errors(const ErrorMap& e, std::span<const Box> known_boxes, std::span<const Box> pseudo_boxes,
                            int stride, std::size_t max_samples, std::uint64_t seed);

// Error maps and boxes of one image. `maps` holds at most one map per level.
struct ImageErrors {
    std::int64_t image_id = 0;
    std::vector<ErrorMap> maps;
    std::vector<Box> known;
    std::vector<Box> pseudo;
};

struct WeibullFitConfig {
    std::size_t max_samples = 100000;
    std::uint64_t seed = 0;
    MleOptions mle;
};

// One pair per level in `levels`, pooled over all images.
std::vector<WeibullPair> fit_pair(std::span<const ImageErrors> images, std::span<const Level> levels,
                                  const WeibullFitConfig& config = {});

nlohmann::json to_json(const WeibullPair& pair);
WeibullPair weibull_pair_from_json(const nlohmann::json& j);

}  // namespace rewod
