// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rewod/owod_eval.hpp"

namespace rewod {

struct ExemplarSelection {
    std::vector<std::int64_t> image_ids;       // in selection order
    std::map<std::string, int> instance_counts; // per class, over the selected images
    std::map<std::string, int> shortages;       // classes with fewer than requested instances overall

    bool complete() const { return shortages.empty(); }
};

// Greedy image cover: repeatedly takes the image that adds the most still
// needed instances (sum over classes of min(remaining need, count in image))
// until every class has per_class_count instances or is exhausted. Ties are
// broken by an image order shuffled with `seed`. Unknown annotations are
// ignored. When `classes` is empty every known class present is used.
ExemplarSelection select_exemplars(std::span<const GroundTruth> annotations, std::span<const std::string> classes,
                                   int per_class_count = 50, std::uint64_t seed = 0);

}  // namespace rewod
