// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/exemplars.hpp"

#include <algorithm>
#include <set>

#include "rewod/error.hpp"
#include "rewod/rng.hpp"

namespace rewod {

ExemplarSelection select_exemplars(std::span<const GroundTruth> annotations, std::span<const std::string> classes,
                                   int per_class_count, std::uint64_t seed) {
    if (per_class_count < 1) {
        throw Error(ErrorCode::InvalidArgument, "per_class_count must be >= 1");
    }
    std::set<std::string> wanted(classes.begin(), classes.end());
    if (wanted.empty()) {
        for (const auto& a : annotations) {
            if (!a.is_unknown) {
                wanted.insert(a.class_label);
            }
        }
    }

    std::map<std::int64_t, std::map<std::string, int>> per_image;
    std::map<std::string, int> available;
    for (const auto& a : annotations) {
        if (a.is_unknown || !wanted.contains(a.class_label)) {
            continue;
        }
        ++per_image[a.image_id][a.class_label];
        ++available[a.class_label];
    }

    std::vector<std::int64_t> order;
    for (const auto& [id, counts] : per_image) {
        order.push_back(id);
    }
    Rng rng(seed);
    rng.shuffle(order);

    std::map<std::string, int> need;
    for (const auto& c : wanted) {
        need[c] = std::min(per_class_count, available[c]);
    }

    ExemplarSelection sel;
    std::vector<bool> taken(order.size(), false);
    for (;;) {
        int best_gain = 0;
        std::size_t best = order.size();
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (taken[i]) {
                continue;
            }
            int gain = 0;
            for (const auto& [label, n] : per_image[order[i]]) {
                gain += std::min(need[label], n);
            }
            if (gain > best_gain) {
                best_gain = gain;
                best = i;
            }
        }
        if (best == order.size()) {
            break;
        }
        taken[best] = true;
        sel.image_ids.push_back(order[best]);
        for (const auto& [label, n] : per_image[order[best]]) {
            need[label] = std::max(0, need[label] - n);
            sel.instance_counts[label] += n;
        }
    }
    for (const auto& c : wanted) {
        if (available[c] < per_class_count) {
            sel.shortages[c] = per_class_count - available[c];
        }
        sel.instance_counts.try_emplace(c, 0);
    }
    return sel;
}

}  // namespace rewod
