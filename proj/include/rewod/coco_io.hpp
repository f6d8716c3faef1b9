// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rewod/owod_eval.hpp"

namespace rewod {

struct CocoImage {
    std::int64_t id = 0;
    int width = 0;
    int height = 0;
    std::string file_name;
};

// COCO-style annotation file: "images", "annotations" (bbox as [x, y, w, h])
// and "categories". Category ids are assigned from 1 in name order.
struct CocoDataset {
    std::vector<CocoImage> images;
    std::vector<GroundTruth> annotations;
    std::map<std::int64_t, std::string> categories;  // filled by coco_from_json
};

nlohmann::json to_coco_json(const CocoDataset& data);

// is_unknown is left false; see mark_unknowns.
CocoDataset coco_from_json(const nlohmann::json& j);

// Flags every annotation whose class is not known in `split`.
void mark_unknowns(std::vector<GroundTruth>& annotations, const TaskSplit& split);

// Detection list: [{"image_id", "bbox", "category_name", "score"}]. On input
// a record may name its class by "category_id" instead, resolved through
// `categories`; id 0 stands for the unknown class.
inline constexpr std::int64_t kUnknownCategoryId = 0;

nlohmann::json detections_to_json(std::span<const Detection> dets);
std::vector<Detection> detections_from_json(const nlohmann::json& j,
                                            const std::map<std::int64_t, std::string>& categories = {});

}  // namespace rewod
