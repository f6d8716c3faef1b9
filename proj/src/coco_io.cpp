// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/coco_io.hpp"

#include <cmath>
#include <map>
#include <set>

#include "rewod/error.hpp"

namespace rewod {

namespace {

nlohmann::json bbox_json(const Box& b) { return nlohmann::json::array({b.x(), b.y(), b.width(), b.height()}); }

Box bbox_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4) {
        throw Error(ErrorCode::Parse, "bbox must be an array [x, y, w, h]");
    }
    try {
        return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    } catch (const Error& e) {
        throw Error(ErrorCode::Parse, std::string("bbox: ") + e.what());
    }
}

}  // namespace

nlohmann::json to_coco_json(const CocoDataset& data) {
    std::set<std::string> names;
    for (const auto& a : data.annotations) {
        names.insert(a.class_label);
    }
    std::map<std::string, int> ids;
    auto categories = nlohmann::json::array();
    for (const auto& n : names) {
        const int id = static_cast<int>(ids.size()) + 1;
        ids[n] = id;
        categories.push_back({{"id", id}, {"name", n}});
    }
    auto images = nlohmann::json::array();
    for (const auto& im : data.images) {
        images.push_back({{"id", im.id}, {"width", im.width}, {"height", im.height}, {"file_name", im.file_name}});
    }
    auto annotations = nlohmann::json::array();
    std::int64_t next_id = 1;
    for (const auto& a : data.annotations) {
        annotations.push_back({{"id", next_id++},
                               {"image_id", a.image_id},
                               {"bbox", bbox_json(a.box)},
                               {"area", area(a.box)},
                               {"category_id", ids.at(a.class_label)},
                               {"iscrowd", 0}});
    }
    return {{"images", images}, {"annotations", annotations}, {"categories", categories}};
}

CocoDataset coco_from_json(const nlohmann::json& j) {
    try {
        std::map<std::int64_t, std::string> names;
        for (const auto& c : j.at("categories")) {
            names[c.at("id").get<std::int64_t>()] = c.at("name").get<std::string>();
        }
        CocoDataset out;
        out.categories = names;
        std::set<std::int64_t> image_ids;
        for (const auto& im : j.at("images")) {
            CocoImage ci{im.at("id").get<std::int64_t>(), im.value("width", 0), im.value("height", 0),
                         im.value("file_name", std::string{})};
            if (!image_ids.insert(ci.id).second) {
                throw Error(ErrorCode::Parse, "duplicate image id " + std::to_string(ci.id));
            }
            out.images.push_back(std::move(ci));
        }
        for (const auto& a : j.at("annotations")) {
            const auto image_id = a.at("image_id").get<std::int64_t>();
            if (!image_ids.contains(image_id)) {
                throw Error(ErrorCode::Parse, "annotation refers to unknown image " + std::to_string(image_id));
            }
            const auto cat = a.at("category_id").get<std::int64_t>();
            const auto name = names.find(cat);
            if (name == names.end()) {
                throw Error(ErrorCode::Parse, "annotation refers to unknown category " + std::to_string(cat));
            }
            out.annotations.push_back({image_id, bbox_from(a.at("bbox")), name->second, false});
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("annotations: ") + e.what());
    }
}

void mark_unknowns(std::vector<GroundTruth>& annotations, const TaskSplit& split) {
    for (auto& a : annotations) {
        a.is_unknown = !split.is_known(a.class_label);
    }
}

nlohmann::json detections_to_json(std::span<const Detection> dets) {
    auto out = nlohmann::json::array();
    for (const auto& d : dets) {
        out.push_back({{"image_id", d.image_id}, {"bbox", bbox_json(d.box)}, {"category_name", d.class_label},
                       {"score", d.score}});
    }
    return out;
}

std::vector<Detection> detections_from_json(const nlohmann::json& j,
                                            const std::map<std::int64_t, std::string>& categories) {
    if (!j.is_array()) {
        throw Error(ErrorCode::Parse, "detections must be a JSON array");
    }
    std::vector<Detection> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        try {
            const auto& d = j[i];
            const double score = d.at("score").get<double>();
            if (!std::isfinite(score)) {
                throw Error(ErrorCode::Parse, "score must be finite");
            }
            std::string label;
            if (d.contains("category_name")) {
                label = d.at("category_name").get<std::string>();
            } else {
                const auto id = d.at("category_id").get<std::int64_t>();
                if (id == kUnknownCategoryId) {
                    label = kUnknownLabel;
                } else if (const auto it = categories.find(id); it != categories.end()) {
                    label = it->second;
                } else {
                    throw Error(ErrorCode::Parse, "unknown category_id " + std::to_string(id));
                }
            }
            out.push_back({d.at("image_id").get<std::int64_t>(), bbox_from(d.at("bbox")), std::move(label), score});
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::Parse, "detection " + std::to_string(i) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(ErrorCode::Parse, "detection " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace rewod
