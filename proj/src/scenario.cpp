// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "rewod/error.hpp"
#include "rewod/json_util.hpp"
#include "rewod/rng.hpp"

namespace rewod {

namespace {

// Sub-stream identifiers for derive_seed.
constexpr std::uint64_t kPrototypeStream = 1;
constexpr std::uint64_t kLayoutStream = 1000;
constexpr std::uint64_t kFeatureStream = 2000;
constexpr std::uint64_t kProposalStream = 3000;
constexpr std::uint64_t kDetectorStream = 4000;

void require(bool ok, const std::string& message) {
    if (!ok) {
        throw Error(ErrorCode::Config, "scenario: " + message);
    }
}

Box draw_object_box(Rng& rng, const ScenarioConfig& c) {
    const double side = std::exp(rng.uniform(std::log(c.min_side), std::log(c.max_side)));
    const double aspect = std::exp(rng.uniform(std::log(c.min_aspect), std::log(c.max_aspect)));
    const double w = std::min(side * std::sqrt(aspect), static_cast<double>(c.image_width));
    const double h = std::min(side / std::sqrt(aspect), static_cast<double>(c.image_height));
    const double x = rng.uniform(0.0, c.image_width - w);
    const double y = rng.uniform(0.0, c.image_height - h);
    return Box(x, y, w, h);
}

// Shift and rescale a box, clipped to the image. Returns nullopt when the
// clipped result is degenerate.
std::optional<Box> jitter_box(Rng& rng, const Box& b, double amount, int width, int height) {
    const double cx = b.center_x() + rng.normal() * amount * b.width();
    const double cy = b.center_y() + rng.normal() * amount * b.height();
    const double w = b.width() * std::exp(rng.normal() * amount);
    const double h = b.height() * std::exp(rng.normal() * amount);
    const double x1 = std::clamp(cx - 0.5 * w, 0.0, static_cast<double>(width));
    const double y1 = std::clamp(cy - 0.5 * h, 0.0, static_cast<double>(height));
    const double x2 = std::clamp(cx + 0.5 * w, 0.0, static_cast<double>(width));
    const double y2 = std::clamp(cy + 0.5 * h, 0.0, static_cast<double>(height));
    if (x2 - x1 < 1.0 || y2 - y1 < 1.0) {
        return std::nullopt;
    }
    return Box::from_corners(x1, y1, x2, y2);
}

std::vector<LabeledBox> all_objects(const SyntheticImage& image) {
    std::vector<LabeledBox> out = image.known;
    out.insert(out.end(), image.unknown.begin(), image.unknown.end());
    return out;
}

void place_objects(SyntheticImage& image, const ScenarioConfig& c, Rng& rng) {
    std::vector<Box> placed;
    const int total = c.known_per_image + c.unknown_per_image;
    for (int k = 0; k < total; ++k) {
        std::optional<Box> found;
        for (int attempt = 0; attempt < c.placement_retries && !found; ++attempt) {
            Box candidate = draw_object_box(rng, c);
            const bool clear = std::none_of(placed.begin(), placed.end(), [&](const Box& other) {
                return intersection_area(other, candidate) > 0.0;
            });
            if (clear) {
                found = candidate;
            }
        }
        if (!found) {
            throw Error(ErrorCode::Generation, "could not place object " + std::to_string(k) + " in image " +
                                                   std::to_string(image.image_id) + " after " +
                                                   std::to_string(c.placement_retries) + " attempts");
        }
        placed.push_back(*found);
        if (k < c.known_per_image) {
            image.known.push_back({*found, c.known_classes[rng.index(c.known_classes.size())]});
        } else {
            image.unknown.push_back({*found, c.unknown_classes[rng.index(c.unknown_classes.size())]});
        }
    }
}

FeatureMap paint_level(const SyntheticImage& image, const std::vector<std::vector<double>>& prototypes,
                       const ScenarioConfig& c, Level level, Rng& rng) {
    const int s = stride(level);
    const int rows = c.image_height / s;
    const int cols = c.image_width / s;
    const auto channels = static_cast<std::size_t>(c.channels);
    const auto objects = all_objects(image);

    std::vector<std::vector<double>> object_vectors(objects.size(), std::vector<double>(channels));
    for (auto& v : object_vectors) {
        for (auto& x : v) {
            x = c.object_scale * rng.normal();
        }
    }

    std::vector<float> data;
    data.reserve(static_cast<std::size_t>(rows) * cols * channels);
    for (int r = 0; r < rows; ++r) {
        for (int col = 0; col < cols; ++col) {
            const double px = (col + 0.5) * s;
            const double py = (r + 0.5) * s;
            std::optional<std::size_t> owner;
            for (std::size_t o = 0; o < objects.size() && !owner; ++o) {
                if (objects[o].box.contains(px, py)) {
                    owner = o;
                }
            }
            if (owner) {
                const auto& v = object_vectors[*owner];
                for (std::size_t ch = 0; ch < channels; ++ch) {
                    const double texture = c.object_texture * rng.normal();
                    const double noise = c.noise_sigma * rng.normal();
                    data.push_back(static_cast<float>(v[ch] + texture + noise));
                }
            } else {
                const auto& proto = prototypes[rng.index(prototypes.size())];
                for (std::size_t ch = 0; ch < channels; ++ch) {
                    data.push_back(static_cast<float>(proto[ch] + c.noise_sigma * rng.normal()));
                }
            }
        }
    }
    return FeatureMap(level, rows, cols, c.channels, std::move(data));
}

void simulate_proposals(SyntheticImage& image, const ScenarioConfig& c, Rng& rng) {
    const auto& p = c.proposals;
    auto add_hits = [&](const std::vector<LabeledBox>& objects, double rate) {
        for (const auto& obj : objects) {
            if (!rng.bernoulli(rate)) {
                continue;
            }
            auto jittered = jitter_box(rng, obj.box, p.jitter, image.width, image.height);
            const double score = rng.uniform(0.4, 1.0);
            if (jittered) {
                image.proposals.push_back({*jittered, score});
            }
        }
    };
    add_hits(image.known, p.known_hit_rate);
    add_hits(image.unknown, p.unknown_hit_rate);
    for (int k = 0; k < p.clutter_per_image; ++k) {
        const double side = std::exp(rng.uniform(std::log(p.clutter_min_side), std::log(p.clutter_max_side)));
        const double aspect =
            std::exp(rng.uniform(-std::log(p.clutter_max_aspect), std::log(p.clutter_max_aspect)));
        const double w = std::min(side * std::sqrt(aspect), static_cast<double>(image.width));
        const double h = std::min(side / std::sqrt(aspect), static_cast<double>(image.height));
        const double x = rng.uniform(0.0, image.width - w);
        const double y = rng.uniform(0.0, image.height - h);
        image.proposals.push_back({Box(x, y, w, h), rng.uniform(0.0, 0.9)});
    }
}

void simulate_detector(SyntheticImage& image, const ScenarioConfig& c, Rng& rng) {
    const auto& d = c.detector;
    const auto& classes = c.known_classes;
    for (const auto& obj : image.known) {
        if (!rng.bernoulli(d.recall)) {
            continue;
        }
        std::string label = obj.label;
        if (classes.size() > 1 && rng.bernoulli(d.confusion_rate)) {
            label = classes[rng.index(classes.size())];
        }
        auto box = jitter_box(rng, obj.box, d.jitter, image.width, image.height);
        const double score = rng.uniform(0.5, 1.0);
        if (box) {
            image.known_detections.push_back({image.image_id, *box, label, score});
        }
    }
    for (const auto& obj : image.unknown) {
        if (!rng.bernoulli(d.unknown_as_known_rate)) {
            continue;
        }
        const std::string label = classes[rng.index(classes.size())];
        auto box = jitter_box(rng, obj.box, d.jitter, image.width, image.height);
        const double score = rng.uniform(0.3, 0.9);
        if (box) {
            image.known_detections.push_back({image.image_id, *box, label, score});
        }
    }
    for (int k = 0; k < d.false_positives_per_image; ++k) {
        const Box box = draw_object_box(rng, c);
        const std::string label = classes[rng.index(classes.size())];
        image.known_detections.push_back({image.image_id, box, label, rng.uniform(0.05, 0.6)});
    }
}

}  // namespace

void ScenarioConfig::validate() const {
    require(!levels.empty(), "at least one level is required");
    for (auto level : levels) {
        require(image_width % stride(level) == 0 && image_height % stride(level) == 0,
                "image size must be divisible by the stride of " + std::string(level_name(level)));
    }
    require(image_width > 0 && image_height > 0, "image size must be positive");
    require(channels >= 1, "channels must be >= 1");
    require(num_images >= 1, "num_images must be >= 1");
    require(num_prototypes >= 1, "num_prototypes must be >= 1");
    require(prototype_scale >= 0.0 && object_scale >= 0.0 && object_texture >= 0.0, "scales must be >= 0");
    require(noise_sigma >= 0.0, "noise_sigma must be >= 0");
    require(known_per_image >= 0 && unknown_per_image >= 0, "object counts must be >= 0");
    require(min_side > 0.0 && min_side <= max_side, "need 0 < min_side <= max_side");
    require(min_aspect > 0.0 && min_aspect <= max_aspect, "need 0 < min_aspect <= max_aspect");
    require(max_side <= std::min(image_width, image_height), "max_side exceeds the image");
    require(placement_retries >= 1, "placement_retries must be >= 1");
    require(!known_classes.empty() && !unknown_classes.empty(), "class lists must be non-empty");
    for (const auto& name : known_classes) {
        require(std::find(unknown_classes.begin(), unknown_classes.end(), name) == unknown_classes.end(),
                "class '" + name + "' is both known and unknown");
        require(name != kUnknownLabel, "'unknown' is reserved");
    }
    auto rate = [](double r) { return r >= 0.0 && r <= 1.0; };
    require(rate(proposals.known_hit_rate) && rate(proposals.unknown_hit_rate), "hit rates must lie in [0, 1]");
    require(proposals.jitter >= 0.0 && detector.jitter >= 0.0, "jitter must be >= 0");
    require(proposals.clutter_per_image >= 0, "clutter_per_image must be >= 0");
    require(proposals.clutter_min_side > 0.0 && proposals.clutter_min_side <= proposals.clutter_max_side &&
                proposals.clutter_max_side <= std::min(image_width, image_height),
            "clutter side range invalid");
    require(proposals.clutter_max_aspect >= 1.0, "clutter_max_aspect must be >= 1");
    require(rate(detector.recall) && rate(detector.confusion_rate) && rate(detector.unknown_as_known_rate),
            "detector rates must lie in [0, 1]");
    require(detector.false_positives_per_image >= 0, "false_positives_per_image must be >= 0");
}

ScenarioConfig scenario_config_from_json(const nlohmann::json& j) {
    ScenarioConfig c;
    StrictObject obj(j, "scenario");
    obj.get("image_width", c.image_width);
    obj.get("image_height", c.image_height);
    obj.get("channels", c.channels);
    obj.get("num_images", c.num_images);
    obj.get_levels("levels", c.levels);
    obj.get("num_prototypes", c.num_prototypes);
    obj.get("prototype_scale", c.prototype_scale);
    obj.get("object_scale", c.object_scale);
    obj.get("object_texture", c.object_texture);
    obj.get("noise_sigma", c.noise_sigma);
    obj.get("known_per_image", c.known_per_image);
    obj.get("unknown_per_image", c.unknown_per_image);
    obj.get("min_side", c.min_side);
    obj.get("max_side", c.max_side);
    obj.get("min_aspect", c.min_aspect);
    obj.get("max_aspect", c.max_aspect);
    obj.get("placement_retries", c.placement_retries);
    obj.get("known_classes", c.known_classes);
    obj.get("unknown_classes", c.unknown_classes);
    if (const auto* p = obj.child("proposals")) {
        StrictObject po(*p, "scenario.proposals");
        po.get("known_hit_rate", c.proposals.known_hit_rate);
        po.get("unknown_hit_rate", c.proposals.unknown_hit_rate);
        po.get("jitter", c.proposals.jitter);
        po.get("clutter_per_image", c.proposals.clutter_per_image);
        po.get("clutter_min_side", c.proposals.clutter_min_side);
        po.get("clutter_max_side", c.proposals.clutter_max_side);
        po.get("clutter_max_aspect", c.proposals.clutter_max_aspect);
        po.finish();
    }
    if (const auto* d = obj.child("detector")) {
        StrictObject dobj(*d, "scenario.detector");
        dobj.get("recall", c.detector.recall);
        dobj.get("confusion_rate", c.detector.confusion_rate);
        dobj.get("unknown_as_known_rate", c.detector.unknown_as_known_rate);
        dobj.get("false_positives_per_image", c.detector.false_positives_per_image);
        dobj.get("jitter", c.detector.jitter);
        dobj.finish();
    }
    obj.finish();
    c.validate();
    return c;
}

nlohmann::json to_json(const ScenarioConfig& c) {
    return {{"image_width", c.image_width},
            {"image_height", c.image_height},
            {"channels", c.channels},
            {"num_images", c.num_images},
            {"levels", levels_to_json(c.levels)},
            {"num_prototypes", c.num_prototypes},
            {"prototype_scale", c.prototype_scale},
            {"object_scale", c.object_scale},
            {"object_texture", c.object_texture},
            {"noise_sigma", c.noise_sigma},
            {"known_per_image", c.known_per_image},
            {"unknown_per_image", c.unknown_per_image},
            {"min_side", c.min_side},
            {"max_side", c.max_side},
            {"min_aspect", c.min_aspect},
            {"max_aspect", c.max_aspect},
            {"placement_retries", c.placement_retries},
            {"known_classes", c.known_classes},
            {"unknown_classes", c.unknown_classes},
            {"proposals",
             {{"known_hit_rate", c.proposals.known_hit_rate},
              {"unknown_hit_rate", c.proposals.unknown_hit_rate},
              {"jitter", c.proposals.jitter},
              {"clutter_per_image", c.proposals.clutter_per_image},
              {"clutter_min_side", c.proposals.clutter_min_side},
              {"clutter_max_side", c.proposals.clutter_max_side},
              {"clutter_max_aspect", c.proposals.clutter_max_aspect}}},
            {"detector",
             {{"recall", c.detector.recall},
              {"confusion_rate", c.detector.confusion_rate},
              {"unknown_as_known_rate", c.detector.unknown_as_known_rate},
              {"false_positives_per_image", c.detector.false_positives_per_image},
              {"jitter", c.detector.jitter}}}};
}

const FeatureMap& SyntheticImage::feature_map(Level level) const {
    for (const auto& map : feature_maps) {
        if (map.level() == level) {
            return map;
        }
    }
    throw Error(ErrorCode::MissingData, "image " + std::to_string(image_id) + " has no " +
                                            std::string(level_name(level)) + " feature map");
}

std::vector<Box> SyntheticImage::known_boxes() const {
    std::vector<Box> out;
    for (const auto& k : known) {
        out.push_back(k.box);
    }
    return out;
}

std::vector<Box> SyntheticImage::unknown_boxes() const {
    std::vector<Box> out;
    for (const auto& u : unknown) {
        out.push_back(u.box);
    }
    return out;
}

SyntheticScenario generate_scenario(std::uint64_t seed, const ScenarioConfig& config) {
    config.validate();
    SyntheticScenario scenario;
    scenario.config = config;
    scenario.seed = seed;

    Rng proto_rng(derive_seed(seed, kPrototypeStream));
    scenario.background_prototypes.assign(config.num_prototypes, std::vector<double>(config.channels));
    for (auto& proto : scenario.background_prototypes) {
        for (auto& x : proto) {
            x = config.prototype_scale * proto_rng.normal();
        }
    }

    for (int i = 0; i < config.num_images; ++i) {
        const auto stream = static_cast<std::uint64_t>(i);
        SyntheticImage image;
        image.image_id = i + 1;
        image.width = config.image_width;
        image.height = config.image_height;

        Rng layout_rng(derive_seed(seed, kLayoutStream + stream));
        place_objects(image, config, layout_rng);

        for (auto level : config.levels) {
            Rng feature_rng(derive_seed(seed, kFeatureStream + 16 * stream + static_cast<std::uint64_t>(level)));
            image.feature_maps.push_back(paint_level(image, scenario.background_prototypes, config, level, feature_rng));
        }

        Rng proposal_rng(derive_seed(seed, kProposalStream + stream));
        simulate_proposals(image, config, proposal_rng);
        Rng detector_rng(derive_seed(seed, kDetectorStream + stream));
        simulate_detector(image, config, detector_rng);

        scenario.images.push_back(std::move(image));
    }
    return scenario;
}

std::vector<Box> sample_background_boxes(const SyntheticImage& image, const ScenarioConfig& config, int count,
                                         std::uint64_t seed) {
    Rng rng(seed);
    const auto objects = all_objects(image);
    std::vector<Box> out;
    const int max_attempts = 200 * std::max(count, 1);
    for (int attempt = 0; attempt < max_attempts && static_cast<int>(out.size()) < count; ++attempt) {
        Box candidate = draw_object_box(rng, config);
        const bool clear = std::none_of(objects.begin(), objects.end(), [&](const LabeledBox& o) {
            return intersection_area(o.box, candidate) > 0.0;
        });
        if (clear) {
            out.push_back(candidate);
        }
    }
    return out;
}

}  // namespace rewod
