// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "rewod/feature_map.hpp"
#include "rewod/geometry.hpp"
#include "rewod/owod_eval.hpp"
#include "rewod/pyramid.hpp"

namespace rewod {

// Simulated class-agnostic proposal generator: jittered boxes on a fraction
// of the objects plus clutter boxes anywhere in the image.
struct ProposalSimConfig {
    double known_hit_rate = 0.9;
    double unknown_hit_rate = 0.5;
    double jitter = 0.06;           // std of centre shift and log-size, relative to box size
    int clutter_per_image = 16;
    double clutter_min_side = 24.0;
    double clutter_max_side = 320.0;
    double clutter_max_aspect = 5.0;
};

// Simulated closed-set detector output used to exercise the evaluator.
struct DetectorSimConfig {
    double recall = 0.85;
    double confusion_rate = 0.1;       // known object reported with another known class
    double unknown_as_known_rate = 0.3;
    int false_positives_per_image = 2;
    double jitter = 0.04;
};

struct ScenarioConfig {
    int image_width = 640;
    int image_height = 640;
    int channels = 64;
    int num_images = 8;
    std::vector<Level> levels = {kAllLevels.begin(), kAllLevels.end()};
    int num_prototypes = 5;
    double prototype_scale = 1.0;   // per-component std of background prototypes
    double object_scale = 1.0;      // per-component std of per-object feature vectors
    double object_texture = 0.5;    // per-cell foreground variation around the object vector
    double noise_sigma = 0.1;
    int known_per_image = 4;
    int unknown_per_image = 4;
    double min_side = 48.0;
    double max_side = 256.0;
    double min_aspect = 0.5;
    double max_aspect = 2.0;
    int placement_retries = 500;
    std::vector<std::string> known_classes = {"person", "car", "dog"};
    std::vector<std::string> unknown_classes = {"zebra", "kite"};
    ProposalSimConfig proposals;
    DetectorSimConfig detector;

    void validate() const;
};

ScenarioConfig scenario_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& config);

struct LabeledBox {
    Box box;
    std::string label;
};

struct SyntheticImage {
    std::int64_t image_id;
    int width;
    int height;
    std::vector<FeatureMap> feature_maps;  // one per configured level, same order
    std::vector<LabeledBox> known;
    std::vector<LabeledBox> unknown;       // held-out truth
    std::vector<ScoredBox> proposals;      // simulated unsupervised proposals
    std::vector<Detection> known_detections;

    const FeatureMap& feature_map(Level level) const;
    std::vector<Box> known_boxes() const;
    std::vector<Box> unknown_boxes() const;
};

struct SyntheticScenario {
    ScenarioConfig config;
    std::uint64_t seed = 0;
    std::vector<std::vector<double>> background_prototypes;
    std::vector<SyntheticImage> images;
};

// Deterministic for a fixed (seed, config). Objects within an image never
// intersect one another, so known and unknown sets are pairwise disjoint.
SyntheticScenario generate_scenario(std::uint64_t seed, const ScenarioConfig& config = {});

// Boxes with the configured object size and aspect distribution that
// intersect no object of `image`. Fewer than `count` may be returned when
// placement keeps failing.
std::vector<Box> sample_background_boxes(const SyntheticImage& image, const ScenarioConfig& config, int count,
                                         std::uint64_t seed);

}  // namespace rewod
