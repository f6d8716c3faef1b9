// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rewod/feature_map.hpp"
#include "rewod/geometry.hpp"
#include "rewod/pseudo_label.hpp"
#include "rewod/scorer.hpp"
#include "rewod/soft_label.hpp"

namespace rewod {

// Sliding-window candidates. For every level band (lo, hi] the grid uses
// square-equivalent sides lo * 2^(k/3), k = 1..3, each at every aspect
// ratio (w/h), stepped by step_fraction of the box extent along each axis
// and kept fully inside the image.
struct CandidateGridConfig {
    std::vector<double> aspect_ratios = {0.5, 1.0, 2.0};
    double step_fraction = 0.25;

    void validate() const;
};

std::vector<Box> sliding_window_candidates(int image_width, int image_height, std::span<const LevelRange> ranges,
                                           const CandidateGridConfig& cfg = {});

struct SelfTrainConfig {
    double top_percent = 30.0;
    int iterations = 1;
    double positive_iou = 0.3;
    FilterConfig filter;
    ScorerTrainConfig scorer;
    CandidateGridConfig grid;
    RoiAlignOptions roi;

    void validate() const;
};

SelfTrainConfig self_train_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SelfTrainConfig& cfg);

struct SelfTrainImage {
    std::int64_t image_id = 0;
    int width = 0;
    int height = 0;
    std::vector<ErrorMap> error_maps;
    std::vector<Box> known;
    std::vector<Box> extra_candidates;  // e.g. generator proposals that were not accepted
};

struct RoundReport {
    int round = 0;
    std::size_t training_samples = 0;
    std::size_t candidates = 0;
    std::size_t added = 0;
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

struct SelfTrainResult {
    PseudoLabelSet labels;
    ProposalScorer scorer;
    std::vector<RoundReport> rounds;
    std::string diagnostic;  // non-empty when the loop stopped early
};

nlohmann::json to_json(const RoundReport& report);

// Runs cfg.iterations rounds of: fit the localization head on known boxes
// (weight 1) and current pseudo labels (weight = soft label), score every
// candidate, keep the top percent per image, filter against known boxes and
// the image's existing labels, soft-label and merge the survivors.
SelfTrainResult self_train(const PseudoLabelSet& initial, const ProposalScorer& scorer, const RewModel& model,
                           std::span<const SelfTrainImage> images, const SelfTrainConfig& cfg);

// Fraction of `truth` boxes covered by a distinct label at IoU >= iou_threshold.
double label_recall(const PseudoLabelSet& labels, const std::map<std::int64_t, std::vector<Box>>& truth,
                    double iou_threshold = 0.5);

}  // namespace rewod
