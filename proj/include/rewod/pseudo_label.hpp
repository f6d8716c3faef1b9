// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rewod/geometry.hpp"
#include "rewod/soft_label.hpp"

namespace rewod {

struct FilterConfig {
    double nms_iou = 0.3;
    double min_area = 2000.0;   // boxes must be strictly larger
    double aspect_min = 0.25;
    double aspect_max = 4.0;
    double max_known_iou = 0.3; // IoU with every known box must stay below

    void validate() const;
};

FilterConfig filter_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FilterConfig& cfg);

// The area, aspect and known-overlap rules alone.
bool passes_filter_rules(const Box& box, std::span<const Box> known, const FilterConfig& cfg);

// NMS at cfg.nms_iou, then the rules above. Output is score-descending.
std::vector<ScoredBox> filter_proposals(std::span<const ScoredBox> raw, std::span<const Box> known,
                                        const FilterConfig& cfg);

// (1/N) * sum w_i * (-log p_i). p_i is the predicted probability of the
// proposal's target class.
double weighted_classification_loss(std::span<const double> probs, std::span<const double> weights);

// (1/N) * sum w_i * |q_i - q*_i|.
double weighted_localization_loss(std::span<const double> predicted, std::span<const double> targets,
                                  std::span<const double> weights);

struct LocalizationTarget {
    double iou = 0.0;            // target localization score
    std::size_t ground_truth = 0; // index of the best-overlapping box
};

// Positive (best IoU strictly above positive_iou) proposals get their best
// IoU as target; the rest are left unsampled. Ties go to the lower index.
std::vector<std::optional<LocalizationTarget>> assign_localization_targets(std::span<const Box> proposals,
                                                                           std::span<const Box> ground_truth,
                                                                           double positive_iou);

// The max(1, floor(N * P / 100)) highest-scoring entries (none for N = 0),
// score-descending, ties by input index.
std::vector<ScoredBox> select_top_percent(std::span<const ScoredBox> scored, double top_percent);
std::size_t top_percent_count(std::size_t n, double top_percent);

struct PseudoLabel {
    SoftLabeledProposal proposal;
    double score = 0.0;  // generator confidence or predicted localization quality
    int round = 0;       // 0: generator, k >= 1: self-training round k

    std::string provenance() const;
};

// Accepted unknown pseudo labels per image.
using PseudoLabelSet = std::map<std::int64_t, std::vector<PseudoLabel>>;

// JSON-lines record: {"image_id", "box", "score", "level", "pooled_error",
// "soft_label", "flag", "provenance", "round"}. provenance and round are
// omitted for plain scored proposals.
nlohmann::json to_json_record(std::int64_t image_id, const SoftLabeledProposal& p, double score);
nlohmann::json to_json_record(std::int64_t image_id, const PseudoLabel& label);
PseudoLabel pseudo_label_from_record(const nlohmann::json& j, std::int64_t& image_id);

void write_pseudo_labels(const std::string& path, const PseudoLabelSet& labels);
PseudoLabelSet read_pseudo_labels(const std::string& path);

// Returns a description of the first violated invariant, or nullopt.
std::optional<std::string> audit_pseudo_labels(const PseudoLabelSet& labels,
                                               const std::map<std::int64_t, std::vector<Box>>& known,
                                               const FilterConfig& cfg);

}  // namespace rewod
