// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rewod/geometry.hpp"

namespace rewod {

inline constexpr const char* kUnknownLabel = "unknown";

// Class partition for one incremental task. `known()` is cumulative over
// tasks; ground truth outside it counts as unknown.
struct TaskSplit {
    int task_id = 1;
    std::set<std::string> previously_known;
    std::set<std::string> current_known;
    std::set<std::string> unknown;

    std::set<std::string> known() const;
    bool is_known(const std::string& label) const;
    void validate() const;
};

TaskSplit task_split_from_json(const nlohmann::json& j);
nlohmann::json to_json(const TaskSplit& split);

struct Detection {
    std::int64_t image_id;
    Box box;
    std::string class_label;  // a known class or kUnknownLabel
    double score;

    bool is_unknown() const { return class_label == kUnknownLabel; }
};

struct GroundTruth {
    std::int64_t image_id;
    Box box;
    std::string class_label;
    bool is_unknown;
};

struct EvalConfig {
    double iou_threshold = 0.5;
    double unknown_score_threshold = 0.05;
    std::vector<int> recall_ks = {10, 30, 100};
    // When false, a ground truth counts as recalled if any qualifying
    // detection overlaps it, so one detection may cover several objects.
    bool unique_matching = true;
};

// Outcome of greedy score-ordered matching. Detections are visited by
// descending score (ties by input index); each takes the unmatched ground
// truth of the same image with the highest IoU >= threshold (ties by lower
// ground-truth index).
struct MatchResult {
    std::vector<std::size_t> order;                  // detection visiting order
    std::vector<std::optional<std::size_t>> match;   // per detection, in input order
    std::size_t matched_ground_truth = 0;
};

MatchResult greedy_match(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold);

// All-point interpolated AP for one class. Callers pass only that class's
// detections and ground truth. Returns 0 when there is no ground truth.
double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts,
                         double iou_threshold = 0.5);

double u_recall(std::span<const Detection> dets, std::span<const GroundTruth> gts, double score_threshold = 0.05,
                double iou_threshold = 0.5, bool unique_matching = true);

double recall_at_k(std::span<const Detection> dets, std::span<const GroundTruth> gts, int k,
                   double iou_threshold = 0.5, bool unique_matching = true);

std::int64_t a_ose(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold = 0.5);

double wilderness_impact(std::int64_t a_ose, std::int64_t tp_known, std::int64_t fp_known);

struct MetricsReport {
    int task_id = 0;
    std::map<std::string, std::optional<double>> class_ap;  // nullopt: no ground truth
    double map_previous = 0.0;
    double map_current = 0.0;
    double map_both = 0.0;
    double u_recall = 0.0;
    std::map<int, double> recall_at;
    std::int64_t a_ose = 0;
    double wi = 0.0;
    std::int64_t tp_known = 0;
    std::int64_t fp_known = 0;
    std::int64_t num_detections = 0;
    std::int64_t num_known_gt = 0;
    std::int64_t num_unknown_gt = 0;
};

MetricsReport evaluate_task(std::span<const Detection> dets, std::span<const GroundTruth> gts, const TaskSplit& split,
                            const EvalConfig& config = {});

nlohmann::json to_json(const MetricsReport& report);

}  // namespace rewod
