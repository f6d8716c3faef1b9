// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/owod_eval.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

#include "rewod/error.hpp"

namespace rewod {

std::set<std::string> TaskSplit::known() const {
    std::set<std::string> out = previously_known;
    out.insert(current_known.begin(), current_known.end());
    return out;
}

bool TaskSplit::is_known(const std::string& label) const {
    return previously_known.contains(label) || current_known.contains(label);
}

void TaskSplit::validate() const {
    for (const auto& name : unknown) {
        if (is_known(name)) {
            throw Error(ErrorCode::Config, "class '" + name + "' is both known and unknown");
        }
    }
    for (const auto& name : previously_known) {
        if (current_known.contains(name)) {
            throw Error(ErrorCode::Config, "class '" + name + "' is listed as previously and currently known");
        }
    }
    if (is_known(kUnknownLabel) || unknown.contains(kUnknownLabel)) {
        throw Error(ErrorCode::Config, "'unknown' is reserved and cannot name a class");
    }
}

TaskSplit task_split_from_json(const nlohmann::json& j) {
    TaskSplit split;
    try {
        split.task_id = j.value("task_id", 1);
        split.previously_known = j.value("previously_known", std::set<std::string>{});
        split.current_known = j.at("current_known").get<std::set<std::string>>();
        split.unknown = j.value("unknown", std::set<std::string>{});
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("task split: ") + e.what());
    }
    split.validate();
    return split;
}

nlohmann::json to_json(const TaskSplit& split) {
    return {{"task_id", split.task_id},
            {"previously_known", split.previously_known},
            {"current_known", split.current_known},
            {"unknown", split.unknown}};
}

namespace {

std::vector<std::size_t> detection_order(std::span<const Detection> dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return dets[l].score > dets[r].score; });
    return order;
}

std::unordered_map<std::int64_t, std::vector<std::size_t>> group_by_image(std::span<const GroundTruth> gts) {
    std::unordered_map<std::int64_t, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < gts.size(); ++i) {
        out[gts[i].image_id].push_back(i);
    }
    return out;
}

double coverage_recall(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold) {
    if (gts.empty()) {
        return 0.0;
    }
    std::size_t covered = 0;
    for (const auto& gt : gts) {
        const bool hit = std::any_of(dets.begin(), dets.end(), [&](const Detection& d) {
            return d.image_id == gt.image_id && iou(d.box, gt.box) >= iou_threshold;
        });
        covered += hit ? 1 : 0;
    }
    return static_cast<double>(covered) / static_cast<double>(gts.size());
}

template <typename Pred>
std::vector<Detection> filter_dets(std::span<const Detection> dets, Pred pred) {
    std::vector<Detection> out;
    std::copy_if(dets.begin(), dets.end(), std::back_inserter(out), pred);
    return out;
}

template <typename Pred>
std::vector<GroundTruth> filter_gts(std::span<const GroundTruth> gts, Pred pred) {
    std::vector<GroundTruth> out;
    std::copy_if(gts.begin(), gts.end(), std::back_inserter(out), pred);
    return out;
}

double mean_of(const std::vector<double>& values) {
    if (values.empty()) {
        return 0.0;
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace

MatchResult greedy_match(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold) {
    MatchResult result;
    result.order = detection_order(dets);
    result.match.assign(dets.size(), std::nullopt);
    const auto by_image = group_by_image(gts);
    std::vector<bool> taken(gts.size(), false);
    for (auto d : result.order) {
        auto it = by_image.find(dets[d].image_id);
        if (it == by_image.end()) {
            continue;
        }
        double best = iou_threshold;
        std::optional<std::size_t> best_gt;
        for (auto g : it->second) {
            if (taken[g]) {
                continue;
            }
            const double overlap = iou(dets[d].box, gts[g].box);
            if (overlap >= best && (!best_gt || overlap > best)) {
                best = overlap;
                best_gt = g;
            }
        }
        if (best_gt) {
            taken[*best_gt] = true;
            result.match[d] = best_gt;
            ++result.matched_ground_truth;
        }
    }
    return result;
}

double average_precision(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold) {
    if (gts.empty()) {
        return 0.0;
    }
    const auto m = greedy_match(dets, gts, iou_threshold);
    const auto total = static_cast<double>(gts.size());
    std::vector<double> precision;
    std::vector<double> recall;
    double tp = 0.0;
    double fp = 0.0;
    for (auto d : m.order) {
        (m.match[d] ? tp : fp) += 1.0;
        precision.push_back(tp / (tp + fp));
        recall.push_back(tp / total);
    }
    // Monotone precision envelope, then sum over recall steps.
    for (std::size_t i = precision.size(); i-- > 1;) {
        precision[i - 1] = std::max(precision[i - 1], precision[i]);
    }
    double ap = 0.0;
    double prev_recall = 0.0;
    for (std::size_t i = 0; i < precision.size(); ++i) {
        ap += (recall[i] - prev_recall) * precision[i];
        prev_recall = recall[i];
    }
    return std::clamp(ap, 0.0, 1.0);
}

double u_recall(std::span<const Detection> dets, std::span<const GroundTruth> gts, double score_threshold,
                double iou_threshold, bool unique_matching) {
    const auto unknown_dets =
        filter_dets(dets, [&](const Detection& d) { return d.is_unknown() && d.score > score_threshold; });
    const auto unknown_gts = filter_gts(gts, [](const GroundTruth& g) { return g.is_unknown; });
    if (unknown_gts.empty()) {
        return 0.0;
    }
    if (!unique_matching) {
        return coverage_recall(unknown_dets, unknown_gts, iou_threshold);
    }
    const auto m = greedy_match(unknown_dets, unknown_gts, iou_threshold);
    return static_cast<double>(m.matched_ground_truth) / static_cast<double>(unknown_gts.size());
}

double recall_at_k(std::span<const Detection> dets, std::span<const GroundTruth> gts, int k, double iou_threshold,
                   bool unique_matching) {
    if (k < 1) {
        throw Error(ErrorCode::InvalidArgument, "recall_at_k requires k >= 1");
    }
    const auto unknown_dets = filter_dets(dets, [](const Detection& d) { return d.is_unknown(); });
    const auto unknown_gts = filter_gts(gts, [](const GroundTruth& g) { return g.is_unknown; });
    if (unknown_gts.empty()) {
        return 0.0;
    }
    std::unordered_map<std::int64_t, int> per_image;
    std::vector<Detection> truncated;
    for (auto i : detection_order(unknown_dets)) {
        if (per_image[unknown_dets[i].image_id]++ < k) {
            truncated.push_back(unknown_dets[i]);
        }
    }
    if (!unique_matching) {
        return coverage_recall(truncated, unknown_gts, iou_threshold);
    }
    const auto m = greedy_match(truncated, unknown_gts, iou_threshold);
    return static_cast<double>(m.matched_ground_truth) / static_cast<double>(unknown_gts.size());
}

std::int64_t a_ose(std::span<const Detection> dets, std::span<const GroundTruth> gts, double iou_threshold) {
    const auto by_image = group_by_image(gts);
    std::vector<bool> counted(gts.size(), false);
    std::int64_t total = 0;
    for (auto d : detection_order(dets)) {
        if (dets[d].is_unknown()) {
            continue;
        }
        auto it = by_image.find(dets[d].image_id);
        if (it == by_image.end()) {
            continue;
        }
        double best = -1.0;
        std::size_t best_gt = 0;
        for (auto g : it->second) {
            const double overlap = iou(dets[d].box, gts[g].box);
            if (overlap > best) {
                best = overlap;
                best_gt = g;
            }
        }
        if (best >= iou_threshold && gts[best_gt].is_unknown && !counted[best_gt]) {
            counted[best_gt] = true;
            ++total;
        }
    }
    return total;
}

double wilderness_impact(std::int64_t a_ose_count, std::int64_t tp_known, std::int64_t fp_known) {
    if (tp_known < 0 || fp_known < 0 || tp_known + fp_known <= 0) {
        throw Error(ErrorCode::InvalidArgument, "wilderness impact needs TP + FP > 0");
    }
    return static_cast<double>(a_ose_count) / static_cast<double>(tp_known + fp_known);
}

MetricsReport evaluate_task(std::span<const Detection> dets, std::span<const GroundTruth> gts, const TaskSplit& split,
                            const EvalConfig& config) {
    split.validate();
    for (const auto& d : dets) {
        if (!d.is_unknown() && !split.is_known(d.class_label)) {
            throw Error(ErrorCode::InvalidArgument, "detection class '" + d.class_label + "' is not a known class");
        }
    }
    MetricsReport report;
    report.task_id = split.task_id;
    report.num_detections = static_cast<std::int64_t>(dets.size());

    std::vector<double> previous;
    std::vector<double> current;
    std::vector<double> both;
    for (const auto& name : split.known()) {
        const auto class_dets = filter_dets(dets, [&](const Detection& d) { return d.class_label == name; });
        const auto class_gts =
            filter_gts(gts, [&](const GroundTruth& g) { return !g.is_unknown && g.class_label == name; });
        const auto m = greedy_match(class_dets, class_gts, config.iou_threshold);
        report.tp_known += static_cast<std::int64_t>(m.matched_ground_truth);
        report.fp_known += static_cast<std::int64_t>(class_dets.size() - m.matched_ground_truth);
        report.num_known_gt += static_cast<std::int64_t>(class_gts.size());
        if (class_gts.empty()) {
            report.class_ap[name] = std::nullopt;
            continue;
        }
        const double ap = average_precision(class_dets, class_gts, config.iou_threshold);
        report.class_ap[name] = ap;
        both.push_back(ap);
        (split.previously_known.contains(name) ? previous : current).push_back(ap);
    }
    report.map_previous = mean_of(previous);
    report.map_current = mean_of(current);
    report.map_both = mean_of(both);

    report.num_unknown_gt =
        std::count_if(gts.begin(), gts.end(), [](const GroundTruth& g) { return g.is_unknown; });
    report.u_recall =
        u_recall(dets, gts, config.unknown_score_threshold, config.iou_threshold, config.unique_matching);
    for (int k : config.recall_ks) {
        report.recall_at[k] = recall_at_k(dets, gts, k, config.iou_threshold, config.unique_matching);
    }
    report.a_ose = a_ose(dets, gts, config.iou_threshold);
    // With no known-class predictions the impact is defined as zero.
    report.wi = report.tp_known + report.fp_known > 0
                    ? wilderness_impact(report.a_ose, report.tp_known, report.fp_known)
                    : 0.0;
    return report;
}

nlohmann::json to_json(const MetricsReport& report) {
    nlohmann::json class_ap = nlohmann::json::object();
    for (const auto& [name, ap] : report.class_ap) {
        class_ap[name] = ap ? nlohmann::json(*ap) : nlohmann::json(nullptr);
    }
    nlohmann::json recall_at = nlohmann::json::object();
    for (const auto& [k, r] : report.recall_at) {
        recall_at[std::to_string(k)] = r;
    }
    return {{"task_id", report.task_id},
            {"class_ap", class_ap},
            {"map_previously_known", report.map_previous},
            {"map_current_known", report.map_current},
            {"map_both", report.map_both},
            {"u_recall", report.u_recall},
            {"recall_at", recall_at},
            {"a_ose", report.a_ose},
            {"wi", report.wi},
            {"tp_known", report.tp_known},
            {"fp_known", report.fp_known},
            {"num_detections", report.num_detections},
            {"num_known_gt", report.num_known_gt},
            {"num_unknown_gt", report.num_unknown_gt}};
}

}  // namespace rewod
