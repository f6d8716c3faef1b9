// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/self_train.hpp"

#include <algorithm>
#include <cmath>

#include "rewod/error.hpp"
#include "rewod/json_util.hpp"

namespace rewod {

void CandidateGridConfig::validate() const {
    if (aspect_ratios.empty()) {
        throw Error(ErrorCode::Config, "candidate grid needs at least one aspect ratio");
    }
    for (double a : aspect_ratios) {
        if (!(a > 0.0) || !std::isfinite(a)) {
            throw Error(ErrorCode::Config, "candidate aspect ratios must be positive");
        }
    }
    if (!(step_fraction > 0.0 && step_fraction <= 1.0)) {
        throw Error(ErrorCode::Config, "candidate step_fraction must lie in (0, 1]");
    }
}

std::vector<Box> sliding_window_candidates(int image_width, int image_height, std::span<const LevelRange> ranges,
                                           const CandidateGridConfig& cfg) {
    cfg.validate();
    if (image_width <= 0 || image_height <= 0) {
        throw Error(ErrorCode::InvalidArgument, "image extent must be positive");
    }
    std::vector<Box> out;
    for (const auto& r : ranges) {
        for (int k = 1; k <= 3; ++k) {
            const double side = r.range.min_side * std::exp2(k / 3.0);
            for (double a : cfg.aspect_ratios) {
                const double w = side * std::sqrt(a);
                const double h = side / std::sqrt(a);
                if (w > image_width || h > image_height) {
                    continue;
                }
                const double sx = w * cfg.step_fraction;
                const double sy = h * cfg.step_fraction;
                const auto nx = static_cast<int>(std::floor((image_width - w) / sx + 1e-9));
                const auto ny = static_cast<int>(std::floor((image_height - h) / sy + 1e-9));
                for (int iy = 0; iy <= ny; ++iy) {
                    for (int ix = 0; ix <= nx; ++ix) {
                        out.emplace_back(ix * sx, iy * sy, w, h);
                    }
                }
            }
        }
    }
    return out;
}

void SelfTrainConfig::validate() const {
    if (!(top_percent > 0.0 && top_percent <= 100.0)) {
        throw Error(ErrorCode::Config, "top_percent must lie in (0, 100]");
    }
    if (iterations < 0) {
        throw Error(ErrorCode::Config, "iterations must be >= 0");
    }
    if (!(positive_iou > 0.0 && positive_iou < 1.0)) {
        throw Error(ErrorCode::Config, "positive_iou must lie in (0, 1)");
    }
    filter.validate();
    grid.validate();
    if (!(scorer.learning_rate > 0.0) || scorer.epochs < 0) {
        throw Error(ErrorCode::Config, "scorer training needs learning_rate > 0 and epochs >= 0");
    }
    if (roi.samples_per_axis < 0) {
        throw Error(ErrorCode::Config, "roi samples_per_axis must be >= 0");
    }
}

SelfTrainConfig self_train_config_from_json(const nlohmann::json& j) {
    SelfTrainConfig cfg;
    StrictObject obj(j, "self_train");
    obj.get("top_percent", cfg.top_percent);
    obj.get("iterations", cfg.iterations);
    obj.get("positive_iou", cfg.positive_iou);
    obj.get("roi_samples_per_axis", cfg.roi.samples_per_axis);
    if (const auto* s = obj.child("scorer")) {
        StrictObject sub(*s, "self_train.scorer");
        sub.get("learning_rate", cfg.scorer.learning_rate);
        sub.get("epochs", cfg.scorer.epochs);
        sub.finish();
    }
    if (const auto* g = obj.child("grid")) {
        StrictObject sub(*g, "self_train.grid");
        sub.get("aspect_ratios", cfg.grid.aspect_ratios);
        sub.get("step_fraction", cfg.grid.step_fraction);
        sub.finish();
    }
    obj.finish();
    cfg.validate();
    return cfg;
}

nlohmann::json to_json(const SelfTrainConfig& cfg) {
    return {{"top_percent", cfg.top_percent},
            {"iterations", cfg.iterations},
            {"positive_iou", cfg.positive_iou},
            {"roi_samples_per_axis", cfg.roi.samples_per_axis},
            {"scorer", {{"learning_rate", cfg.scorer.learning_rate}, {"epochs", cfg.scorer.epochs}}},
            {"grid", {{"aspect_ratios", cfg.grid.aspect_ratios}, {"step_fraction", cfg.grid.step_fraction}}}};
}

nlohmann::json to_json(const RoundReport& r) {
    return {{"round", r.round},
            {"training_samples", r.training_samples},
            {"candidates", r.candidates},
            {"added", r.added},
            {"initial_loss", r.initial_loss},
            {"final_loss", r.final_loss}};
}

namespace {

struct ImageCandidates {
    std::vector<Box> boxes;
    std::vector<std::vector<double>> descriptors;
};

}  // namespace

SelfTrainResult self_train(const PseudoLabelSet& initial, const ProposalScorer& scorer, const RewModel& model,
                           std::span<const SelfTrainImage> images, const SelfTrainConfig& cfg) {
    cfg.validate();
    SelfTrainResult result{initial, scorer, {}, {}};
    if (cfg.iterations == 0) {
        return result;
    }
    model.validate();
    if (scorer.dim() != kDescriptorDim) {
        throw Error(ErrorCode::DimensionMismatch, "scorer dimension does not match the proposal descriptor");
    }

    std::vector<LevelRange> ranges;
    for (const auto& m : model.levels) {
        ranges.push_back({m.level, m.size_range});
    }

    // Error maps do not change between rounds, so descriptors are computed once.
    std::vector<ImageCandidates> candidates(images.size());
    std::size_t total = 0;
    for (std::size_t i = 0; i < images.size(); ++i) {
        const auto& img = images[i];
        auto& c = candidates[i];
        c.boxes = sliding_window_candidates(img.width, img.height, ranges, cfg.grid);
        c.boxes.insert(c.boxes.end(), img.extra_candidates.begin(), img.extra_candidates.end());
        c.descriptors.reserve(c.boxes.size());
        for (const auto& b : c.boxes) {
            c.descriptors.push_back(proposal_descriptor(model, img.error_maps, b, cfg.roi));
        }
        total += c.boxes.size();
    }

    for (int round = 1; round <= cfg.iterations; ++round) {
        if (total == 0) {
            result.diagnostic = "round " + std::to_string(round) + ": candidate set is empty";
            break;
        }
        RoundReport report;
        report.round = round;
        report.candidates = total;

        std::vector<std::vector<double>> features;
        std::vector<double> targets;
        std::vector<double> weights;
        for (std::size_t i = 0; i < images.size(); ++i) {
            const auto& img = images[i];
            std::vector<Box> truth = img.known;
            std::vector<double> truth_weight(img.known.size(), 1.0);
            if (const auto it = result.labels.find(img.image_id); it != result.labels.end()) {
                for (const auto& l : it->second) {
                    truth.push_back(l.proposal.box);
                    truth_weight.push_back(l.proposal.soft_label);
                }
            }
            if (truth.empty()) {
                continue;
            }
            const auto assigned = assign_localization_targets(candidates[i].boxes, truth, cfg.positive_iou);
            for (std::size_t k = 0; k < assigned.size(); ++k) {
                if (assigned[k]) {
                    features.push_back(candidates[i].descriptors[k]);
                    targets.push_back(assigned[k]->iou);
                    weights.push_back(truth_weight[assigned[k]->ground_truth]);
                }
            }
        }
        report.training_samples = features.size();
        if (features.empty()) {
            result.diagnostic = "round " + std::to_string(round) + ": no candidate overlaps a training box";
            break;
        }
        ScorerTrainReport train_report;
        result.scorer = train_scorer(result.scorer, features, targets, weights, cfg.scorer, &train_report);
        report.initial_loss = train_report.initial_loss;
        report.final_loss = train_report.final_loss;

        // Selection uses the labels as they stood at the start of the round.
        PseudoLabelSet next = result.labels;
        for (std::size_t i = 0; i < images.size(); ++i) {
            const auto& img = images[i];
            const auto& c = candidates[i];
            if (c.boxes.empty()) {
                continue;
            }
            std::vector<ScoredBox> scored;
            scored.reserve(c.boxes.size());
            for (std::size_t k = 0; k < c.boxes.size(); ++k) {
                scored.push_back({c.boxes[k], result.scorer.localization.predict(c.descriptors[k])});
            }
            const auto top = select_top_percent(scored, cfg.top_percent);

            std::vector<Box> blockers = img.known;
            if (const auto it = result.labels.find(img.image_id); it != result.labels.end()) {
                for (const auto& l : it->second) {
                    blockers.push_back(l.proposal.box);
                }
            }
            const auto kept = filter_proposals(top, blockers, cfg.filter);
            if (kept.empty()) {
                continue;
            }
            std::vector<Box> kept_boxes;
            for (const auto& k : kept) {
                kept_boxes.push_back(k.box);
            }
            const auto labeled = label_proposals(model, img.error_maps, kept_boxes, cfg.roi);
            auto& dest = next[img.image_id];
            for (std::size_t k = 0; k < kept.size(); ++k) {
                dest.push_back({labeled[k], kept[k].score, round});
            }
            report.added += kept.size();
        }
        result.labels = std::move(next);
        result.rounds.push_back(report);
    }
    return result;
}

double label_recall(const PseudoLabelSet& labels, const std::map<std::int64_t, std::vector<Box>>& truth,
                    double iou_threshold) {
    std::size_t hit = 0;
    std::size_t count = 0;
    for (const auto& [image_id, boxes] : truth) {
        count += boxes.size();
        const auto it = labels.find(image_id);
        if (it == labels.end()) {
            continue;
        }
        std::vector<ScoredBox> dets;
        for (const auto& l : it->second) {
            dets.push_back({l.proposal.box, l.score});
        }
        std::vector<bool> used(boxes.size(), false);
        for (std::size_t d : score_order(dets)) {
            double best = iou_threshold;
            std::optional<std::size_t> pick;
            for (std::size_t g = 0; g < boxes.size(); ++g) {
                if (used[g]) {
                    continue;
                }
                const double v = iou(dets[d].box, boxes[g]);
                if (v >= best && (!pick || v > best)) {
                    best = v;
                    pick = g;
                }
            }
            if (pick) {
                used[*pick] = true;
                ++hit;
            }
        }
    }
    return count == 0 ? 0.0 : static_cast<double>(hit) / static_cast<double>(count);
}

}  // namespace rewod
