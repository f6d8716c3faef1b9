// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/pseudo_label.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "rewod/error.hpp"
#include "rewod/json_util.hpp"

namespace rewod {

namespace {

void check_lengths(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": input lengths differ");
    }
    if (a == 0) {
        throw Error(ErrorCode::InvalidArgument, std::string(what) + ": needs at least one term");
    }
}

void check_weights(std::span<const double> weights) {
    for (double w : weights) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "loss weights must lie in [0, 1]");
        }
    }
}

}  // namespace

void FilterConfig::validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(nms_iou) || !unit(max_known_iou)) {
        throw Error(ErrorCode::Config, "filter IoU thresholds must lie in [0, 1]");
    }
    if (!(min_area >= 0.0)) {
        throw Error(ErrorCode::Config, "filter min_area must be >= 0");
    }
    if (!(aspect_min > 0.0 && aspect_min < aspect_max)) {
        throw Error(ErrorCode::Config, "filter needs 0 < aspect_min < aspect_max");
    }
}

FilterConfig filter_config_from_json(const nlohmann::json& j) {
    FilterConfig cfg;
    StrictObject obj(j, "filter");
    obj.get("nms_iou", cfg.nms_iou);
    obj.get("min_area", cfg.min_area);
    obj.get("aspect_min", cfg.aspect_min);
    obj.get("aspect_max", cfg.aspect_max);
    obj.get("max_known_iou", cfg.max_known_iou);
    obj.finish();
    cfg.validate();
    return cfg;
}

nlohmann::json to_json(const FilterConfig& cfg) {
    return {{"nms_iou", cfg.nms_iou},
            {"min_area", cfg.min_area},
            {"aspect_min", cfg.aspect_min},
            {"aspect_max", cfg.aspect_max},
            {"max_known_iou", cfg.max_known_iou}};
}

bool passes_filter_rules(const Box& box, std::span<const Box> known, const FilterConfig& cfg) {
    if (area(box) <= cfg.min_area) {
        return false;
    }
    const double ratio = aspect_ratio(box);
    if (ratio < cfg.aspect_min || ratio > cfg.aspect_max) {
        return false;
    }
    return std::none_of(known.begin(), known.end(), [&](const Box& k) { return iou(box, k) >= cfg.max_known_iou; });
}

std::vector<ScoredBox> filter_proposals(std::span<const ScoredBox> raw, std::span<const Box> known,
                                        const FilterConfig& cfg) {
    cfg.validate();
    std::vector<ScoredBox> out;
    for (const auto& sb : nms(raw, cfg.nms_iou)) {
        if (passes_filter_rules(sb.box, known, cfg)) {
            out.push_back(sb);
        }
    }
    return out;
}

double weighted_classification_loss(std::span<const double> probs, std::span<const double> weights) {
    check_lengths(probs.size(), weights.size(), "weighted_classification_loss");
    check_weights(weights);
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (!(probs[i] > 0.0 && probs[i] <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "probabilities must lie in (0, 1]");
        }
        sum += weights[i] * -std::log(probs[i]);
    }
    return sum / static_cast<double>(probs.size());
}

double weighted_localization_loss(std::span<const double> predicted, std::span<const double> targets,
                                  std::span<const double> weights) {
    check_lengths(predicted.size(), targets.size(), "weighted_localization_loss");
    check_lengths(predicted.size(), weights.size(), "weighted_localization_loss");
    check_weights(weights);
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        sum += weights[i] * std::abs(predicted[i] - targets[i]);
    }
    return sum / static_cast<double>(predicted.size());
}

std::vector<std::optional<LocalizationTarget>> assign_localization_targets(std::span<const Box> proposals,
                                                                           std::span<const Box> ground_truth,
                                                                           double positive_iou) {
    if (!(positive_iou > 0.0 && positive_iou < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "positive_iou must lie in (0, 1)");
    }
    std::vector<std::optional<LocalizationTarget>> out(proposals.size());
    for (std::size_t i = 0; i < proposals.size(); ++i) {
        double best = -1.0;
        std::size_t best_gt = 0;
        for (std::size_t g = 0; g < ground_truth.size(); ++g) {
            const double overlap = iou(proposals[i], ground_truth[g]);
            if (overlap > best) {
                best = overlap;
                best_gt = g;
            }
        }
        if (best > positive_iou) {
            out[i] = LocalizationTarget{best, best_gt};
        }
    }
    return out;
}

std::size_t top_percent_count(std::size_t n, double top_percent) {
    if (!(top_percent > 0.0 && top_percent <= 100.0)) {
        throw Error(ErrorCode::InvalidArgument, "top percent must lie in (0, 100]");
    }
    if (n == 0) {
        return 0;
    }
    const auto k = static_cast<std::size_t>(std::floor(static_cast<double>(n) * top_percent / 100.0));
    return std::clamp<std::size_t>(k, 1, n);
}

std::vector<ScoredBox> select_top_percent(std::span<const ScoredBox> scored, double top_percent) {
    const std::size_t keep = top_percent_count(scored.size(), top_percent);
    const auto order = score_order(scored);
    std::vector<ScoredBox> out;
    out.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        out.push_back(scored[order[i]]);
    }
    return out;
}

std::string PseudoLabel::provenance() const { return round == 0 ? "generator" : "round " + std::to_string(round); }

nlohmann::json to_json_record(std::int64_t image_id, const SoftLabeledProposal& p, double score) {
    return {{"image_id", image_id},
            {"box", box_to_json(p.box)},
            {"score", score},
            {"level", std::string(level_name(p.level))},
            {"pooled_error", p.pooled_error},
            {"soft_label", p.soft_label},
            {"flag", std::string(to_string(p.flag))}};
}

nlohmann::json to_json_record(std::int64_t image_id, const PseudoLabel& label) {
    auto j = to_json_record(image_id, label.proposal, label.score);
    j["provenance"] = label.provenance();
    j["round"] = label.round;
    return j;
}

PseudoLabel pseudo_label_from_record(const nlohmann::json& j, std::int64_t& image_id) {
    try {
        image_id = j.at("image_id").get<std::int64_t>();
        PseudoLabel label{SoftLabeledProposal{box_from_json(j.at("box"))}, 0.0, 0};
        label.proposal.level = parse_level(j.at("level").get<std::string>());
        label.proposal.pooled_error = j.at("pooled_error").get<double>();
        label.proposal.soft_label = j.at("soft_label").get<double>();
        label.proposal.flag = parse_label_flag(j.value("flag", std::string("ok")));
        label.score = j.value("score", label.proposal.soft_label);
        label.round = j.value("round", 0);
        if (!(label.proposal.soft_label >= 0.0 && label.proposal.soft_label <= 1.0)) {
            throw Error(ErrorCode::Parse, "soft_label outside [0, 1]");
        }
        return label;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, e.what());
    }
}

void write_pseudo_labels(const std::string& path, const PseudoLabelSet& labels) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot open " + path + " for writing");
    }
    for (const auto& [image_id, entries] : labels) {
        for (const auto& label : entries) {
            out << to_json_record(image_id, label).dump() << '\n';
        }
    }
}

PseudoLabelSet read_pseudo_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path);
    }
    PseudoLabelSet labels;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            std::int64_t image_id = 0;
            auto label = pseudo_label_from_record(nlohmann::json::parse(line), image_id);
            labels[image_id].push_back(std::move(label));
        } catch (const std::exception& e) {
            throw Error(ErrorCode::Parse, path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return labels;
}

std::optional<std::string> audit_pseudo_labels(const PseudoLabelSet& labels,
                                               const std::map<std::int64_t, std::vector<Box>>& known,
                                               const FilterConfig& cfg) {
    static const std::vector<Box> kNone;
    for (const auto& [image_id, entries] : labels) {
        const auto it = known.find(image_id);
        const auto& known_boxes = it == known.end() ? kNone : it->second;
        for (std::size_t i = 0; i < entries.size(); ++i) {
            const auto& box = entries[i].proposal.box;
            std::ostringstream where;
            where << "image " << image_id << " entry " << i;
            if (!passes_filter_rules(box, known_boxes, cfg)) {
                return where.str() + " violates the filter rules";
            }
            for (std::size_t k = i + 1; k < entries.size(); ++k) {
                if (iou(box, entries[k].proposal.box) > cfg.nms_iou) {
                    return where.str() + " overlaps entry " + std::to_string(k);
                }
            }
        }
    }
    return std::nullopt;
}

}  // namespace rewod
