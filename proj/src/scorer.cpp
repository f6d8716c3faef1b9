// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "rewod/error.hpp"

namespace rewod {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// -log(sigmoid(z)) without overflow.
double softplus_neg(double z) { return z > 0.0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }

template <typename T>
void check_samples(const LinearHead& head, std::span<const std::vector<double>> features, std::span<const T> targets,
                   std::span<const double> weights) {
    if (features.empty() || features.size() != targets.size() || features.size() != weights.size()) {
        throw Error(ErrorCode::DimensionMismatch, "scorer samples, targets and weights must be non-empty and equal");
    }
    for (const auto& x : features) {
        if (x.size() != head.weights.size()) {
            throw Error(ErrorCode::DimensionMismatch, "feature length does not match the scorer");
        }
    }
    for (double w : weights) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "loss weights must lie in [0, 1]");
        }
    }
}

void apply(LinearHead& head, const HeadGradient& g, double lr) {
    for (std::size_t k = 0; k < head.weights.size(); ++k) {
        head.weights[k] -= lr * g.weights[k];
    }
    head.bias -= lr * g.bias;
}

nlohmann::json head_to_json(const LinearHead& h) { return {{"weights", h.weights}, {"bias", h.bias}}; }

LinearHead head_from_json(const nlohmann::json& j) {
    return {j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>()};
}

ProposalScorer descend(const ProposalScorer& start, LinearHead ProposalScorer::*head, const ScorerTrainConfig& cfg,
                       const std::function<double(const LinearHead&)>& loss,
                       const std::function<HeadGradient(const LinearHead&)>& gradient, ScorerTrainReport* report) {
    cfg.validate();
    ScorerTrainReport local;
    ProposalScorer current = start;
    ProposalScorer best = start;
    local.initial_loss = loss(start.*head);
    double best_loss = local.initial_loss;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        apply(current.*head, gradient(current.*head), cfg.learning_rate);
        const double value = loss(current.*head);
        if (!std::isfinite(value)) {
            throw Error(ErrorCode::TrainingDiverged, "scorer loss became non-finite at step " + std::to_string(epoch + 1));
        }
        local.losses.push_back(value);
        if (value < best_loss) {
            best_loss = value;
            best = current;
        }
    }
    local.final_loss = best_loss;
    if (report != nullptr) {
        *report = std::move(local);
    }
    return best;
}

}  // namespace

std::vector<double> proposal_descriptor(const RewModel& model, std::span<const ErrorMap> maps, const Box& box,
                                        const RoiAlignOptions& options) {
    std::vector<LevelRange> ranges;
    for (const auto& m : model.levels) {
        ranges.push_back({m.level, m.size_range});
    }
    const Level level = route_level(box, ranges);
    const auto map = std::find_if(maps.begin(), maps.end(), [&](const ErrorMap& e) { return e.level() == level; });
    if (map == maps.end()) {
        throw Error(ErrorCode::MissingData, "no error map for level " + std::string(level_name(level)));
    }
    const auto& pair = model.level(level).weibull;
    const int s = map->stride();

    std::vector<double> out;
    out.reserve(kDescriptorDim);
    for (double re : roi_align(*map, box, s, 3, 3, options)) {
        out.push_back(foreground_posterior(pair, re));
    }

    const double extent_x = static_cast<double>(map->width()) * s;
    const double extent_y = static_cast<double>(map->height()) * s;
    const double tw = 0.25 * box.width();
    const double th = 0.25 * box.height();
    const std::array<std::array<double, 4>, 4> strips = {{
        {box.x() - tw, box.y(), box.x(), box.bottom()},
        {box.right(), box.y(), box.right() + tw, box.bottom()},
        {box.x(), box.y() - th, box.right(), box.y()},
        {box.x(), box.bottom(), box.right(), box.bottom() + th},
    }};
    for (const auto& st : strips) {
        const double x1 = std::max(st[0], 0.0);
        const double y1 = std::max(st[1], 0.0);
        const double x2 = std::min(st[2], extent_x);
        const double y2 = std::min(st[3], extent_y);
        if (x2 - x1 <= 0.0 || y2 - y1 <= 0.0) {
            out.push_back(0.0);
            continue;
        }
        out.push_back(foreground_posterior(pair, pooled_error(*map, Box::from_corners(x1, y1, x2, y2), s, options)));
    }
    return out;
}

double LinearHead::logit(std::span<const double> x) const {
    double z = bias;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        z += weights[k] * x[k];
    }
    return z;
}

double LinearHead::predict(std::span<const double> x) const { return sigmoid(logit(x)); }

ProposalScorer ProposalScorer::zeros(int dim) {
    if (dim < 1) {
        throw Error(ErrorCode::InvalidArgument, "scorer dimension must be >= 1");
    }
    const auto n = static_cast<std::size_t>(dim);
    return {{std::vector<double>(n, 0.0), 0.0}, {std::vector<double>(n, 0.0), 0.0}};
}

nlohmann::json to_json(const ProposalScorer& scorer) {
    return {{"localization", head_to_json(scorer.localization)},
            {"classification", head_to_json(scorer.classification)}};
}

ProposalScorer proposal_scorer_from_json(const nlohmann::json& j) {
    try {
        ProposalScorer s{head_from_json(j.at("localization")), head_from_json(j.at("classification"))};
        if (s.localization.weights.size() != s.classification.weights.size() || s.localization.weights.empty()) {
            throw Error(ErrorCode::Parse, "scorer heads must have the same non-zero dimension");
        }
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("scorer: ") + e.what());
    }
}

double localization_loss(const LinearHead& head, std::span<const std::vector<double>> features,
                         std::span<const double> targets, std::span<const double> weights) {
    check_samples(head, features, targets, weights);
    double sum = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        sum += weights[i] * std::abs(head.predict(features[i]) - targets[i]);
    }
    return sum / static_cast<double>(features.size());
}

HeadGradient localization_gradient(const LinearHead& head, std::span<const std::vector<double>> features,
                                   std::span<const double> targets, std::span<const double> weights) {
    check_samples(head, features, targets, weights);
    HeadGradient g{std::vector<double>(head.weights.size(), 0.0), 0.0};
    const double inv_n = 1.0 / static_cast<double>(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double q = head.predict(features[i]);
        const double residual = q - targets[i];
        if (residual == 0.0 || weights[i] == 0.0) {
            continue;
        }
        const double dz = inv_n * weights[i] * (residual > 0.0 ? 1.0 : -1.0) * q * (1.0 - q);
        for (std::size_t k = 0; k < g.weights.size(); ++k) {
            g.weights[k] += dz * features[i][k];
        }
        g.bias += dz;
    }
    return g;
}

double classification_loss(const LinearHead& head, std::span<const std::vector<double>> features,
                           std::span<const int> labels, std::span<const double> weights) {
    check_samples(head, features, labels, weights);
    double sum = 0.0;
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double z = head.logit(features[i]);
        sum += weights[i] * softplus_neg(labels[i] == 1 ? z : -z);
    }
    return sum / static_cast<double>(features.size());
}

HeadGradient classification_gradient(const LinearHead& head, std::span<const std::vector<double>> features,
                                     std::span<const int> labels, std::span<const double> weights) {
    check_samples(head, features, labels, weights);
    HeadGradient g{std::vector<double>(head.weights.size(), 0.0), 0.0};
    const double inv_n = 1.0 / static_cast<double>(features.size());
    for (std::size_t i = 0; i < features.size(); ++i) {
        const double dz = inv_n * weights[i] * (head.predict(features[i]) - (labels[i] == 1 ? 1.0 : 0.0));
        for (std::size_t k = 0; k < g.weights.size(); ++k) {
            g.weights[k] += dz * features[i][k];
        }
        g.bias += dz;
    }
    return g;
}

void ScorerTrainConfig::validate() const {
    if (!(learning_rate > 0.0) || epochs < 0) {
        throw Error(ErrorCode::InvalidArgument, "scorer training needs learning_rate > 0 and epochs >= 0");
    }
}

ProposalScorer train_scorer(const ProposalScorer& scorer, std::span<const std::vector<double>> features,
                            std::span<const double> targets, std::span<const double> weights,
                            const ScorerTrainConfig& cfg, ScorerTrainReport* report) {
    return descend(
        scorer, &ProposalScorer::localization, cfg,
        [&](const LinearHead& h) { return localization_loss(h, features, targets, weights); },
        [&](const LinearHead& h) { return localization_gradient(h, features, targets, weights); }, report);
}

ProposalScorer train_classifier(const ProposalScorer& scorer, std::span<const std::vector<double>> features,
                                std::span<const int> labels, std::span<const double> weights,
                                const ScorerTrainConfig& cfg, ScorerTrainReport* report) {
    return descend(
        scorer, &ProposalScorer::classification, cfg,
        [&](const LinearHead& h) { return classification_loss(h, features, labels, weights); },
        [&](const LinearHead& h) { return classification_gradient(h, features, labels, weights); }, report);
}

}  // namespace rewod
