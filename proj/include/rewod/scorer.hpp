// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "rewod/geometry.hpp"
#include "rewod/soft_label.hpp"

namespace rewod {

// Proposal descriptor: foreground posteriors of the routed level's error map
// pooled over a 3x3 grid of bins inside the box (row-major), followed by the
// posteriors of four context strips just outside the box (left, right, top,
// bottom; each a quarter of the box extent thick). A strip that falls
// entirely outside the map contributes 0.
inline constexpr int kDescriptorDim = 13;

std::vector<double> proposal_descriptor(const RewModel& model, std::span<const ErrorMap> maps, const Box& box,
                                        const RoiAlignOptions& options = {});

// Logistic-output linear head: sigmoid(w . x + b).
struct LinearHead {
    std::vector<double> weights;
    double bias = 0.0;

    double logit(std::span<const double> x) const;
    double predict(std::span<const double> x) const;
};

// Linear stand-in for the localization-quality and classification heads of
// a proposal network. Both heads start at zero (predicting 0.5).
struct ProposalScorer {
    LinearHead localization;
    LinearHead classification;  // probability that the proposal is an unknown object

    static ProposalScorer zeros(int dim = kDescriptorDim);
    int dim() const { return static_cast<int>(localization.weights.size()); }
};

nlohmann::json to_json(const ProposalScorer& scorer);
ProposalScorer proposal_scorer_from_json(const nlohmann::json& j);

struct HeadGradient {
    std::vector<double> weights;
    double bias = 0.0;
};

// Weighted l1 localization loss of the head over the given samples and its
// gradient. Terms with a zero residual take the zero subgradient.
double localization_loss(const LinearHead& head, std::span<const std::vector<double>> features,
                         std::span<const double> targets, std::span<const double> weights);
HeadGradient localization_gradient(const LinearHead& head, std::span<const std::vector<double>> features,
                                   std::span<const double> targets, std::span<const double> weights);

// Weighted binary cross-entropy of the classification head; labels are 0/1.
double classification_loss(const LinearHead& head, std::span<const std::vector<double>> features,
                           std::span<const int> labels, std::span<const double> weights);
HeadGradient classification_gradient(const LinearHead& head, std::span<const std::vector<double>> features,
                                     std::span<const int> labels, std::span<const double> weights);

struct ScorerTrainConfig {
    double learning_rate = 2.0;
    int epochs = 400;

    void validate() const;
};

struct ScorerTrainReport {
    double initial_loss = 0.0;
    double final_loss = 0.0;
    std::vector<double> losses;
};

// Full-batch gradient descent on the weighted localization loss; returns the
// iterate with the lowest loss (the start included). The classification
// head is left untouched.
ProposalScorer train_scorer(const ProposalScorer& scorer, std::span<const std::vector<double>> features,
                            std::span<const double> targets, std::span<const double> weights,
                            const ScorerTrainConfig& cfg, ScorerTrainReport* report = nullptr);

// Same procedure on the weighted cross-entropy of the classification head.
ProposalScorer train_classifier(const ProposalScorer& scorer, std::span<const std::vector<double>> features,
                                std::span<const int> labels, std::span<const double> weights,
                                const ScorerTrainConfig& cfg, ScorerTrainReport* report = nullptr);

}  // namespace rewod
