// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rewod/autoencoder.hpp"
#include "rewod/feature_map.hpp"
#include "rewod/geometry.hpp"
#include "rewod/pseudo_label.hpp"
#include "rewod/run_config.hpp"
#include "rewod/scenario.hpp"
#include "rewod/soft_label.hpp"

namespace rewod {

struct TrainingImage {
    std::int64_t image_id = 0;
    std::vector<FeatureMap> features;
    std::vector<Box> known;
};

struct LevelTrainReport {
    Level level = Level::P3;
    TrainReport autoencoder;
};

// Trains one autoencoder per configured level on every cell of every image,
// then fits the error distributions with `pseudo` kept out of the background.
RewModel train_rew_model(std::span<const TrainingImage> images, const RunConfig& cfg,
                         std::vector<LevelTrainReport>* report = nullptr, const PseudoLabelSet* pseudo = nullptr);

// Refits the error distributions of an already trained model.
void refit_weibull(RewModel& model, std::span<const TrainingImage> images, const RunConfig& cfg,
                   const PseudoLabelSet* pseudo = nullptr);

std::vector<TrainingImage> training_images(const SyntheticScenario& scenario);

}  // namespace rewod
