// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/pipeline.hpp"

#include <algorithm>

#include "rewod/error.hpp"
#include "rewod/rng.hpp"
#include "rewod/weibull_fit.hpp"

namespace rewod {

namespace {

constexpr std::uint64_t kAutoencoderInitStream = 30;

const FeatureMap& find_level(const TrainingImage& im, Level level) {
    const auto it = std::find_if(im.features.begin(), im.features.end(),
                                 [&](const FeatureMap& f) { return f.level() == level; });
    if (it == im.features.end()) {
        throw Error(ErrorCode::MissingData, "image " + std::to_string(im.image_id) + " has no " +
                                                std::string(level_name(level)) + " feature map");
    }
    return *it;
}

}  // namespace

void refit_weibull(RewModel& model, std::span<const TrainingImage> images, const RunConfig& cfg,
                   const PseudoLabelSet* pseudo) {
    std::vector<Level> levels;
    for (const auto& m : model.levels) {
        levels.push_back(m.level);
    }
    std::vector<ImageErrors> errors;
    for (const auto& im : images) {
        ImageErrors e;
        e.image_id = im.image_id;
        e.maps = compute_error_maps(model, im.features);
        e.known = im.known;
        if (pseudo != nullptr) {
            if (const auto it = pseudo->find(im.image_id); it != pseudo->end()) {
                for (const auto& l : it->second) {
                    e.pseudo.push_back(l.proposal.box);
                }
            }
        }
        errors.push_back(std::move(e));
    }
    const auto pairs = fit_pair(errors, levels, cfg.weibull_fit());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        model.levels[i].weibull = pairs[i];
    }
}

RewModel train_rew_model(std::span<const TrainingImage> images, const RunConfig& cfg,
                         std::vector<LevelTrainReport>* report, const PseudoLabelSet* pseudo) {
    if (images.empty()) {
        throw Error(ErrorCode::MissingData, "no training images");
    }
    RewModel model;
    model.gamma = cfg.gamma;
    for (Level level : cfg.scenario.levels) {
        std::vector<FeatureMap> maps;
        for (const auto& im : images) {
            maps.push_back(find_level(im, level));
        }
        const auto init = Autoencoder::initialize(
            level, maps.front().channels(), cfg.reconstructor.latent_dims.at(level),
            derive_seed(cfg.seed, kAutoencoderInitStream + static_cast<std::uint64_t>(level)));
        LevelTrainReport lr;
        lr.level = level;
        LevelModel lm;
        lm.level = level;
        lm.size_range = cfg.reconstructor.size_ranges.at(level);
        lm.autoencoder = train(init, maps, cfg.autoencoder_train(level), &lr.autoencoder);
        model.levels.push_back(std::move(lm));
        if (report != nullptr) {
            report->push_back(std::move(lr));
        }
    }
    std::sort(model.levels.begin(), model.levels.end(),
              [](const LevelModel& a, const LevelModel& b) { return a.size_range.min_side < b.size_range.min_side; });
    refit_weibull(model, images, cfg, pseudo);
    model.validate();
    return model;
}

std::vector<TrainingImage> training_images(const SyntheticScenario& scenario) {
    std::vector<TrainingImage> out;
    for (const auto& img : scenario.images) {
        out.push_back({img.image_id, img.feature_maps, img.known_boxes()});
    }
    return out;
}

}  // namespace rewod
