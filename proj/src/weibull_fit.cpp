// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/weibull_fit.hpp"

#include <algorithm>
#include <string>

#include "rewod/error.hpp"
#include "rewod/rng.hpp"

namespace rewod {

namespace {

bool inside_any(std::span<const Box> boxes, double px, double py) {
    return std::any_of(boxes.begin(), boxes.end(), [&](const Box& b) { return b.contains(px, py); });
}

std::string level_context(Level level) { return " at level " + std::string(level_name(level)); }

}  // namespace

SampledErrors classify_cells(const ErrorMap& e, std::span<const Box> known_boxes, std::span<const Box> pseudo_boxes,
                             int stride) {
    if (stride < 1) {
        throw Error(ErrorCode::InvalidArgument, "stride must be >= 1");
    }
    SampledErrors out;
    for (int r = 0; r < e.height(); ++r) {
        for (int c = 0; c < e.width(); ++c) {
            const double px = (c + 0.5) * stride;
            const double py = (r + 0.5) * stride;
            if (inside_any(known_boxes, px, py)) {
                out.foreground.push_back(e.at(r, c));
            } else if (!inside_any(pseudo_boxes, px, py)) {
                out.background.push_back(e.at(r, c));
            }
        }
    }
    return out;
}

SampledErrors sample_errors(const ErrorMap& e, std::span<const Box> known_boxes, std::span<const Box> pseudo_boxes,
                            int stride, std::size_t max_samples, std::uint64_t seed) {
    auto all = classify_cells(e, known_boxes, pseudo_boxes, stride);
    if (all.foreground.empty()) {
        throw Error(ErrorCode::EmptySamples, "no foreground cells" + level_context(e.level()));
    }
    if (all.background.empty()) {
        throw Error(ErrorCode::EmptySamples, "no background cells" + level_context(e.level()));
    }
    return {subsample(all.foreground, max_samples, derive_seed(seed, 1)),
            subsample(all.background, max_samples, derive_seed(seed, 2))};
}

std::vector<WeibullPair> fit_pair(std::span<const ImageErrors> images, std::span<const Level> levels,
                                  const WeibullFitConfig& config) {
    std::vector<WeibullPair> pairs;
    for (auto level : levels) {
        SampledErrors pooled;
        for (const auto& image : images) {
            const auto it = std::find_if(image.maps.begin(), image.maps.end(),
                                         [&](const ErrorMap& m) { return m.level() == level; });
            if (it == image.maps.end()) {
                throw Error(ErrorCode::MissingData, "image " + std::to_string(image.image_id) + " has no error map" +
                                                        level_context(level));
            }
            auto part = classify_cells(*it, image.known, image.pseudo, stride(level));
            pooled.foreground.insert(pooled.foreground.end(), part.foreground.begin(), part.foreground.end());
            pooled.background.insert(pooled.background.end(), part.background.begin(), part.background.end());
        }
        if (pooled.foreground.empty() || pooled.background.empty()) {
            throw Error(ErrorCode::EmptySamples,
                        std::string(pooled.foreground.empty() ? "no foreground" : "no background") + " cells" +
                            level_context(level));
        }
        const auto level_seed = derive_seed(config.seed, static_cast<std::uint64_t>(level));
        const auto fg = subsample(pooled.foreground, config.max_samples, derive_seed(level_seed, 1));
        const auto bg = subsample(pooled.background, config.max_samples, derive_seed(level_seed, 2));
        WeibullPair pair;
        pair.level = level;
        try {
            pair.fg = fit_mle(fg, config.mle);
            pair.bg = fit_mle(bg, config.mle);
        } catch (const Error& e) {
            throw Error(e.code(), std::string(e.what()) + level_context(level));
        }
        pair.fg_sample_count = fg.size();
        pair.bg_sample_count = bg.size();
        pairs.push_back(pair);
    }
    return pairs;
}

nlohmann::json to_json(const WeibullPair& pair) {
    return {{"level", std::string(level_name(pair.level))},
            {"fg", to_json(pair.fg)},
            {"bg", to_json(pair.bg)},
            {"counts", {{"fg", pair.fg_sample_count}, {"bg", pair.bg_sample_count}}}};
}

WeibullPair weibull_pair_from_json(const nlohmann::json& j) {
    try {
        WeibullPair pair;
        pair.level = parse_level(j.at("level").get<std::string>());
        pair.fg = exp_weibull_from_json(j.at("fg"));
        pair.bg = exp_weibull_from_json(j.at("bg"));
        pair.fg_sample_count = j.at("counts").at("fg").get<std::size_t>();
        pair.bg_sample_count = j.at("counts").at("bg").get<std::size_t>();
        return pair;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("weibull pair: ") + e.what());
    }
}

}  // namespace rewod
