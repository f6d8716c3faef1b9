// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/run_config.hpp"

#include "rewod/error.hpp"
#include "rewod/json_util.hpp"
#include "rewod/rng.hpp"

namespace rewod {

namespace {

constexpr std::uint64_t kAutoencoderStream = 10;
constexpr std::uint64_t kWeibullStream = 20;

}  // namespace

ReconstructorConfig::ReconstructorConfig() {
    for (Level l : kAllLevels) {
        latent_dims[l] = default_latent_dim(l);
        size_ranges[l] = default_size_range(l);
    }
}

void RunConfig::validate() const {
    scenario.validate();
    for (Level l : scenario.levels) {
        const auto it = reconstructor.latent_dims.find(l);
        if (it == reconstructor.latent_dims.end() || it->second < 1 || it->second >= scenario.channels) {
            throw Error(ErrorCode::Config, "reconstructor.latent_dims." + std::string(level_name(l)) +
                                               " must lie in [1, channels)");
        }
        const auto r = reconstructor.size_ranges.find(l);
        if (r == reconstructor.size_ranges.end() || !(r->second.min_side > 0.0) ||
            !(r->second.max_side > r->second.min_side)) {
            throw Error(ErrorCode::Config,
                        "reconstructor.size_ranges." + std::string(level_name(l)) + " must satisfy 0 < min < max");
        }
    }
    autoencoder_train(scenario.levels.front()).validate();
    if (weibull_max_samples < mle.min_samples) {
        throw Error(ErrorCode::Config, "weibull.max_samples must be >= weibull.min_samples");
    }
    if (!(mle.tolerance > 0.0) || mle.max_iterations < 1 || !(mle.sample_floor > 0.0)) {
        throw Error(ErrorCode::Config, "weibull optimizer settings must be positive");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorCode::Config, "soft_label.gamma must be positive");
    }
    filter.validate();
    self_train.validate();
    if (!(evaluate.iou_threshold > 0.0 && evaluate.iou_threshold <= 1.0)) {
        throw Error(ErrorCode::Config, "evaluate.iou_threshold must lie in (0, 1]");
    }
    for (int k : evaluate.recall_ks) {
        if (k < 1) {
            throw Error(ErrorCode::Config, "evaluate.recall_ks entries must be >= 1");
        }
    }
}

TrainConfig RunConfig::autoencoder_train(Level level) const {
    TrainConfig t;
    t.learning_rate = reconstructor.learning_rate;
    t.epochs = reconstructor.epochs;
    t.batch_cells = reconstructor.batch_cells;
    t.seed = derive_seed(seed, kAutoencoderStream + static_cast<std::uint64_t>(level));
    return t;
}

WeibullFitConfig RunConfig::weibull_fit() const {
    return {weibull_max_samples, derive_seed(seed, kWeibullStream), mle};
}

RunConfig run_config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    StrictObject obj(j, "config");
    obj.get("seed", cfg.seed);
    if (const auto* s = obj.child("scenario")) {
        cfg.scenario = scenario_config_from_json(*s);
    }
    if (const auto* r = obj.child("reconstructor")) {
        StrictObject sub(*r, "reconstructor");
        if (const auto* dims = sub.child("latent_dims")) {
            StrictObject d(*dims, "reconstructor.latent_dims");
            for (Level l : kAllLevels) {
                d.get(std::string(level_name(l)).c_str(), cfg.reconstructor.latent_dims[l]);
            }
            d.finish();
        }
        if (const auto* ranges = sub.child("size_ranges")) {
            StrictObject d(*ranges, "reconstructor.size_ranges");
            for (Level l : kAllLevels) {
                std::array<double, 2> v{cfg.reconstructor.size_ranges[l].min_side,
                                        cfg.reconstructor.size_ranges[l].max_side};
                d.get(std::string(level_name(l)).c_str(), v);
                cfg.reconstructor.size_ranges[l] = {v[0], v[1]};
            }
            d.finish();
        }
        sub.get("learning_rate", cfg.reconstructor.learning_rate);
        sub.get("epochs", cfg.reconstructor.epochs);
        sub.get("batch_cells", cfg.reconstructor.batch_cells);
        sub.finish();
    }
    if (const auto* w = obj.child("weibull")) {
        StrictObject sub(*w, "weibull");
        sub.get("max_samples", cfg.weibull_max_samples);
        sub.get("min_samples", cfg.mle.min_samples);
        sub.get("sample_floor", cfg.mle.sample_floor);
        sub.get("max_iterations", cfg.mle.max_iterations);
        sub.get("tolerance", cfg.mle.tolerance);
        sub.finish();
    }
    if (const auto* s = obj.child("soft_label")) {
        StrictObject sub(*s, "soft_label");
        sub.get("gamma", cfg.gamma);
        sub.finish();
    }
    if (const auto* f = obj.child("filter")) {
        cfg.filter = filter_config_from_json(*f);
    }
    if (const auto* s = obj.child("self_train")) {
        cfg.self_train = self_train_config_from_json(*s);
    }
    cfg.self_train.filter = cfg.filter;
    if (const auto* e = obj.child("evaluate")) {
        StrictObject sub(*e, "evaluate");
        sub.get("iou_threshold", cfg.evaluate.iou_threshold);
        sub.get("unknown_score_threshold", cfg.evaluate.unknown_score_threshold);
        sub.get("recall_ks", cfg.evaluate.recall_ks);
        sub.get("unique_matching", cfg.evaluate.unique_matching);
        sub.finish();
    }
    obj.finish();
    cfg.validate();
    return cfg;
}

nlohmann::json to_json(const RunConfig& cfg) {
    nlohmann::json dims = nlohmann::json::object();
    nlohmann::json ranges = nlohmann::json::object();
    for (Level l : kAllLevels) {
        dims[std::string(level_name(l))] = cfg.reconstructor.latent_dims.at(l);
        const auto& r = cfg.reconstructor.size_ranges.at(l);
        ranges[std::string(level_name(l))] = {r.min_side, r.max_side};
    }
    return {{"seed", cfg.seed},
            {"scenario", to_json(cfg.scenario)},
            {"reconstructor",
             {{"latent_dims", dims},
              {"size_ranges", ranges},
              {"learning_rate", cfg.reconstructor.learning_rate},
              {"epochs", cfg.reconstructor.epochs},
              {"batch_cells", cfg.reconstructor.batch_cells}}},
            {"weibull",
             {{"max_samples", cfg.weibull_max_samples},
              {"min_samples", cfg.mle.min_samples},
              {"sample_floor", cfg.mle.sample_floor},
              {"max_iterations", cfg.mle.max_iterations},
              {"tolerance", cfg.mle.tolerance}}},
            {"soft_label", {{"gamma", cfg.gamma}}},
            {"filter", to_json(cfg.filter)},
            {"self_train", to_json(cfg.self_train)},
            {"evaluate",
             {{"iou_threshold", cfg.evaluate.iou_threshold},
              {"unknown_score_threshold", cfg.evaluate.unknown_score_threshold},
              {"recall_ks", cfg.evaluate.recall_ks},
              {"unique_matching", cfg.evaluate.unique_matching}}}};
}

RunConfig load_run_config(const std::string& path) {
    if (path.empty()) {
        RunConfig cfg;
        cfg.validate();
        return cfg;
    }
    return run_config_from_json(read_json_file(path));
}

}  // namespace rewod
