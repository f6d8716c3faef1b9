// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <json.hpp>

#include "rewod/autoencoder.hpp"
#include "rewod/owod_eval.hpp"
#include "rewod/pseudo_label.hpp"
#include "rewod/pyramid.hpp"
#include "rewod/scenario.hpp"
#include "rewod/self_train.hpp"
#include "rewod/weibull_fit.hpp"

namespace rewod {

struct ReconstructorConfig {
    std::map<Level, int> latent_dims;
    std::map<Level, SizeRange> size_ranges;
    double learning_rate = 0.01;
    int epochs = 12;
    int batch_cells = 64;

    ReconstructorConfig();
};

// Every tunable of a pipeline run. All randomness derives from `seed`.
struct RunConfig {
    std::uint64_t seed = 0;
    ScenarioConfig scenario;
    ReconstructorConfig reconstructor;
    std::size_t weibull_max_samples = 100000;
    MleOptions mle;
    double gamma = 4.0;
    FilterConfig filter;
    SelfTrainConfig self_train;  // its filter is taken from `filter`
    EvalConfig evaluate;

    void validate() const;

    TrainConfig autoencoder_train(Level level) const;
    WeibullFitConfig weibull_fit() const;
};

// Missing keys keep their defaults; unknown keys are a Config error.
RunConfig run_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

// Reads a config file; an empty path gives the defaults.
RunConfig load_run_config(const std::string& path);

}  // namespace rewod
