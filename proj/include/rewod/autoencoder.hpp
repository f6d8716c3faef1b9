// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "rewod/feature_map.hpp"
#include "rewod/pyramid.hpp"

namespace rewod {

// Per-cell linear autoencoder: z = We x + be, x_rec = Wd z + bd.
// Equivalent to one 1x1 convolution for the encoder and one for the decoder.
struct Autoencoder {
    Level level = Level::P3;
    Eigen::MatrixXd encoder_weights;  // latent x input
    Eigen::VectorXd encoder_bias;     // latent
    Eigen::MatrixXd decoder_weights;  // input x latent
    Eigen::VectorXd decoder_bias;     // input

    int input_dim() const { return static_cast<int>(encoder_weights.cols()); }
    int latent_dim() const { return static_cast<int>(encoder_weights.rows()); }

    // Weights uniform in +-1/sqrt(input_dim) drawn from Rng(seed), encoder
    // row-major first and then decoder row-major; biases start at zero.
    static Autoencoder initialize(Level level, int input_dim, int latent_dim, std::uint64_t seed);

    void validate() const;
};

// Gradient (or any other parameter-shaped quantity) of an Autoencoder.
struct AutoencoderGradient {
    Eigen::MatrixXd encoder_weights;
    Eigen::VectorXd encoder_bias;
    Eigen::MatrixXd decoder_weights;
    Eigen::VectorXd decoder_bias;

    double squared_norm() const;
};

struct TrainConfig {
    double learning_rate = 0.01;
    int epochs = 12;
    int batch_cells = 64;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainReport {
    double initial_loss = 0.0;
    std::vector<double> epoch_loss;  // full-data loss after each epoch
    int best_epoch = 0;              // 0 means the initial parameters were kept
    double final_loss = 0.0;
};

FeatureMap reconstruct(const Autoencoder& ae, const FeatureMap& f);

// Mean over cells of the l2 norm of the per-cell residual.
double reconstruction_loss(const Autoencoder& ae, const FeatureMap& f);
double reconstruction_loss(const Autoencoder& ae, std::span<const FeatureMap> maps);

// Exact gradient of reconstruction_loss. Cells with a zero residual
// contribute the zero subgradient.
AutoencoderGradient loss_gradient(const Autoencoder& ae, const FeatureMap& f);

ErrorMap error_map(const Autoencoder& ae, const FeatureMap& f);

// Mini-batch SGD over the cells of `maps`, reshuffled every epoch with a
// generator seeded from cfg.seed. The parameters with the lowest full-data
// loss among the start point and every epoch end are returned.
Autoencoder train(const Autoencoder& ae, std::span<const FeatureMap> maps, const TrainConfig& cfg,
                  TrainReport* report = nullptr);

nlohmann::json to_json(const Autoencoder& ae);
Autoencoder autoencoder_from_json(const nlohmann::json& j);

}  // namespace rewod
