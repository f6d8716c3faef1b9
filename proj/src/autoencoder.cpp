// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/autoencoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rewod/error.hpp"
#include "rewod/rng.hpp"

namespace rewod {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_compatible(const Autoencoder& ae, const FeatureMap& f) {
    if (f.channels() != ae.input_dim()) {
        throw Error(ErrorCode::DimensionMismatch, "feature map has " + std::to_string(f.channels()) +
                                                      " channels, autoencoder expects " +
                                                      std::to_string(ae.input_dim()));
    }
    if (f.level() != ae.level) {
        throw Error(ErrorCode::DimensionMismatch, "feature map level " + std::string(level_name(f.level())) +
                                                      " does not match autoencoder level " +
                                                      std::string(level_name(ae.level)));
    }
}

// C x N matrix of cells, one column per cell.
MatrixXd cells_as_columns(const FeatureMap& f) {
    const auto data = f.data();
    MatrixXd x(f.channels(), static_cast<Eigen::Index>(f.cell_count()));
    for (Eigen::Index n = 0; n < x.cols(); ++n) {
        for (Eigen::Index c = 0; c < x.rows(); ++c) {
            x(c, n) = data[static_cast<std::size_t>(n * x.rows() + c)];
        }
    }
    return x;
}

MatrixXd residuals(const Autoencoder& ae, const MatrixXd& x) {
    MatrixXd z = ae.encoder_weights * x;
    z.colwise() += ae.encoder_bias;
    MatrixXd r = ae.decoder_weights * z;
    r.colwise() += ae.decoder_bias;
    r -= x;
    return r;
}

double mean_residual_norm(const Autoencoder& ae, const MatrixXd& x) {
    if (x.cols() == 0) {
        return 0.0;
    }
    return residuals(ae, x).colwise().norm().sum() / static_cast<double>(x.cols());
}

// Gradient of the mean residual norm over the columns of x.
AutoencoderGradient batch_gradient(const Autoencoder& ae, const MatrixXd& x) {
    MatrixXd z = ae.encoder_weights * x;
    z.colwise() += ae.encoder_bias;
    MatrixXd r = ae.decoder_weights * z;
    r.colwise() += ae.decoder_bias;
    r -= x;
    const double inv_n = 1.0 / static_cast<double>(x.cols());
    for (Eigen::Index n = 0; n < r.cols(); ++n) {
        const double norm = r.col(n).norm();
        if (norm > 0.0) {
            r.col(n) *= inv_n / norm;
        } else {
            r.col(n).setZero();
        }
    }
    AutoencoderGradient g;
    g.decoder_weights = r * z.transpose();
    g.decoder_bias = r.rowwise().sum();
    const MatrixXd gz = ae.decoder_weights.transpose() * r;
    g.encoder_weights = gz * x.transpose();
    g.encoder_bias = gz.rowwise().sum();
    return g;
}

bool all_finite(const Autoencoder& ae) {
    return ae.encoder_weights.allFinite() && ae.encoder_bias.allFinite() && ae.decoder_weights.allFinite() &&
           ae.decoder_bias.allFinite();
}

std::vector<double> flatten(const MatrixXd& m) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            out.push_back(m(r, c));
        }
    }
    return out;
}

MatrixXd unflatten(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (v.size() != static_cast<std::size_t>(rows * cols)) {
        throw Error(ErrorCode::Parse, std::string(name) + " has the wrong number of entries");
    }
    MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = v[static_cast<std::size_t>(r * cols + c)];
        }
    }
    return m;
}

}  // namespace

Autoencoder Autoencoder::initialize(Level level, int input_dim, int latent_dim, std::uint64_t seed) {
    if (input_dim < 1 || latent_dim < 1 || latent_dim >= input_dim) {
        throw Error(ErrorCode::InvalidArgument, "autoencoder needs 1 <= latent_dim < input_dim");
    }
    Rng rng(seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
    Autoencoder ae;
    ae.level = level;
    ae.encoder_weights.resize(latent_dim, input_dim);
    ae.decoder_weights.resize(input_dim, latent_dim);
    for (Eigen::Index r = 0; r < ae.encoder_weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < ae.encoder_weights.cols(); ++c) {
            ae.encoder_weights(r, c) = rng.uniform(-bound, bound);
        }
    }
    for (Eigen::Index r = 0; r < ae.decoder_weights.rows(); ++r) {
        for (Eigen::Index c = 0; c < ae.decoder_weights.cols(); ++c) {
            ae.decoder_weights(r, c) = rng.uniform(-bound, bound);
        }
    }
    ae.encoder_bias = VectorXd::Zero(latent_dim);
    ae.decoder_bias = VectorXd::Zero(input_dim);
    return ae;
}

void Autoencoder::validate() const {
    const auto latent = encoder_weights.rows();
    const auto input = encoder_weights.cols();
    if (latent < 1 || input < 1 || encoder_bias.size() != latent || decoder_weights.rows() != input ||
        decoder_weights.cols() != latent || decoder_bias.size() != input) {
        throw Error(ErrorCode::DimensionMismatch, "inconsistent autoencoder parameter shapes");
    }
    if (!all_finite(*this)) {
        throw Error(ErrorCode::NonFinite, "autoencoder has non-finite parameters");
    }
}

double AutoencoderGradient::squared_norm() const {
    return encoder_weights.squaredNorm() + encoder_bias.squaredNorm() + decoder_weights.squaredNorm() +
           decoder_bias.squaredNorm();
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorCode::InvalidArgument, "learning_rate must be > 0");
    }
    if (epochs < 1) {
        throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
    }
    if (batch_cells < 1) {
        throw Error(ErrorCode::InvalidArgument, "batch_cells must be >= 1");
    }
}

FeatureMap reconstruct(const Autoencoder& ae, const FeatureMap& f) {
    check_compatible(ae, f);
    const MatrixXd x = cells_as_columns(f);
    const MatrixXd rec = residuals(ae, x) + x;
    std::vector<float> data;
    data.reserve(f.data().size());
    for (Eigen::Index n = 0; n < rec.cols(); ++n) {
        for (Eigen::Index c = 0; c < rec.rows(); ++c) {
            data.push_back(static_cast<float>(rec(c, n)));
        }
    }
    return FeatureMap(f.level(), f.height(), f.width(), f.channels(), std::move(data));
}

double reconstruction_loss(const Autoencoder& ae, const FeatureMap& f) {
    check_compatible(ae, f);
    return mean_residual_norm(ae, cells_as_columns(f));
}

double reconstruction_loss(const Autoencoder& ae, std::span<const FeatureMap> maps) {
    double total = 0.0;
    std::size_t cells = 0;
    for (const auto& f : maps) {
        check_compatible(ae, f);
        total += residuals(ae, cells_as_columns(f)).colwise().norm().sum();
        cells += f.cell_count();
    }
    return cells == 0 ? 0.0 : total / static_cast<double>(cells);
}

AutoencoderGradient loss_gradient(const Autoencoder& ae, const FeatureMap& f) {
    check_compatible(ae, f);
    return batch_gradient(ae, cells_as_columns(f));
}

ErrorMap error_map(const Autoencoder& ae, const FeatureMap& f) {
    check_compatible(ae, f);
    const VectorXd norms = residuals(ae, cells_as_columns(f)).colwise().norm().transpose();
    return ErrorMap(f.level(), f.height(), f.width(), std::vector<double>(norms.data(), norms.data() + norms.size()));
}

Autoencoder train(const Autoencoder& ae, std::span<const FeatureMap> maps, const TrainConfig& cfg,
                  TrainReport* report) {
    cfg.validate();
    ae.validate();
    std::size_t total_cells = 0;
    for (const auto& f : maps) {
        check_compatible(ae, f);
        total_cells += f.cell_count();
    }
    if (total_cells == 0) {
        throw Error(ErrorCode::MissingData, "no training cells");
    }
    MatrixXd x(ae.input_dim(), static_cast<Eigen::Index>(total_cells));
    Eigen::Index col = 0;
    for (const auto& f : maps) {
        const MatrixXd part = cells_as_columns(f);
        x.middleCols(col, part.cols()) = part;
        col += part.cols();
    }

    TrainReport local;
    local.initial_loss = mean_residual_norm(ae, x);
    Autoencoder current = ae;
    Autoencoder best = ae;
    double best_loss = local.initial_loss;

    Rng rng(cfg.seed);
    std::vector<Eigen::Index> order(total_cells);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto batch = static_cast<std::size_t>(cfg.batch_cells);
    MatrixXd xb(ae.input_dim(), static_cast<Eigen::Index>(std::min(batch, total_cells)));

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        for (std::size_t start = 0; start < total_cells; start += batch) {
            const std::size_t n = std::min(batch, total_cells - start);
            if (xb.cols() != static_cast<Eigen::Index>(n)) {
                xb.resize(ae.input_dim(), static_cast<Eigen::Index>(n));
            }
            for (std::size_t k = 0; k < n; ++k) {
                xb.col(static_cast<Eigen::Index>(k)) = x.col(order[start + k]);
            }
            const auto g = batch_gradient(current, xb);
            current.encoder_weights -= cfg.learning_rate * g.encoder_weights;
            current.encoder_bias -= cfg.learning_rate * g.encoder_bias;
            current.decoder_weights -= cfg.learning_rate * g.decoder_weights;
            current.decoder_bias -= cfg.learning_rate * g.decoder_bias;
        }
        const double loss = mean_residual_norm(current, x);
        if (!std::isfinite(loss) || !all_finite(current)) {
            throw Error(ErrorCode::TrainingDiverged, "loss became non-finite in epoch " + std::to_string(epoch) +
                                                         " (" + std::string(level_name(ae.level)) + ")");
        }
        local.epoch_loss.push_back(loss);
        if (loss < best_loss) {
            best_loss = loss;
            best = current;
            local.best_epoch = epoch;
        }
    }
    local.final_loss = best_loss;
    if (report != nullptr) {
        *report = std::move(local);
    }
    return best;
}

nlohmann::json to_json(const Autoencoder& ae) {
    return {{"level", std::string(level_name(ae.level))},
            {"input_dim", ae.input_dim()},
            {"latent_dim", ae.latent_dim()},
            {"encoder_weights", flatten(ae.encoder_weights)},
            {"encoder_bias", std::vector<double>(ae.encoder_bias.data(), ae.encoder_bias.data() + ae.encoder_bias.size())},
            {"decoder_weights", flatten(ae.decoder_weights)},
            {"decoder_bias", std::vector<double>(ae.decoder_bias.data(), ae.decoder_bias.data() + ae.decoder_bias.size())}};
}

Autoencoder autoencoder_from_json(const nlohmann::json& j) {
    try {
        Autoencoder ae;
        ae.level = parse_level(j.at("level").get<std::string>());
        const auto input = j.at("input_dim").get<Eigen::Index>();
        const auto latent = j.at("latent_dim").get<Eigen::Index>();
        if (input < 1 || latent < 1) {
            throw Error(ErrorCode::Parse, "autoencoder dimensions must be >= 1");
        }
        ae.encoder_weights = unflatten(j.at("encoder_weights").get<std::vector<double>>(), latent, input, "encoder_weights");
        ae.decoder_weights = unflatten(j.at("decoder_weights").get<std::vector<double>>(), input, latent, "decoder_weights");
        const auto eb = j.at("encoder_bias").get<std::vector<double>>();
        const auto db = j.at("decoder_bias").get<std::vector<double>>();
        if (eb.size() != static_cast<std::size_t>(latent) || db.size() != static_cast<std::size_t>(input)) {
            throw Error(ErrorCode::Parse, "autoencoder bias length mismatch");
        }
        ae.encoder_bias = Eigen::Map<const VectorXd>(eb.data(), latent);
        ae.decoder_bias = Eigen::Map<const VectorXd>(db.data(), input);
        ae.validate();
        return ae;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("autoencoder: ") + e.what());
    }
}

}  // namespace rewod
