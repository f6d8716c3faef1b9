// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "rewod/pyramid.hpp"

namespace rewod {

// Dense H x W x C feature grid at one pyramid level, row-major with the
// channel index fastest.
class FeatureMap {
public:
    FeatureMap(Level level, int height, int width, int channels, std::vector<float> data);

    Level level() const { return level_; }
    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }
    int stride() const { return rewod::stride(level_); }
    std::size_t cell_count() const { return static_cast<std::size_t>(height_) * width_; }

    std::span<const float> data() const { return data_; }
    std::span<const float> cell(int row, int col) const;
    std::span<const float> cell(std::size_t index) const;

private:
    Level level_;
    int height_;
    int width_;
    int channels_;
    std::vector<float> data_;
};

// Per-cell reconstruction error grid.
class ErrorMap {
public:
    ErrorMap(Level level, int height, int width, std::vector<double> data);

    Level level() const { return level_; }
    int height() const { return height_; }
    int width() const { return width_; }
    int stride() const { return rewod::stride(level_); }

    double at(int row, int col) const { return data_[static_cast<std::size_t>(row) * width_ + col]; }
    std::span<const double> data() const { return data_; }
    double mean() const;

private:
    Level level_;
    int height_;
    int width_;
    std::vector<double> data_;
};

// "RFM1" container: 4 magic bytes, five little-endian u32 header fields
// (level code, H, W, C, stride), then H*W*C little-endian IEEE-754 binary32
// values in row-major, channel-fastest order.
void write_feature_map(const FeatureMap& map, const std::filesystem::path& path);
FeatureMap read_feature_map(const std::filesystem::path& path);

std::vector<unsigned char> encode_feature_map(const FeatureMap& map);
FeatureMap decode_feature_map(std::span<const unsigned char> bytes);

}  // namespace rewod
