// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "rewod/autoencoder.hpp"
#include "rewod/feature_map.hpp"
#include "rewod/geometry.hpp"
#include "rewod/pyramid.hpp"
#include "rewod/weibull_fit.hpp"

namespace rewod {

struct LevelModel {
    Level level = Level::P3;
    SizeRange size_range{};
    Autoencoder autoencoder;
    WeibullPair weibull;
};

// Everything needed to turn a proposal into a soft label. Levels are kept in
// ascending order of size range.
struct RewModel {
    std::vector<LevelModel> levels;
    double gamma = 4.0;

    const LevelModel& level(Level l) const;
    bool has_level(Level l) const;
    void validate() const;
};

nlohmann::json to_json(const RewModel& model);
RewModel rew_model_from_json(const nlohmann::json& j);

struct LevelRange {
    Level level;
    SizeRange range;
};

std::vector<LevelRange> default_level_ranges();

// Level whose side-length band contains sqrt(area). Bands are treated as
// (min_side, max_side], the lowest band also takes everything below it and
// the highest everything above it.
Level route_level(const Box& box, std::span<const LevelRange> ranges);
Level route_level(const Box& box);

// Sampling of one RoIAlign bin. samples_per_axis = 0 selects
// max(8, ceil(2 * bin extent in cells)) per axis,
// i.e. at least two samples per cell.
struct RoiAlignOptions {
    int samples_per_axis = 0;
};

// Average of bilinearly interpolated error values over a bins_y x bins_x grid
// laid on the box (row-major result). Cell values sit at cell centres; sample
// positions are clamped to the span of cell centres. Throws OutsideMap when
// the box misses the map extent.
std::vector<double> roi_align(const ErrorMap& e, const Box& box, int stride, int bins_x, int bins_y,
                              const RoiAlignOptions& options = {});

double pooled_error(const ErrorMap& e, const Box& box, int stride, const RoiAlignOptions& options = {});

struct SoftLabel {
    double value = 0.0;
    bool underflow = false;  // both densities were exactly zero
};

// s = (f_kn / (f_bg + f_kn))^gamma, evaluated from log-densities.
SoftLabel soft_label(const WeibullPair& pair, double re, double gamma);

// Foreground posterior f_kn / (f_bg + f_kn), i.e. soft_label with gamma = 1.
double foreground_posterior(const WeibullPair& pair, double re);

enum class LabelFlag { Ok, DensityUnderflow, OutsideMap, MissingLevel };

std::string_view to_string(LabelFlag flag);
LabelFlag parse_label_flag(std::string_view name);

struct SoftLabeledProposal {
    Box box;
    double soft_label = 0.0;
    double pooled_error = 0.0;
    Level level = Level::P3;
    LabelFlag flag = LabelFlag::Ok;
};

// Scores each proposal against the image's error maps. Problems with a
// single proposal are reported through its flag (soft label 0), not thrown.
std::vector<SoftLabeledProposal> label_proposals(const RewModel& model, std::span<const ErrorMap> maps,
                                                 std::span<const Box> proposals,
                                                 const RoiAlignOptions& options = {});

// Error maps for every level of the model, computed from the given features.
std::vector<ErrorMap> compute_error_maps(const RewModel& model, std::span<const FeatureMap> features);

}  // namespace rewod
