// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/soft_label.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rewod/error.hpp"

namespace rewod {

namespace {

double bilinear(const ErrorMap& e, double u, double v) {
    u = std::clamp(u, 0.0, static_cast<double>(e.width() - 1));
    v = std::clamp(v, 0.0, static_cast<double>(e.height() - 1));
    const int c0 = static_cast<int>(std::floor(u));
    const int r0 = static_cast<int>(std::floor(v));
    const int c1 = std::min(c0 + 1, e.width() - 1);
    const int r1 = std::min(r0 + 1, e.height() - 1);
    const double fu = u - c0;
    const double fv = v - r0;
    return (1.0 - fv) * ((1.0 - fu) * e.at(r0, c0) + fu * e.at(r0, c1)) +
           fv * ((1.0 - fu) * e.at(r1, c0) + fu * e.at(r1, c1));
}

int samples_for(double extent_cells, int requested) {
    if (requested > 0) {
        return requested;
    }
    return std::max(8, static_cast<int>(std::ceil(2.0 * extent_cells)));
}

}  // namespace

const LevelModel& RewModel::level(Level l) const {
    for (const auto& m : levels) {
        if (m.level == l) {
            return m;
        }
    }
    throw Error(ErrorCode::MissingData, "model has no level " + std::string(level_name(l)));
}

bool RewModel::has_level(Level l) const {
    return std::any_of(levels.begin(), levels.end(), [&](const LevelModel& m) { return m.level == l; });
}

void RewModel::validate() const {
    if (levels.empty()) {
        throw Error(ErrorCode::InvalidArgument, "model has no levels");
    }
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
        const auto& m = levels[i];
        m.autoencoder.validate();
        if (m.autoencoder.level != m.level || m.weibull.level != m.level) {
            throw Error(ErrorCode::InvalidArgument, "level mismatch inside model entry");
        }
        if (!(m.size_range.min_side > 0.0 && m.size_range.min_side < m.size_range.max_side)) {
            throw Error(ErrorCode::InvalidArgument, "invalid size range");
        }
        if (i > 0 && levels[i - 1].size_range.max_side > m.size_range.min_side) {
            throw Error(ErrorCode::InvalidArgument, "size ranges must be ascending and non-overlapping");
        }
    }
}

nlohmann::json to_json(const RewModel& model) {
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& m : model.levels) {
        levels.push_back({{"level", std::string(level_name(m.level))},
                          {"size_range", {m.size_range.min_side, m.size_range.max_side}},
                          {"autoencoder", to_json(m.autoencoder)},
                          {"weibull", to_json(m.weibull)}});
    }
    return {{"format", "rewod-model-1"}, {"gamma", model.gamma}, {"levels", levels}};
}

RewModel rew_model_from_json(const nlohmann::json& j) {
    RewModel model;
    try {
        if (j.value("format", std::string()) != "rewod-model-1") {
            throw Error(ErrorCode::Parse, "not a rewod model (format tag missing)");
        }
        model.gamma = j.at("gamma").get<double>();
        for (const auto& entry : j.at("levels")) {
            LevelModel m;
            m.level = parse_level(entry.at("level").get<std::string>());
            const auto range = entry.at("size_range").get<std::vector<double>>();
            if (range.size() != 2) {
                throw Error(ErrorCode::Parse, "size_range must have two entries");
            }
            m.size_range = {range[0], range[1]};
            m.autoencoder = autoencoder_from_json(entry.at("autoencoder"));
            m.weibull = weibull_pair_from_json(entry.at("weibull"));
            model.levels.push_back(std::move(m));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("model: ") + e.what());
    }
    model.validate();
    return model;
}

std::vector<LevelRange> default_level_ranges() {
    std::vector<LevelRange> out;
    for (auto level : kAllLevels) {
        out.push_back({level, default_size_range(level)});
    }
    return out;
}

Level route_level(const Box& box, std::span<const LevelRange> ranges) {
    if (ranges.empty()) {
        throw Error(ErrorCode::InvalidArgument, "no level ranges to route into");
    }
    const double side = std::sqrt(area(box));
    for (const auto& r : ranges) {
        if (side <= r.range.max_side) {
            return r.level;
        }
    }
    return ranges.back().level;
}

Level route_level(const Box& box) {
    const auto ranges = default_level_ranges();
    return route_level(box, ranges);
}

std::vector<double> roi_align(const ErrorMap& e, const Box& box, int stride, int bins_x, int bins_y,
                              const RoiAlignOptions& options) {
    if (stride < 1 || bins_x < 1 || bins_y < 1) {
        throw Error(ErrorCode::InvalidArgument, "roi_align needs stride, bins >= 1");
    }
    const double extent_x = static_cast<double>(e.width()) * stride;
    const double extent_y = static_cast<double>(e.height()) * stride;
    if (box.right() <= 0.0 || box.bottom() <= 0.0 || box.x() >= extent_x || box.y() >= extent_y) {
        throw Error(ErrorCode::OutsideMap, "box lies entirely outside the " + std::string(level_name(e.level())) +
                                               " map extent");
    }
    const double x0 = box.x() / stride;
    const double y0 = box.y() / stride;
    const double bin_w = box.width() / stride / bins_x;
    const double bin_h = box.height() / stride / bins_y;
    const int nx = samples_for(bin_w, options.samples_per_axis);
    const int ny = samples_for(bin_h, options.samples_per_axis);

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(bins_x) * bins_y);
    for (int by = 0; by < bins_y; ++by) {
        for (int bx = 0; bx < bins_x; ++bx) {
            double sum = 0.0;
            for (int sy = 0; sy < ny; ++sy) {
                const double gy = y0 + bin_h * (by + (sy + 0.5) / ny);
                for (int sx = 0; sx < nx; ++sx) {
                    const double gx = x0 + bin_w * (bx + (sx + 0.5) / nx);
                    // Cell (r, c) has its value at grid position (c + 0.5, r + 0.5).
                    sum += bilinear(e, gx - 0.5, gy - 0.5);
                }
            }
            out.push_back(sum / (nx * ny));
        }
    }
    return out;
}

double pooled_error(const ErrorMap& e, const Box& box, int stride, const RoiAlignOptions& options) {
    return roi_align(e, box, stride, 1, 1, options).front();
}

SoftLabel soft_label(const WeibullPair& pair, double re, double gamma) {
    if (!(gamma > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "gamma must be > 0");
    }
    const double lf = log_pdf(pair.fg, re);
    const double lb = log_pdf(pair.bg, re);
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if ((lf == -kInf && lb == -kInf) || (lf == kInf && lb == kInf)) {
        return {0.0, true};
    }
    // f_kn / (f_kn + f_bg) = 1 / (1 + exp(lb - lf)); the log form is only
    // needed once the ratio itself underflows.
    const double d = lb - lf;
    if (d < 700.0) {
        return {std::clamp(std::pow(1.0 / (1.0 + std::exp(d)), gamma), 0.0, 1.0), false};
    }
    const double log_ratio = -d - std::log1p(std::exp(-d));
    return {std::clamp(std::exp(gamma * log_ratio), 0.0, 1.0), false};
}

double foreground_posterior(const WeibullPair& pair, double re) { return soft_label(pair, re, 1.0).value; }

std::string_view to_string(LabelFlag flag) {
    switch (flag) {
    case LabelFlag::Ok: return "ok";
    case LabelFlag::DensityUnderflow: return "density_underflow";
    case LabelFlag::OutsideMap: return "outside_map";
    case LabelFlag::MissingLevel: return "missing_level";
    }
    return "?";
}

LabelFlag parse_label_flag(std::string_view name) {
    for (auto flag : {LabelFlag::Ok, LabelFlag::DensityUnderflow, LabelFlag::OutsideMap, LabelFlag::MissingLevel}) {
        if (to_string(flag) == name) {
            return flag;
        }
    }
    throw Error(ErrorCode::Parse, "unknown label flag '" + std::string(name) + "'");
}

std::vector<SoftLabeledProposal> label_proposals(const RewModel& model, std::span<const ErrorMap> maps,
                                                 std::span<const Box> proposals, const RoiAlignOptions& options) {
    std::vector<LevelRange> ranges;
    for (const auto& m : model.levels) {
        ranges.push_back({m.level, m.size_range});
    }
    std::vector<SoftLabeledProposal> out;
    out.reserve(proposals.size());
    for (const auto& box : proposals) {
        SoftLabeledProposal p{box, 0.0, 0.0, route_level(box, ranges), LabelFlag::Ok};
        const auto map = std::find_if(maps.begin(), maps.end(), [&](const ErrorMap& e) { return e.level() == p.level; });
        if (map == maps.end()) {
            p.flag = LabelFlag::MissingLevel;
            out.push_back(p);
            continue;
        }
        try {
            p.pooled_error = pooled_error(*map, box, map->stride(), options);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::OutsideMap) {
                throw;
            }
            p.flag = LabelFlag::OutsideMap;
            out.push_back(p);
            continue;
        }
        const auto s = soft_label(model.level(p.level).weibull, p.pooled_error, model.gamma);
        p.soft_label = s.value;
        if (s.underflow) {
            p.flag = LabelFlag::DensityUnderflow;
        }
        out.push_back(p);
    }
    return out;
}

std::vector<ErrorMap> compute_error_maps(const RewModel& model, std::span<const FeatureMap> features) {
    std::vector<ErrorMap> out;
    for (const auto& m : model.levels) {
        const auto f = std::find_if(features.begin(), features.end(),
                                    [&](const FeatureMap& fm) { return fm.level() == m.level; });
        if (f == features.end()) {
            throw Error(ErrorCode::MissingData, "no feature map for level " + std::string(level_name(m.level)));
        }
        out.push_back(error_map(m.autoencoder, *f));
    }
    return out;
}

}  // namespace rewod
