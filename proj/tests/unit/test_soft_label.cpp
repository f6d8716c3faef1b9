// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <cmath>
#include <iostream>

#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "rewod/rng.hpp"
#include "rewod/soft_label.hpp"

namespace rewod {
namespace {

// Bilinear surface through cell centres, flat beyond the outermost centres.
double surface(const ErrorMap& e, double px, double py) {
    const double u = std::clamp(px / e.stride() - 0.5, 0.0, e.width() - 1.0);
    const double v = std::clamp(py / e.stride() - 0.5, 0.0, e.height() - 1.0);
    const int c = std::min(static_cast<int>(u), e.width() - 2 < 0 ? 0 : e.width() - 2);
    const int r = std::min(static_cast<int>(v), e.height() - 2 < 0 ? 0 : e.height() - 2);
    const int c1 = std::min(c + 1, e.width() - 1);
    const int r1 = std::min(r + 1, e.height() - 1);
    const double fu = u - c;
    const double fv = v - r;
    return e.at(r, c) * (1 - fu) * (1 - fv) + e.at(r, c1) * fu * (1 - fv) + e.at(r1, c) * (1 - fu) * fv +
           e.at(r1, c1) * fu * fv;
}

double monte_carlo_pool(const ErrorMap& e, const Box& b, Rng& rng, int n) {
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        sum += surface(e, b.x() + rng.uniform() * b.width(), b.y() + rng.uniform() * b.height());
    }
    return sum / n;
}

WeibullPair pair_for_tests() {
    return WeibullPair{Level::P3, ExpWeibull{2.0, 1.5, 3.0}, ExpWeibull{1.5, 2.0, 1.0}, 100, 100};
}

LevelModel level_model(Level l, SizeRange r, const WeibullPair& w) {
    LevelModel m;
    m.level = l;
    m.size_range = r;
    m.autoencoder = Autoencoder::initialize(l, 4, 2, 0);
    m.weibull = w;
    m.weibull.level = l;
    return m;
}

TEST(RouteLevel, Examples) {
    EXPECT_EQ(route_level(Box(0, 0, 50, 50)), Level::P3);
    EXPECT_EQ(route_level(Box(0, 0, 300, 300)), Level::P6);
    EXPECT_EQ(route_level(Box(0, 0, 10, 10)), Level::P3);
    EXPECT_EQ(route_level(Box(0, 0, 2000, 2000)), Level::P6);
    // Band edges belong to the lower level.
    EXPECT_EQ(route_level(Box(0, 0, 64, 64)), Level::P3);
    EXPECT_EQ(route_level(Box(0, 0, 64.5, 64.5)), Level::P4);
    EXPECT_EQ(route_level(Box(0, 0, 32, 128)), Level::P3);  // side sqrt(area) = 64
}

TEST(PooledError, ConstantField) {
    const ErrorMap e(Level::P3, 6, 7, std::vector<double>(42, 3.7));
    for (const Box& b : {Box(3, 5, 20, 11), Box(0, 0, 56, 48), Box(40, 1, 3, 3)}) {
        EXPECT_NEAR(pooled_error(e, b, 8), 3.7, 1e-12);
        EXPECT_NEAR(pooled_error(e, b, 8, RoiAlignOptions{2}), 3.7, 1e-12);
    }
}

TEST(PooledError, SingleCellInConstantNeighbourhood) {
    std::vector<double> v(25, 1.0);
    for (int r = 1; r <= 3; ++r)
        for (int c = 1; c <= 3; ++c) v[static_cast<std::size_t>(r * 5 + c)] = 5.0;
    const ErrorMap e(Level::P4, 5, 5, v);
    EXPECT_NEAR(pooled_error(e, Box(32, 32, 16, 16), 16), 5.0, 1e-12);
}

TEST(PooledError, OutsideMapIsAnError) {
    const ErrorMap e(Level::P3, 4, 4, std::vector<double>(16, 1.0));
    REWOD_EXPECT_ERROR(pooled_error(e, Box(40, 0, 10, 10), 8), ErrorCode::OutsideMap);
    REWOD_EXPECT_ERROR(pooled_error(e, Box(-20, -20, 20, 20), 8), ErrorCode::OutsideMap);
    EXPECT_NO_THROW(pooled_error(e, Box(-5, -5, 10, 10), 8));
}

// Dense Monte-Carlo integration of the bilinear surface over the box. The
// fixed 2 x 2 sampling is measured alongside and reported, not asserted.
TEST(PooledError, MatchesMonteCarloOracle) {
    Rng rng(31);
    int fixed_misses = 0;
    double worst = 0.0;
    constexpr int kTrials = 1000;
    for (int t = 0; t < kTrials; ++t) {
        const int h = 4 + static_cast<int>(rng.index(12));
        const int w = 4 + static_cast<int>(rng.index(12));
        std::vector<double> v(static_cast<std::size_t>(h * w));
        for (auto& x : v) x = rng.uniform(0.5, 10.0);
        const ErrorMap e(Level::P3, h, w, v);
        const double bw = rng.uniform(4.0, 8.0 * w);
        const double bh = rng.uniform(4.0, 8.0 * h);
        const Box b(rng.uniform(0, 8.0 * w - bw), rng.uniform(0, 8.0 * h - bh), bw, bh);
        const double want = monte_carlo_pool(e, b, rng, 10000);
        EXPECT_NEAR(pooled_error(e, b, 8), want, 0.02 * want) << "trial " << t;
        worst = std::max(worst, std::abs(pooled_error(e, b, 8) - want) / want);
        const double fixed = pooled_error(e, b, 8, RoiAlignOptions{2});
        fixed_misses += std::abs(fixed - want) > 0.02 * want ? 1 : 0;
    }
    RecordProperty("fixed_2x2_misses", fixed_misses);
    std::cout << "[info] worst relative error " << worst << "\n";
    std::cout << "[info] 2x2 sampling outside 2% on " << fixed_misses << " of " << kTrials << " boxes\n";
}

TEST(RoiAlign, BinsAverageToPooledValue) {
    Rng rng(2);
    std::vector<double> v(64);
    for (auto& x : v) x = rng.uniform(0, 3);
    const ErrorMap e(Level::P3, 8, 8, v);
    const Box b(5, 9, 40, 30);
    const auto bins = roi_align(e, b, 8, 3, 3, RoiAlignOptions{6});
    ASSERT_EQ(bins.size(), 9u);
    double mean = 0;
    for (double x : bins) mean += x / 9.0;
    EXPECT_NEAR(mean, pooled_error(e, b, 8, RoiAlignOptions{18}), 1e-12);
}

TEST(SoftLabel, EqualDensitiesGiveHalfToTheGamma) {
    WeibullPair same{Level::P3, ExpWeibull{1.3, 0.9, 2.0}, ExpWeibull{1.3, 0.9, 2.0}, 100, 100};
    for (double re : {0.01, 0.5, 3.0, 40.0}) {
        EXPECT_EQ(soft_label(same, re, 4.0).value, 0.0625);
    }
}

TEST(SoftLabel, MatchesRatioFormula) {
    const auto p = pair_for_tests();
    for (double re : {0.2, 0.8, 1.5, 3.0, 6.0}) {
        const double fk = pdf(p.fg, re);
        const double fb = pdf(p.bg, re);
        for (double g : {0.25, 1.0, 4.0, 10.0}) {
            EXPECT_NEAR(soft_label(p, re, g).value, std::pow(fk / (fk + fb), g), 1e-12);
        }
    }
}

TEST(SoftLabel, MonotoneInRatioAndGamma) {
    // Foreground density fixed, background scale varied: the ratio grows as
    // the background mass moves away from re.
    for (double g : {0.5, 1.0, 4.0}) {
        double prev = -1.0;
        for (double re = 0.05; re < 10.0; re += 0.05) {
            // Exponential fg (rate 1) against exponential bg (rate 3): the
            // ratio exp(2 re) / 3 rises with re.
            const WeibullPair p{Level::P3, ExpWeibull{1, 1, 1}, ExpWeibull{1, 1, 1.0 / 3.0}, 100, 100};
            const double s = soft_label(p, re, g).value;
            EXPECT_GE(s, prev);
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, 1.0);
            prev = s;
        }
    }
    const auto p = pair_for_tests();
    for (double re : {0.3, 1.0, 2.0}) {
        double prev = 2.0;
        for (double g = 0.1; g < 20; g *= 1.5) {
            const double s = soft_label(p, re, g).value;
            EXPECT_LE(s, prev);
            prev = s;
        }
    }
}

TEST(SoftLabel, RejectsBadGammaAndFlagsUnderflow) {
    const auto p = pair_for_tests();
    REWOD_EXPECT_ERROR(soft_label(p, 1.0, 0.0), ErrorCode::InvalidArgument);
    const WeibullPair narrow{Level::P3, ExpWeibull{1, 8, 1}, ExpWeibull{1, 8, 1.1}, 100, 100};
    // Log densities stay finite far into the tail; only once t^c overflows do
    // both densities vanish together.
    EXPECT_FALSE(soft_label(narrow, 1e6, 4.0).underflow);
    EXPECT_EQ(soft_label(narrow, 1e6, 4.0).value, 0.0);
    const auto s = soft_label(narrow, 1e40, 4.0);
    EXPECT_TRUE(s.underflow);
    EXPECT_EQ(s.value, 0.0);
}

TEST(LabelProposals, EmptyAndFlags) {
    RewModel model;
    model.levels = {level_model(Level::P3, {32, 64}, pair_for_tests()),
                    level_model(Level::P4, {64, 128}, pair_for_tests())};
    const std::vector<ErrorMap> maps = {ErrorMap(Level::P3, 8, 8, std::vector<double>(64, 1.0))};
    EXPECT_TRUE(label_proposals(model, maps, {}).empty());

    const std::vector<Box> boxes = {Box(0, 0, 40, 40), Box(0, 0, 100, 100), Box(500, 500, 40, 40)};
    const auto out = label_proposals(model, maps, boxes);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[0].flag, LabelFlag::Ok);
    EXPECT_EQ(out[0].level, Level::P3);
    EXPECT_EQ(out[1].flag, LabelFlag::MissingLevel);
    EXPECT_EQ(out[2].flag, LabelFlag::OutsideMap);
    EXPECT_EQ(out[2].soft_label, 0.0);
    for (auto f : {LabelFlag::Ok, LabelFlag::DensityUnderflow, LabelFlag::OutsideMap, LabelFlag::MissingLevel}) {
        EXPECT_EQ(parse_label_flag(to_string(f)), f);
    }
}

TEST(LabelProposals, PermutationEquivariant) {
    RewModel model;
    model.levels = {level_model(Level::P3, {32, 64}, pair_for_tests())};
    Rng rng(8);
    std::vector<double> v(400);
    for (auto& x : v) x = rng.uniform(0.1, 5.0);
    const std::vector<ErrorMap> maps = {ErrorMap(Level::P3, 20, 20, v)};
    std::vector<Box> boxes;
    for (int i = 0; i < 30; ++i) boxes.emplace_back(rng.uniform(0, 100), rng.uniform(0, 100), rng.uniform(8, 60), rng.uniform(8, 60));
    const auto base = label_proposals(model, maps, boxes);
    std::vector<std::size_t> perm(boxes.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    rng.shuffle(perm);
    std::vector<Box> shuffled;
    for (auto i : perm) shuffled.push_back(boxes[i]);
    const auto out = label_proposals(model, maps, shuffled);
    for (std::size_t k = 0; k < perm.size(); ++k) {
        EXPECT_EQ(out[k].soft_label, base[perm[k]].soft_label);
        EXPECT_EQ(out[k].pooled_error, base[perm[k]].pooled_error);
    }
}

TEST(RewModel, JsonRoundTripAndValidation) {
    RewModel model;
    model.levels = {level_model(Level::P3, {32, 64}, pair_for_tests()),
                    level_model(Level::P4, {64, 128}, pair_for_tests())};
    model.gamma = 2.5;
    const auto back = rew_model_from_json(nlohmann::json::parse(to_json(model).dump()));
    EXPECT_EQ(to_json(back), to_json(model));
    std::swap(model.levels[0], model.levels[1]);
    REWOD_EXPECT_ERROR(model.validate(), ErrorCode::InvalidArgument);
    REWOD_EXPECT_ERROR(rew_model_from_json(nlohmann::json::object()), ErrorCode::Parse);
}

}  // namespace
}  // namespace rewod
