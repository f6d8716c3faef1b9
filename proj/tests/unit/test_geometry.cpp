// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rewod/error.hpp"
#include "rewod/geometry.hpp"
#include "rewod/rng.hpp"

namespace rewod {
namespace {

TEST(Box, RejectsDegenerateAndNonFinite) {
    EXPECT_THROW(Box(0, 0, 0, 1), Error);
    EXPECT_THROW(Box(0, 0, 1, -1), Error);
    EXPECT_THROW(Box(std::nan(""), 0, 1, 1), Error);
    EXPECT_THROW(Box(0, 0, std::numeric_limits<double>::infinity(), 1), Error);
    EXPECT_NO_THROW(Box(-5, -5, 1, 1));
}

TEST(Box, CornerFormMatches) {
    const Box b = Box::from_corners(2, 3, 12, 8);
    EXPECT_EQ(b, Box(2, 3, 10, 5));
    EXPECT_DOUBLE_EQ(b.right(), 12);
    EXPECT_DOUBLE_EQ(b.bottom(), 8);
}

TEST(Iou, Examples) {
    const Box b(3, 4, 20, 7);
    EXPECT_DOUBLE_EQ(iou(b, b), 1.0);
    EXPECT_DOUBLE_EQ(iou(Box(0, 0, 10, 10), Box(20, 20, 5, 5)), 0.0);
    EXPECT_NEAR(iou(Box(0, 0, 10, 10), Box(1, 1, 10, 10)), 81.0 / 119.0, 1e-15);
    EXPECT_NEAR(oracle::raster_iou(Box(0, 0, 10, 10), Box(1, 1, 10, 10)), 81.0 / 119.0, 1e-15);
}

TEST(Iou, TouchingBoxesDoNotOverlap) {
    EXPECT_EQ(iou(Box(0, 0, 10, 10), Box(10, 0, 10, 10)), 0.0);
    EXPECT_EQ(intersection_area(Box(0, 0, 10, 10), Box(0, 10, 10, 10)), 0.0);
}

TEST(Iou, MatchesRasterOracleAndIsSymmetric) {
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        const Box a = oracle::random_int_box(rng, 40, 25);
        const Box b = oracle::random_int_box(rng, 40, 25);
        const double v = iou(a, b);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        EXPECT_EQ(v, iou(b, a));
        EXPECT_NEAR(v, oracle::raster_iou(a, b), 1e-12);
    }
}

TEST(AreaAspect, Examples) {
    EXPECT_DOUBLE_EQ(area(Box(0, 0, 40, 40)), 1600.0);
    EXPECT_DOUBLE_EQ(aspect_ratio(Box(0, 0, 40, 40)), 1.0);
    EXPECT_DOUBLE_EQ(aspect_ratio(Box(0, 0, 100, 25)), 4.0);
    EXPECT_DOUBLE_EQ(aspect_ratio(Box(0, 0, 10, 50)), 0.2);
}

TEST(Nms, Examples) {
    const ScoredBox a{Box(0, 0, 10, 10), 0.9};
    const ScoredBox b{Box(1, 1, 10, 10), 0.8};
    const ScoredBox c{Box(50, 50, 10, 10), 0.5};

    std::vector<ScoredBox> ab = {b, a};
    auto out = nms(ab, 0.3);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].box, a.box);

    std::vector<ScoredBox> ac = {c, a};
    out = nms(ac, 0.3);
    ASSERT_EQ(out.size(), 2u);
    EXPECT_EQ(out[0].box, a.box);
    EXPECT_EQ(out[1].box, c.box);

    std::vector<ScoredBox> single = {c};
    out = nms(single, 0.3);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].box, c.box);

    EXPECT_TRUE(nms(std::vector<ScoredBox>{}, 0.3).empty());
}

TEST(Nms, EqualScoresKeepLowerIndex) {
    std::vector<ScoredBox> boxes = {{Box(1, 1, 10, 10), 0.5}, {Box(0, 0, 10, 10), 0.5}};
    const auto out = nms(boxes, 0.3);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0].box, boxes[0].box);
}

TEST(Nms, MatchesOracleAndIsIdempotent) {
    Rng rng(2026);
    for (int inst = 0; inst < 1000; ++inst) {
        const std::size_t n = rng.index(51);
        std::vector<ScoredBox> boxes;
        for (std::size_t i = 0; i < n; ++i) {
            boxes.push_back({oracle::random_int_box(rng, 30, 14), oracle::random_score(rng)});
        }
        const double thr = 0.1 * static_cast<double>(rng.index(10));
        const auto got = nms(boxes, thr);
        const auto want = oracle::nms(boxes, thr);
        ASSERT_EQ(got.size(), want.size()) << "instance " << inst;
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(got[i].box, want[i].box);
            EXPECT_EQ(got[i].score, want[i].score);
        }
        for (std::size_t i = 0; i < got.size(); ++i) {
            for (std::size_t j = i + 1; j < got.size(); ++j) {
                EXPECT_LE(iou(got[i].box, got[j].box), thr);
            }
            if (i > 0) {
                EXPECT_GE(got[i - 1].score, got[i].score);
            }
        }
        const auto again = nms(got, thr);
        ASSERT_EQ(again.size(), got.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            EXPECT_EQ(again[i].box, got[i].box);
        }
    }
}

}  // namespace
}  // namespace rewod
