// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <map>
#include <set>

#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "rewod/exemplars.hpp"
#include "rewod/rng.hpp"

namespace rewod {
namespace {

GroundTruth ann(std::int64_t img, const std::string& label, bool unknown = false) {
    return {img, Box(0, 0, 10, 10), label, unknown};
}

// Instances per class over the chosen images, counted from scratch.
std::map<std::string, int> count_selected(const std::vector<GroundTruth>& anns, const std::vector<std::int64_t>& ids) {
    const std::set<std::int64_t> chosen(ids.begin(), ids.end());
    std::map<std::string, int> out;
    for (const auto& a : anns) {
        if (!a.is_unknown && chosen.contains(a.image_id)) ++out[a.class_label];
    }
    return out;
}

TEST(Exemplars, ReportsShortage) {
    std::vector<GroundTruth> anns;
    for (int i = 0; i < 10; ++i) anns.push_back(ann(i, "cat"));
    const std::vector<std::string> classes = {"cat"};
    const auto sel = select_exemplars(anns, classes, 50, 0);
    EXPECT_FALSE(sel.complete());
    EXPECT_EQ(sel.shortages.at("cat"), 40);
    EXPECT_EQ(sel.instance_counts.at("cat"), 10);
    EXPECT_EQ(sel.image_ids.size(), 10u);
}

TEST(Exemplars, DenseImageChosenAlone) {
    std::vector<GroundTruth> anns;
    for (int i = 0; i < 50; ++i) anns.push_back(ann(7, "cat"));
    for (int i = 0; i < 30; ++i) anns.push_back(ann(100 + i, "cat"));
    const std::vector<std::string> classes = {"cat"};
    const auto sel = select_exemplars(anns, classes, 50, 3);
    ASSERT_EQ(sel.image_ids.size(), 1u);
    EXPECT_EQ(sel.image_ids[0], 7);
    EXPECT_TRUE(sel.complete());
}

TEST(Exemplars, CoversEveryClassOnRandomData) {
    Rng rng(5);
    const std::vector<std::string> classes = {"a", "b", "c", "d"};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<GroundTruth> anns;
        std::map<std::string, int> available;
        for (std::int64_t img = 0; img < 200; ++img) {
            for (std::size_t k = rng.index(5); k > 0; --k) {
                const auto& c = classes[rng.index(classes.size())];
                anns.push_back(ann(img, c));
                ++available[c];
            }
            if (rng.bernoulli(0.3)) anns.push_back(ann(img, "ghost", true));
        }
        const int want = 1 + static_cast<int>(rng.index(60));
        const auto sel = select_exemplars(anns, classes, want, trial);
        const auto counted = count_selected(anns, sel.image_ids);
        EXPECT_EQ(std::set<std::int64_t>(sel.image_ids.begin(), sel.image_ids.end()).size(), sel.image_ids.size());
        for (const auto& c : classes) {
            const int got = counted.count(c) ? counted.at(c) : 0;
            EXPECT_EQ(sel.instance_counts.at(c), got) << c;
            EXPECT_GE(got, std::min(want, available[c])) << c;
            EXPECT_EQ(sel.shortages.count(c) > 0, available[c] < want) << c;
        }
        EXPECT_FALSE(sel.instance_counts.contains("ghost"));
    }
}

TEST(Exemplars, DeterministicPerSeed) {
    Rng rng(6);
    std::vector<GroundTruth> anns;
    for (std::int64_t img = 0; img < 100; ++img) anns.push_back(ann(img, rng.bernoulli(0.5) ? "a" : "b"));
    const std::vector<std::string> classes = {"a", "b"};
    EXPECT_EQ(select_exemplars(anns, classes, 10, 9).image_ids, select_exemplars(anns, classes, 10, 9).image_ids);
}

TEST(Exemplars, IgnoresUnknownAnnotations) {
    std::vector<GroundTruth> anns;
    for (int i = 0; i < 5; ++i) anns.push_back(ann(i, "cat", true));
    const std::vector<std::string> classes = {"cat"};
    const auto sel = select_exemplars(anns, classes, 5, 0);
    EXPECT_TRUE(sel.image_ids.empty());
    EXPECT_EQ(sel.shortages.at("cat"), 5);
    REWOD_EXPECT_ERROR(select_exemplars(anns, classes, 0, 0), ErrorCode::InvalidArgument);
}

}  // namespace
}  // namespace rewod
