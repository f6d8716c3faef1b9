// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include <gtest/gtest.h>

#include "expect_error.hpp"
#include "rewod/feature_map.hpp"
#include "rewod/rng.hpp"

namespace rewod {
namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("rewod_fm_" + std::to_string(::getpid()) + "_" + name);
}

bool bit_equal(const FeatureMap& a, const FeatureMap& b) {
    if (a.level() != b.level() || a.height() != b.height() || a.width() != b.width() ||
        a.channels() != b.channels()) {
        return false;
    }
    return std::memcmp(a.data().data(), b.data().data(), a.data().size() * sizeof(float)) == 0;
}

TEST(FeatureMapFile, SmallRoundTrip) {
    std::vector<float> values = {0.f, 1.f, -2.5f, 3.25f, 1e-30f, -0.f, 7.f, 8.f, 9.f, 10.f, 11.f, 12.f};
    const FeatureMap m(Level::P4, 2, 2, 3, values);
    const auto path = temp_path("small.rfm");
    write_feature_map(m, path);
    EXPECT_EQ(std::filesystem::file_size(path), 24u + 12u * 4u);
    const FeatureMap back = read_feature_map(path);
    EXPECT_TRUE(bit_equal(m, back));
    EXPECT_EQ(back.stride(), 16);
    EXPECT_FLOAT_EQ(back.cell(1, 0)[2], 9.f);
    std::filesystem::remove(path);
}

TEST(FeatureMapFile, RandomRoundTripsAreBitExact) {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const Level level = kAllLevels[rng.index(4)];
        const int h = 1 + static_cast<int>(rng.index(9));
        const int w = 1 + static_cast<int>(rng.index(9));
        const int c = 1 + static_cast<int>(rng.index(17));
        std::vector<float> values(static_cast<std::size_t>(h * w * c));
        for (auto& v : values) {
            v = static_cast<float>(rng.normal() * std::exp(rng.uniform(-20, 20)));
        }
        const FeatureMap m(level, h, w, c, values);
        const auto bytes = encode_feature_map(m);
        EXPECT_TRUE(bit_equal(m, decode_feature_map(bytes)));
    }
    const FeatureMap m(Level::P6, 3, 2, 4, std::vector<float>(24, 0.5f));
    const auto path = temp_path("rand.rfm");
    write_feature_map(m, path);
    EXPECT_TRUE(bit_equal(m, read_feature_map(path)));
    std::filesystem::remove(path);
}

TEST(FeatureMapFile, LayoutIsLittleEndian) {
    const FeatureMap m(Level::P3, 1, 1, 1, {1.0f});
    const auto bytes = encode_feature_map(m);
    ASSERT_EQ(bytes.size(), 28u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RFM1");
    EXPECT_EQ(bytes[4], 3);   // level code
    EXPECT_EQ(bytes[20], 8);  // stride
    EXPECT_EQ(bytes[24], 0x00);
    EXPECT_EQ(bytes[27], 0x3f);  // 1.0f = 0x3f800000
}

TEST(FeatureMapFile, CorruptInputsGiveDistinctErrors) {
    const FeatureMap m(Level::P5, 2, 2, 3, std::vector<float>(12, 1.f));
    auto bytes = encode_feature_map(m);

    auto bad_magic = bytes;
    std::memcpy(bad_magic.data(), "XXXX", 4);
    REWOD_EXPECT_ERROR(decode_feature_map(bad_magic), ErrorCode::BadMagic);

    auto short_payload = bytes;
    short_payload.resize(short_payload.size() - 4);
    REWOD_EXPECT_ERROR(decode_feature_map(short_payload), ErrorCode::Truncated);

    auto non_finite = bytes;
    const float nan = std::numeric_limits<float>::quiet_NaN();
    std::memcpy(non_finite.data() + 24, &nan, 4);
    REWOD_EXPECT_ERROR(decode_feature_map(non_finite), ErrorCode::NonFinite);

    auto bad_stride = bytes;
    bad_stride[20] = 8;
    REWOD_EXPECT_ERROR(decode_feature_map(bad_stride), ErrorCode::BadHeader);

    REWOD_EXPECT_ERROR(read_feature_map(temp_path("does_not_exist.rfm")), ErrorCode::Io);
}

TEST(FeatureMap, ConstructorChecks) {
    REWOD_EXPECT_ERROR(FeatureMap(Level::P3, 2, 2, 2, std::vector<float>(7)), ErrorCode::DimensionMismatch);
    REWOD_EXPECT_ERROR(FeatureMap(Level::P3, 0, 2, 2, {}), ErrorCode::InvalidArgument);
    REWOD_EXPECT_ERROR(ErrorMap(Level::P3, 1, 2, {1.0, -1.0}), ErrorCode::NonFinite);
    const ErrorMap e(Level::P3, 1, 2, {1.0, 3.0});
    EXPECT_DOUBLE_EQ(e.mean(), 2.0);
}

}  // namespace
}  // namespace rewod
