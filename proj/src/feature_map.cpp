// Copyright (C) 2026 The rewod Authors
// SPDX-License-Identifier: Apache-2.0
//

#include "rewod/feature_map.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numeric>
#include <string>

#include "rewod/error.hpp"

namespace rewod {

namespace {

constexpr unsigned char kMagic[4] = {'R', 'F', 'M', '1'};
constexpr std::size_t kHeaderBytes = 4 + 5 * 4;
// Upper bound on the element count accepted from a header.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

void check_dims(int height, int width, int channels) {
    if (height < 1 || width < 1 || channels < 1) {
        throw Error(ErrorCode::InvalidArgument, "map dimensions must be >= 1");
    }
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xffu));
    }
}

std::uint32_t get_u32(std::span<const unsigned char> bytes, std::size_t offset) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
        v |= static_cast<std::uint32_t>(bytes[offset + i]) << (8 * i);
    }
    return v;
}

}  // namespace

FeatureMap::FeatureMap(Level level, int height, int width, int channels, std::vector<float> data)
    : level_(level), height_(height), width_(width), channels_(channels), data_(std::move(data)) {
    check_dims(height, width, channels);
    if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
        throw Error(ErrorCode::DimensionMismatch, "feature data length does not equal H*W*C");
    }
    for (float v : data_) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::NonFinite, "feature map contains a non-finite value");
        }
    }
}

std::span<const float> FeatureMap::cell(int row, int col) const {
    return cell(static_cast<std::size_t>(row) * width_ + col);
}

std::span<const float> FeatureMap::cell(std::size_t index) const {
    return std::span<const float>(data_).subspan(index * channels_, channels_);
}

ErrorMap::ErrorMap(Level level, int height, int width, std::vector<double> data)
    : level_(level), height_(height), width_(width), data_(std::move(data)) {
    check_dims(height, width, 1);
    if (data_.size() != static_cast<std::size_t>(height) * width) {
        throw Error(ErrorCode::DimensionMismatch, "error data length does not equal H*W");
    }
    for (double v : data_) {
        if (!std::isfinite(v) || v < 0.0) {
            throw Error(ErrorCode::NonFinite, "error map values must be finite and non-negative");
        }
    }
}

double ErrorMap::mean() const {
    return std::accumulate(data_.begin(), data_.end(), 0.0) / static_cast<double>(data_.size());
}

std::vector<unsigned char> encode_feature_map(const FeatureMap& map) {
    std::vector<unsigned char> out(std::begin(kMagic), std::end(kMagic));
    out.reserve(kHeaderBytes + map.data().size() * 4);
    put_u32(out, static_cast<std::uint32_t>(map.level()));
    put_u32(out, static_cast<std::uint32_t>(map.height()));
    put_u32(out, static_cast<std::uint32_t>(map.width()));
    put_u32(out, static_cast<std::uint32_t>(map.channels()));
    put_u32(out, static_cast<std::uint32_t>(map.stride()));
    for (float v : map.data()) {
        put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    return out;
}

FeatureMap decode_feature_map(std::span<const unsigned char> bytes) {
    if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
        throw Error(ErrorCode::BadMagic, "expected RFM1 magic");
    }
    if (bytes.size() < kHeaderBytes) {
        throw Error(ErrorCode::Truncated, "header shorter than 24 bytes");
    }
    const std::uint32_t code = get_u32(bytes, 4);
    const std::uint32_t height = get_u32(bytes, 8);
    const std::uint32_t width = get_u32(bytes, 12);
    const std::uint32_t channels = get_u32(bytes, 16);
    const std::uint32_t map_stride = get_u32(bytes, 20);
    if (!is_level_code(code)) {
        throw Error(ErrorCode::BadHeader, "unknown level code " + std::to_string(code));
    }
    const auto level = static_cast<Level>(code);
    if (static_cast<int>(map_stride) != stride(level)) {
        throw Error(ErrorCode::BadHeader, "stride " + std::to_string(map_stride) + " does not match level " +
                                              std::string(level_name(level)));
    }
    const std::uint64_t count = std::uint64_t{height} * width * channels;
    if (height == 0 || width == 0 || channels == 0 || count > kMaxElements) {
        throw Error(ErrorCode::BadHeader, "invalid dimensions");
    }
    const std::uint64_t expected = kHeaderBytes + count * 4;
    if (bytes.size() < expected) {
        throw Error(ErrorCode::Truncated, "payload has " + std::to_string(bytes.size() - kHeaderBytes) +
                                              " bytes, expected " + std::to_string(count * 4));
    }
    if (bytes.size() > expected) {
        throw Error(ErrorCode::BadHeader, "trailing bytes after payload");
    }
    std::vector<float> data(count);
    for (std::size_t i = 0; i < count; ++i) {
        data[i] = std::bit_cast<float>(get_u32(bytes, kHeaderBytes + 4 * i));
    }
    return FeatureMap(level, static_cast<int>(height), static_cast<int>(width), static_cast<int>(channels),
                      std::move(data));
}

void write_feature_map(const FeatureMap& map, const std::filesystem::path& path) {
    const auto bytes = encode_feature_map(map);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorCode::Io, "cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw Error(ErrorCode::Io, "write failed for " + path.string());
    }
}

FeatureMap read_feature_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::Io, "cannot open " + path.string());
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_feature_map(bytes);
}

}  // namespace rewod
