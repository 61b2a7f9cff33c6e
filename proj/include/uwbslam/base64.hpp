#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace uwbslam::base64 {

std::string encode(std::span<const std::uint8_t> bytes);

/// Throws std::invalid_argument on malformed input.
std::vector<std::uint8_t> decode(std::string_view text);

/// Little-endian IEEE-754 binary32 packing.
std::string encode_f32le(std::span<const float> values);
std::vector<float> decode_f32le(std::string_view text);

}  // namespace uwbslam::base64
