#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace contrastex {

std::string base64_encode(std::span<const std::uint8_t> bytes);

// Throws Error(InvalidArgument) on malformed input.
std::vector<std::uint8_t> base64_decode(std::string_view text);

// Row-major float32 little-endian payload used by the subprocess protocol.
std::string encode_f32_le(std::span<const double> values);
std::vector<float> decode_f32_le(std::string_view text);

}  // namespace contrastex
