#pragma once

#include <utility>
#include <vector>

#include <json.hpp>

#include "contrastex/imaging/image.hpp"

namespace contrastex {

// Row-major runs of set pixels as (start index, length) pairs.
std::vector<std::pair<std::size_t, std::size_t>> run_length_encode(const BinaryMask& mask);
BinaryMask run_length_decode(int width, int height, const std::vector<std::pair<std::size_t, std::size_t>>& runs);

// {"width":w,"height":h,"runs":[[start,len],...]}
nlohmann::json mask_to_json(const BinaryMask& mask);
BinaryMask mask_from_json(const nlohmann::json& j);

}  // namespace contrastex
