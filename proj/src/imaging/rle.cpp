#include "contrastex/imaging/rle.hpp"

namespace contrastex {

std::vector<std::pair<std::size_t, std::size_t>> run_length_encode(const BinaryMask& mask) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  std::size_t i = 0;
  while (i < mask.size()) {
    if (mask[i] == 0) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < mask.size() && mask[i] != 0) ++i;
    runs.emplace_back(start, i - start);
  }
  return runs;
}

BinaryMask run_length_decode(int width, int height, const std::vector<std::pair<std::size_t, std::size_t>>& runs) {
  BinaryMask mask(width, height);
  for (const auto& [start, length] : runs) {
    if (start + length > mask.size()) fail(ErrorKind::InvalidArgument, "run extends past the mask");
    for (std::size_t i = start; i < start + length; ++i) mask[i] = 1;
  }
  return mask;
}

nlohmann::json mask_to_json(const BinaryMask& mask) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& [start, length] : run_length_encode(mask)) runs.push_back({start, length});
  return {{"width", mask.width()}, {"height", mask.height()}, {"runs", runs}};
}

BinaryMask mask_from_json(const nlohmann::json& j) {
  std::vector<std::pair<std::size_t, std::size_t>> runs;
  for (const auto& r : j.at("runs")) runs.emplace_back(r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>());
  return run_length_decode(j.at("width").get<int>(), j.at("height").get<int>(), runs);
}

}  // namespace contrastex
