#include "contrastex/segmentation/segment_map.hpp"

#include <iomanip>
#include <sstream>

#include "contrastex/imaging/rle.hpp"

namespace contrastex {

std::string to_string(Provenance p) { return p == Provenance::HighIntensity ? "high_intensity" : "low_intensity"; }

std::string segment_name(int id) {
  std::ostringstream out;
  out << "Seg" << std::setw(2) << std::setfill('0') << id;
  return out.str();
}

SegmentMap::SegmentMap(LabelMap labels, std::vector<SegmentInfo> info) : labels_(std::move(labels)), info_(std::move(info)) {
  const auto sizes = labels_.label_sizes();
  if (static_cast<int>(sizes.size()) - 1 != count()) {
    fail(ErrorKind::InvalidArgument, "segment info does not match the label map");
  }
  for (std::size_t k = 0; k < info_.size(); ++k) {
    auto& s = info_[k];
    if (s.id != static_cast<int>(k) + 1) fail(ErrorKind::InvalidArgument, "segment ids must be 1..n in order");
    if (sizes[k + 1] == 0) fail(ErrorKind::InvalidArgument, "empty segment " + std::to_string(s.id));
    s.pixel_count = sizes[k + 1];
  }
}

const SegmentInfo& SegmentMap::info(int id) const {
  if (id < 1 || id > count()) fail(ErrorKind::UnknownSegmentId, "segment " + std::to_string(id));
  return info_[static_cast<std::size_t>(id - 1)];
}

std::vector<std::vector<std::size_t>> SegmentMap::pixel_lists() const {
  std::vector<std::vector<std::size_t>> lists(info_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const int l = labels_[i];
    if (l > 0) lists[static_cast<std::size_t>(l - 1)].push_back(i);
  }
  return lists;
}

nlohmann::json SegmentMap::to_json() const {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : info_) {
    segs.push_back({{"id", s.id},
                    {"name", segment_name(s.id)},
                    {"provenance", to_string(s.provenance)},
                    {"pixel_count", s.pixel_count},
                    {"mask", mask_to_json(mask(s.id))}});
  }
  return {{"width", width()}, {"height", height()}, {"segments", segs}};
}

SegmentMap make_segment_map(const LabelMap& labels, Provenance provenance, std::size_t min_size) {
  std::vector<SegmentInfo> info;
  for (int id = 1; id <= labels.max_label(); ++id) info.push_back({id, provenance, 0, min_size});
  return SegmentMap(labels, std::move(info));
}

}  // namespace contrastex
