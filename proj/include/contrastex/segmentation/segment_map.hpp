#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "contrastex/imaging/image.hpp"

namespace contrastex {

enum class Provenance { HighIntensity, LowIntensity };

std::string to_string(Provenance p);

struct SegmentInfo {
  int id = 0;
  Provenance provenance = Provenance::HighIntensity;
  std::size_t pixel_count = 0;
  std::size_t min_size_at_creation = 0;
};

// Partition of an image into segments 1..n (0 = not part of any segment).
// The same geometry applies to x (S) and to the contrast image x' (S').
class SegmentMap {
 public:
  SegmentMap() = default;
  SegmentMap(LabelMap labels, std::vector<SegmentInfo> info);

  const LabelMap& labels() const { return labels_; }
  const std::vector<SegmentInfo>& segments() const { return info_; }
  int count() const { return static_cast<int>(info_.size()); }
  const SegmentInfo& info(int id) const;
  BinaryMask mask(int id) const { return labels_.mask_of(id); }
  int width() const { return labels_.width(); }
  int height() const { return labels_.height(); }

  // Pixel indices grouped by segment (index id-1).
  std::vector<std::vector<std::size_t>> pixel_lists() const;

  nlohmann::json to_json() const;

 private:
  LabelMap labels_;
  std::vector<SegmentInfo> info_;
};

// Builds a SegmentMap from labels 1..k, all with the same provenance.
SegmentMap make_segment_map(const LabelMap& labels, Provenance provenance, std::size_t min_size);

std::string segment_name(int id);  // "Seg01", "Seg12", ...

}  // namespace contrastex
