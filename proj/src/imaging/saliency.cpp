#include "contrastex/imaging/saliency.hpp"

#include <string>

namespace contrastex {

SaliencyMap render_saliency(const std::map<int, double>& scores, const LabelMap& segments) {
  SaliencyMap out(segments.width(), segments.height());
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const int id = segments[i];
    if (id == 0) continue;
    const auto it = scores.find(id);
    if (it == scores.end()) fail(ErrorKind::UnknownSegmentId, "no score for segment " + std::to_string(id));
    out[i] = it->second;
  }
  return out;
}

}  // namespace contrastex
