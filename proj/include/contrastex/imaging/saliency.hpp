#pragma once

#include <map>

#include "contrastex/imaging/image.hpp"

namespace contrastex {

// Paints each segment's score onto its pixels; background (label 0) is 0.
// Throws UnknownSegmentId when a labelled pixel has no score.
SaliencyMap render_saliency(const std::map<int, double>& scores, const LabelMap& segments);

}  // namespace contrastex
