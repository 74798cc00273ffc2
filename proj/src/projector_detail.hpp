#pragma once

// Pair-subset versions of the objective kernels, used by calibration to work
// on subsamples without copying images.

#include <span>
#include <vector>

#include "fanbeam/projector.hpp"

namespace fanbeam::detail {

using PairRefs = std::vector<const CalibrationPair*>;

PairRefs all_pairs(const CalibrationSet& set);

ParamGradient gradient_on(const PairRefs& pairs, const CalibParams& params, const GeometryDims& dims,
                          const ProjectorOptions& opts);

std::vector<double> per_view_loss_on(const PairRefs& pairs, const CalibParams& params,
                                     const GeometryDims& dims, const ProjectorOptions& opts,
                                     std::span<const char> active);

} // namespace fanbeam::detail
