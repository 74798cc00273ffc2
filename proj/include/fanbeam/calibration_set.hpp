#pragma once

#include <vector>

#include "fanbeam/geometry.hpp"
#include "fanbeam/grid.hpp"

namespace fanbeam {

struct CalibrationPair {
    Sinogram sinogram;
    Image image;
};

/// Sinogram/image pairs that share one shape signature.
struct CalibrationSet {
    std::vector<CalibrationPair> pairs;

    std::size_t size() const noexcept { return pairs.size(); }

    /// Throws if empty, non-square, or the shapes disagree between pairs.
    void validate() const;

    /// Dimensions implied by the first pair. Calls validate().
    GeometryDims dims() const;
};

} // namespace fanbeam
