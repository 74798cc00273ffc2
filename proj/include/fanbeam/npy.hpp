#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fanbeam/grid.hpp"

namespace fanbeam::npy {

/// A decoded array. Values are widened to double whatever the stored dtype.
struct Array {
    std::vector<std::size_t> shape;
    std::vector<double> data;
};

/// Encodes as NPY v1.0, little-endian float32 ('<f4'), C order.
std::string encode(std::span<const double> data, std::span<const std::size_t> shape);

/// Accepts NPY v1.0/v2.0 with dtype '<f4' or '<f8' in C order.
Array decode(std::string_view bytes);

Array read(const std::filesystem::path& path);
void write(const std::filesystem::path& path, std::span<const double> data,
           std::span<const std::size_t> shape);

Image read_image(const std::filesystem::path& path);
Sinogram read_sinogram(const std::filesystem::path& path);

template <class Tag>
void write_grid(const std::filesystem::path& path, const Grid2D<Tag>& grid) {
    const std::size_t shape[2] = {grid.rows(), grid.cols()};
    write(path, grid.values(), shape);
}

} // namespace fanbeam::npy
