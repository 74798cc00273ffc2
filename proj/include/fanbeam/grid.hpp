#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fanbeam/error.hpp"

namespace fanbeam {

/// Dense row-major 2-D array of doubles. The tag keeps images and sinograms
/// from being mixed up at compile time.
template <class Tag>
class Grid2D {
public:
    Grid2D() = default;
    Grid2D(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Grid2D(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        require(data_.size() == rows_ * cols_, ErrorKind::ShapeMismatch,
                "buffer size does not match " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() & noexcept { return data_; }
    std::span<const double> values() const& noexcept { return data_; }
    /// Takes the storage, so `for (double v : make().values())` cannot dangle.
    std::vector<double> values() && noexcept { return std::move(data_); }
    const std::vector<double>& storage() const noexcept { return data_; }

    bool same_shape(const Grid2D& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool all_finite() const noexcept {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    Grid2D& operator+=(const Grid2D& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Grid2D& operator-=(const Grid2D& o) {
        check_same(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Grid2D& operator*=(double s) noexcept {
        for (double& v : data_) v *= s;
        return *this;
    }

    friend Grid2D operator+(Grid2D a, const Grid2D& b) { return a += b; }
    friend Grid2D operator-(Grid2D a, const Grid2D& b) { return a -= b; }
    friend Grid2D operator*(double s, Grid2D a) { return a *= s; }

    friend bool operator==(const Grid2D&, const Grid2D&) = default;

private:
    void check_same(const Grid2D& o) const {
        require(same_shape(o), ErrorKind::ShapeMismatch,
                "shape mismatch: " + std::to_string(rows_) + "x" + std::to_string(cols_) + " vs " +
                    std::to_string(o.rows_) + "x" + std::to_string(o.cols_));
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct ImageTag {};
struct SinogramTag {};

/// Square image, row 0 at the top. Pixel (r, c) has its center at
/// (c - (n-1)/2, (n-1)/2 - r) in pixel units.
using Image = Grid2D<ImageTag>;

/// Rows are views (angles), columns are detector elements.
using Sinogram = Grid2D<SinogramTag>;

/// Additive sinogram-domain offset subtracted from the forward model.
struct BiasCorrection {
    Sinogram offset;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

inline double squared_norm(std::span<const double> a) { return dot(a, a); }

} // namespace fanbeam
