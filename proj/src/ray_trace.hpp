#pragma once

// Ray sampling shared by the plain projector and its derivative passes. The
// scalar type T is double or a Jet; everything that depends on the geometric
// parameters is computed in T, integer cell indices come from the value part.

#include <cmath>
#include <vector>

#include "fanbeam/grid.hpp"
#include "fanbeam/jet.hpp"

namespace fanbeam::detail {

using std::cos;
using std::sin;
using std::sqrt;

/// One quadrature node: the bilinear cell (row0, col0) and the fractional
/// offsets inside it.
template <class T>
struct Sample {
    int row0;
    int col0;
    T frac_row;
    T frac_col;
};

/// Source position and detector frame of one view.
template <class T>
struct ViewFrame {
    T source_x, source_y;
    T det_center_x, det_center_y;
    T det_dir_x, det_dir_y;
};

template <class T>
ViewFrame<T> make_view_frame(const T& d_source, const T& d_detector, const T& phi) {
    const T c = cos(phi);
    const T s = sin(phi);
    return {d_source * c, d_source * s, -(d_detector * c), -(d_detector * s), -s, c};
}

struct TraceConfig {
    int n_pix;
    double step;
    double clip_radius;
};

inline TraceConfig make_trace_config(int n_pix, double step) {
    return {n_pix, step, n_pix / std::sqrt(2.0) + step};
}

/// Midpoint-rule nodes along the ray from the source to the detector point at
/// offset t, restricted to the clipping disk. Nodes whose bilinear footprint
/// misses the image entirely are dropped.
template <class T>
void sample_ray(const ViewFrame<T>& f, double t, const TraceConfig& cfg, std::vector<Sample<T>>& out) {
    out.clear();
    const T px = f.det_center_x + f.det_dir_x * t;
    const T py = f.det_center_y + f.det_dir_y * t;
    const T wx = px - f.source_x;
    const T wy = py - f.source_y;
    const T length = sqrt(wx * wx + wy * wy);
    const T ux = wx / length;
    const T uy = wy / length;

    // |S + s u|^2 = rho^2
    const T b = f.source_x * ux + f.source_y * uy;
    const T c = f.source_x * f.source_x + f.source_y * f.source_y - cfg.clip_radius * cfg.clip_radius;
    const T disc = b * b - c;
    if (value_of(disc) <= 0.0) return;
    const T root = sqrt(disc);
    T s_begin = -b - root;
    T s_end = -b + root;
    if (value_of(s_begin) < 0.0) s_begin = T(0.0);
    if (value_of(s_end) > value_of(length)) s_end = length;
    const double span = value_of(s_end) - value_of(s_begin);
    if (span <= 0.0) return;

    const auto count = static_cast<long>(std::floor(span / cfg.step));
    const double half = 0.5 * (cfg.n_pix - 1);
    const T x0 = f.source_x + ux * s_begin;
    const T y0 = f.source_y + uy * s_begin;
    for (long i = 0; i < count; ++i) {
        const double s = (static_cast<double>(i) + 0.5) * cfg.step;
        const T col = x0 + ux * s + half;
        const T row = half - (y0 + uy * s);
        const double col_floor = std::floor(value_of(col));
        const double row_floor = std::floor(value_of(row));
        if (col_floor < -1.0 || col_floor > cfg.n_pix - 1 || row_floor < -1.0 ||
            row_floor > cfg.n_pix - 1)
            continue;
        out.push_back({static_cast<int>(row_floor), static_cast<int>(col_floor), row - row_floor,
                       col - col_floor});
    }
}

/// Bilinear interpolation with zero extension outside the image.
template <class T>
T interpolate(const Image& img, const Sample<T>& s) {
    const int n = static_cast<int>(img.rows());
    auto at = [&](int r, int c) -> double {
        if (r < 0 || c < 0 || r >= n || c >= n) return 0.0;
        return img(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
    };
    const double v00 = at(s.row0, s.col0);
    const double v01 = at(s.row0, s.col0 + 1);
    const double v10 = at(s.row0 + 1, s.col0);
    const double v11 = at(s.row0 + 1, s.col0 + 1);
    return v00 + s.frac_col * (v01 - v00) + s.frac_row * (v10 - v00) +
           s.frac_row * s.frac_col * (v11 - v10 - v01 + v00);
}

/// Detector distance from the field-of-view relation, in T so that it carries
/// the derivative with respect to d_source.
template <class T>
T reduced_detector_distance(const T& d_source, int n_detector, int image_size) {
    const double radius = 0.5 * image_size;
    return sqrt(d_source * d_source - radius * radius) * (n_detector / (2.0 * radius)) - d_source;
}

} // namespace fanbeam::detail
