#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the code paths it is used to check.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "fanbeam/calibration.hpp"
#include "fanbeam/geometry.hpp"
#include "fanbeam/grid.hpp"
#include "fanbeam/phantom.hpp"
#include "fanbeam/projector.hpp"

namespace oracle {

/// Detector distance from the closed form 2 s sqrt(d^2 - R^2) - d, valid when
/// n_detector = 4 R, in long double.
inline long double closed_form_detector_distance(long double d_source, long double radius) {
    return 2.0L * std::sqrt(d_source * d_source - radius * radius) - d_source;
}

/// Detector distance from n / (2 tan(asin(R/d))) - d in long double.
inline long double fov_detector_distance(long double d_source, long double radius, long double n_det) {
    const long double gamma = std::asin(radius / d_source);
    return n_det / (2.0L * std::tan(gamma)) - d_source;
}

/// Distance from the origin to the infinite line through a and b.
inline double origin_line_distance(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    return std::abs(a[0] * dy - a[1] * dx) / std::hypot(dx, dy);
}

/// Parameter in [0, 1] of the foot of the perpendicular from the origin onto segment a-b.
inline double perpendicular_foot_parameter(const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = b[0] - a[0];
    const double dy = b[1] - a[1];
    return -(a[0] * dx + a[1] * dy) / (dx * dx + dy * dy);
}

/// h(k) = integral over [-1/2, 1/2] of |w| exp(2 pi i w k) dw, composite Simpson.
inline double ramp_tap_by_quadrature(int k, int intervals = 20000) {
    auto f = [k](double w) { return 2.0 * w * std::cos(2.0 * std::numbers::pi * w * k); };
    const double h = 0.5 / intervals;
    double acc = f(0.0) + f(0.5);
    for (int i = 1; i < intervals; ++i) acc += (i % 2 ? 4.0 : 2.0) * f(i * h);
    return acc * h / 3.0;
}

/// Indicator of the (superposed) phantom at a world point.
inline double phantom_value(const fanbeam::EllipsePhantom& p, double x, double y) {
    double v = 0.0;
    for (const auto& e : p.ellipses) {
        const double c = std::cos(e.rotation), s = std::sin(e.rotation);
        const double dx = x - e.center[0], dy = y - e.center[1];
        const double u = (c * dx + s * dy) / e.semi_axes[0];
        const double w = (-s * dx + c * dy) / e.semi_axes[1];
        if (u * u + w * w <= 1.0) v += e.density;
    }
    return v;
}

/// Midpoint quadrature of the continuous phantom along segment a-b.
inline double dense_line_integral(const fanbeam::EllipsePhantom& p, const std::array<double, 2>& a,
                                  const std::array<double, 2>& b, double step) {
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len = std::hypot(dx, dy);
    const auto n = static_cast<long>(len / step);
    const double h = len / static_cast<double>(n);
    double acc = 0.0;
    for (long i = 0; i < n; ++i) {
        const double t = (i + 0.5) * h / len;
        acc += phantom_value(p, a[0] + t * dx, a[1] + t * dy);
    }
    return acc * h;
}

/// Plain two-pass RMSE: difference array first, then the mean of squares.
inline double naive_rmse(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    long double sum = 0.0L;
    for (double d : diff) sum += static_cast<long double>(d) * d;
    return static_cast<double>(std::sqrt(sum / static_cast<long double>(diff.size())));
}

/// Objective evaluated pair by pair from full forward projections.
inline double direct_loss(const fanbeam::CalibrationSet& set, const fanbeam::CalibParams& p,
                          double step = 0.5) {
    const auto dims = set.dims();
    const auto geom = fanbeam::geometry_from_reduced(p, dims);
    fanbeam::ProjectorOptions opts;
    opts.step = step;
    long double acc = 0.0L;
    for (const auto& pair : set.pairs) {
        const auto f = fanbeam::forward_project(pair.image, geom, p.s_fwd, opts);
        for (std::size_t i = 0; i < f.size(); ++i) {
            const double r = f.values()[i] - pair.sinogram.values()[i];
            acc += static_cast<long double>(r) * r;
        }
    }
    return static_cast<double>(acc / set.size());
}

/// Central finite difference of an objective along one coordinate.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

inline std::vector<double> equispaced_angles(int n, double offset = 0.0) {
    std::vector<double> a(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) a[static_cast<std::size_t>(k)] = offset + 2.0 * std::numbers::pi * k / n;
    return a;
}

inline fanbeam::Image random_image(int n, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
    std::mt19937_64 eng(seed);
    std::uniform_real_distribution<double> u(lo, hi);
    fanbeam::Image img(static_cast<std::size_t>(n), static_cast<std::size_t>(n));
    for (double& v : img.values()) v = u(eng);
    return img;
}

} // namespace oracle
