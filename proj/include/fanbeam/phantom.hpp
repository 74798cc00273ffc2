#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "fanbeam/geometry.hpp"
#include "fanbeam/grid.hpp"

namespace fanbeam {

struct Ellipse {
    std::array<double, 2> center{};
    std::array<double, 2> semi_axes{1.0, 1.0};
    double rotation = 0.0; ///< radians, counter-clockwise
    double density = 1.0;

    friend bool operator==(const Ellipse&, const Ellipse&) = default;
};

struct EllipsePhantom {
    std::vector<Ellipse> ellipses;

    void validate() const;

    /// Same phantom rotated counter-clockwise about the origin.
    EllipsePhantom rotated(double angle) const;

    friend bool operator==(const EllipsePhantom&, const EllipsePhantom&) = default;
};

/// Point-sampled rasterization: each pixel gets the summed density of the
/// ellipses containing its center.
Image rasterize(const EllipsePhantom& phantom, int n_pix);

/// Exact line integrals along every ray of geom, times s_fwd.
Sinogram analytic_sinogram(const EllipsePhantom& phantom, const FanbeamGeometry& geom, double s_fwd);

/// Exact integral of one phantom along the full line through a and b.
double line_integral(const EllipsePhantom& phantom, const std::array<double, 2>& a,
                     const std::array<double, 2>& b);

/// Unit-density disk of the given radius at the origin.
EllipsePhantom centered_disk(double radius, double density = 1.0);

/// Options for seeded random phantoms. Ellipses stay inside
/// fill_fraction * n_pix / 2 of the origin.
struct PhantomSuiteOptions {
    int count = 8;
    int n_pix = 128;
    int min_ellipses = 3;
    int max_ellipses = 6;
    double fill_fraction = 0.8;
    /// When set, every phantom starts with the same centered body ellipse and
    /// the random features are low-contrast inserts inside it.
    bool common_body = false;
};

/// Deterministic: identical options and seed give identical phantoms on any
/// platform.
std::vector<EllipsePhantom> random_phantom_suite(const PhantomSuiteOptions& opts, std::uint64_t seed);

} // namespace fanbeam
