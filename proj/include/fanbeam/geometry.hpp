#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace fanbeam {

/// Flat-detector fanbeam acquisition. All lengths are in pixel units.
///
/// The source for view k sits at d_source * (cos phi_k, sin phi_k). The
/// detector line is centered opposite the source at distance d_detector from
/// the origin and runs along (-sin phi_k, cos phi_k); element j is centered at
/// offset (j - (n_detector - 1) / 2) * s_detector.
struct FanbeamGeometry {
    double d_source = 0.0;
    double d_detector = 0.0;
    int n_detector = 0;
    double s_detector = 1.0;
    int n_angle = 0;
    std::vector<double> angles;
    int image_size = 0;

    /// Throws InvalidGeometry when an invariant is violated.
    void validate() const;

    double source_to_detector() const noexcept { return d_source + d_detector; }
    double detector_offset(int j) const noexcept {
        return (j - 0.5 * (n_detector - 1)) * s_detector;
    }
    std::size_t sinogram_size() const noexcept {
        return static_cast<std::size_t>(n_angle) * static_cast<std::size_t>(n_detector);
    }

    friend bool operator==(const FanbeamGeometry&, const FanbeamGeometry&) = default;
};

/// Free parameters of the forward model: global scale, source distance and
/// one rotation angle per view.
struct CalibParams {
    double s_fwd = 1.0;
    double d_source = 0.0;
    std::vector<double> angles;

    std::size_t dimension() const noexcept { return 2 + angles.size(); }

    friend bool operator==(const CalibParams&, const CalibParams&) = default;
};

/// Shape of the problem, fixed by the data rather than fitted.
struct GeometryDims {
    int n_detector = 0;
    int n_angle = 0;
    int image_size = 0;
};

struct Ray {
    std::array<double, 2> source_point{};
    std::array<double, 2> detector_point{};
};

/// Half fan angle that makes the image's inscribed circle fit the fan exactly.
double field_of_view_angle(double d_source, int image_size);

/// Detector distance from the field-of-view relation with unit element spacing.
double detector_distance(double d_source, int n_detector, int image_size);

/// Builds the full geometry from the reduced parameterization
/// (d_source, n_detector, n_angle, angles). s_detector is fixed to 1 and
/// d_detector follows from the field-of-view relation.
FanbeamGeometry geometry_from_reduced(const CalibParams& params, int n_detector, int n_angle,
                                      int image_size);

inline FanbeamGeometry geometry_from_reduced(const CalibParams& params, const GeometryDims& dims) {
    return geometry_from_reduced(params, dims.n_detector, dims.n_angle, dims.image_size);
}

/// Rays of one view in ascending detector order.
std::vector<Ray> enumerate_rays(const FanbeamGeometry& geom, int angle_index);

/// Center of pixel (row, col) in world coordinates.
inline std::array<double, 2> pixel_center(int row, int col, int n_pix) noexcept {
    const double half = 0.5 * (n_pix - 1);
    return {col - half, half - row};
}

} // namespace fanbeam
