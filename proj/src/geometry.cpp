#include "fanbeam/geometry.hpp"

#include <cmath>
#include <string>

#include "fanbeam/error.hpp"

namespace fanbeam {

void FanbeamGeometry::validate() const {
    require(image_size >= 1, ErrorKind::InvalidGeometry, "image_size must be positive");
    require(n_detector >= 1, ErrorKind::InvalidGeometry, "n_detector must be positive");
    require(n_angle >= 1, ErrorKind::InvalidGeometry, "n_angle must be positive");
    require(static_cast<int>(angles.size()) == n_angle, ErrorKind::InvalidGeometry,
            "angles has " + std::to_string(angles.size()) + " entries, expected " +
                std::to_string(n_angle));
    require(std::isfinite(s_detector) && s_detector > 0.0, ErrorKind::InvalidGeometry,
            "s_detector must be positive");
    require(std::isfinite(d_detector) && d_detector > 0.0, ErrorKind::InvalidGeometry,
            "d_detector must be positive");
    const double radius = 0.5 * image_size;
    require(std::isfinite(d_source) && d_source > radius, ErrorKind::InvalidGeometry,
            "d_source must exceed image_size/2");
    for (double a : angles)
        require(std::isfinite(a), ErrorKind::InvalidGeometry, "angles must be finite");

    // The detector must see the whole inscribed circle, with one element of slack.
    const double half_width = 0.5 * n_detector * s_detector;
    const double needed = source_to_detector() * std::tan(std::asin(radius / d_source));
    require(half_width + s_detector >= needed, ErrorKind::InvalidGeometry,
            "detector too narrow for the field of view");
}

double field_of_view_angle(double d_source, int image_size) {
    const double radius = 0.5 * image_size;
    require(std::isfinite(d_source) && d_source > radius, ErrorKind::InvalidGeometry,
            "d_source must exceed image_size/2, got " + std::to_string(d_source));
    return std::asin(radius / d_source);
}

double detector_distance(double d_source, int n_detector, int image_size) {
    // n_detector / (2 tan gamma) - d_source with tan gamma = R / sqrt(d^2 - R^2); the
    // projector's derivative pass uses the same expression.
    field_of_view_angle(d_source, image_size);
    const double radius = 0.5 * image_size;
    return std::sqrt(d_source * d_source - radius * radius) * (n_detector / (2.0 * radius)) -
           d_source;
}

FanbeamGeometry geometry_from_reduced(const CalibParams& params, int n_detector, int n_angle,
                                      int image_size) {
    require(n_detector >= 1 && n_angle >= 1 && image_size >= 1, ErrorKind::InvalidGeometry,
            "dimensions must be positive");
    require(static_cast<int>(params.angles.size()) == n_angle, ErrorKind::InvalidGeometry,
            "params.angles has " + std::to_string(params.angles.size()) + " entries, expected " +
                std::to_string(n_angle));

    FanbeamGeometry geom;
    geom.d_source = params.d_source;
    geom.d_detector = detector_distance(params.d_source, n_detector, image_size);
    require(geom.d_detector > 0.0, ErrorKind::InvalidGeometry,
            "derived d_detector is not positive (" + std::to_string(geom.d_detector) + ")");
    geom.n_detector = n_detector;
    geom.s_detector = 1.0;
    geom.n_angle = n_angle;
    geom.angles = params.angles;
    geom.image_size = image_size;
    geom.validate();
    return geom;
}

std::vector<Ray> enumerate_rays(const FanbeamGeometry& geom, int angle_index) {
    require(angle_index >= 0 && angle_index < geom.n_angle, ErrorKind::InvalidArgument,
            "angle index " + std::to_string(angle_index) + " out of range");
    const double phi = geom.angles[static_cast<std::size_t>(angle_index)];
    const double c = std::cos(phi);
    const double s = std::sin(phi);

    std::vector<Ray> rays(static_cast<std::size_t>(geom.n_detector));
    for (int j = 0; j < geom.n_detector; ++j) {
        const double t = geom.detector_offset(j);
        Ray& ray = rays[static_cast<std::size_t>(j)];
        ray.source_point = {geom.d_source * c, geom.d_source * s};
        ray.detector_point = {-geom.d_detector * c - t * s, -geom.d_detector * s + t * c};
    }
    return rays;
}

} // namespace fanbeam
