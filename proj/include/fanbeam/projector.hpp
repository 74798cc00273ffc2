#pragma once

#include <span>
#include <vector>

#include "fanbeam/calibration_set.hpp"
#include "fanbeam/geometry.hpp"
#include "fanbeam/grid.hpp"
#include "fanbeam/parallel.hpp"

namespace fanbeam {

struct ProjectorOptions {
    /// Quadrature step along each ray, in pixel units.
    double step = 0.5;
    ExecPolicy exec{};
};

/// Ray-driven forward projection. Entry (k, j) is
/// s_fwd * step * sum_i bilinear(image, p_i), where the p_i are midpoints of
/// equal steps along ray (k, j) inside the disk of radius n_pix/sqrt(2) + step.
Sinogram forward_project(const Image& image, const FanbeamGeometry& geom, double s_fwd,
                         const ProjectorOptions& opts = {});

/// forward_project(...) - bias.
Sinogram apply_corrected_forward(const Image& image, const FanbeamGeometry& geom, double s_fwd,
                                 const BiasCorrection& bias, const ProjectorOptions& opts = {});

/// Objective value and its gradient with respect to (s_fwd, d_source, angles).
struct ParamGradient {
    double loss = 0.0;
    double s_fwd = 0.0;
    double d_source = 0.0;
    std::vector<double> angles;
};

/// Gradient of (1/M) sum_i ||F[params](x_i) - y_i||^2.
///
/// The s_fwd component is analytic (F is linear in s_fwd). The d_source and
/// angle components are exact derivatives of the discrete operator obtained by
/// forward-mode differentiation of the ray sampling and bilinear weights; the
/// detector distance is tied to d_source through the field-of-view relation.
ParamGradient loss_gradient_params(const CalibrationSet& pairs, const CalibParams& params,
                                   const GeometryDims& dims, const ProjectorOptions& opts = {});

/// Contribution of each view to the calibration objective (already divided by
/// M). Views with active[k] == 0 are skipped and reported as 0. An empty mask
/// means all views.
std::vector<double> per_view_loss(const CalibrationSet& pairs, const CalibParams& params,
                                  const GeometryDims& dims, const ProjectorOptions& opts = {},
                                  std::span<const char> active = {});

} // namespace fanbeam
