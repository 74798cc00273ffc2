#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fanbeam/calibration_set.hpp"
#include "fanbeam/fbp.hpp"
#include "fanbeam/geometry.hpp"
#include "fanbeam/grid.hpp"
#include "fanbeam/projector.hpp"

namespace fanbeam {

enum class ParamBlock { SFwd, DSource, Angles };

std::string_view to_string(ParamBlock block) noexcept;
ParamBlock block_from_string(std::string_view name);

/// Coordinate descent over the parameter blocks of the calibration objective.
///
/// Each block takes gradient steps with its own learning rate. A step that
/// does not lower the objective is rejected, the previous iterate is kept and
/// the rate is halved before retrying; an accepted step multiplies the rate by
/// lr_growth, or replaced by a secant estimate when secant_rates is set.
/// Views are separable in the objective, so every angle carries its
/// own rate and is accepted or rejected on its own view's loss.
struct CoordinateDescentConfig {
    double lr_sfwd = 1e-3;
    double lr_dsource = 1e-1;
    double lr_angle = 1e-4;
    int max_outer_iters = 200;
    /// Stop once an outer iteration lowers the objective by less than this fraction.
    double tol = 1e-12;
    /// The objective counts as zero once below loss_floor times the mean
    /// squared norm of the data sinograms.
    double loss_floor = 1e-28;
    std::vector<ParamBlock> block_order{ParamBlock::SFwd, ParamBlock::DSource, ParamBlock::Angles};
    /// Replace the s_fwd gradient step by its exact minimizer.
    bool sfwd_closed_form = true;
    double lr_growth = 2.0;
    /// Start each d_source and angle step from the secant estimate of the
    /// inverse curvature (previous step over gradient change) when one exists.
    bool secant_rates = true;
    int max_halvings = 40;
    /// Pairs drawn per outer iteration; 0 uses every pair.
    int subsample = 0;
    std::uint64_t seed = 0;
    ProjectorOptions projector{};

    void validate() const;
};

struct LossRecord {
    int iteration = 0;
    double loss = 0.0;

    friend bool operator==(const LossRecord&, const LossRecord&) = default;
};

struct CalibReport {
    CalibParams params;
    double s_fbp = 1.0;
    BiasCorrection bias;
    /// Objective after each accepted outer iteration; entry 0 is the initial value.
    std::vector<LossRecord> loss_history;
    bool converged = false;
    int iterations = 0;
    /// "converged", "max_iterations" or "diverged".
    std::string status;
};

/// (1/M) sum_i ||F[params](x_i) - y_i||^2 over all sinogram entries.
double calibration_loss(const CalibrationSet& pairs, const CalibParams& params,
                        const ProjectorOptions& opts = {});

/// Least-squares s_fwd for fixed geometry: sum <F1 x, y> / sum ||F1 x||^2, F1
/// being the forward operator with unit scale.
double optimal_forward_scale(const CalibrationSet& pairs, const CalibParams& params,
                             const ProjectorOptions& opts = {});

/// Fits the forward model by coordinate descent, then s_fbp, then the bias,
/// in that order.
CalibReport calibrate(const CalibrationSet& pairs, const CalibParams& init,
                      const CoordinateDescentConfig& cfg = {}, const FbpConfig& fbp = {});

/// Only the coordinate-descent stage; s_fbp and bias are left at defaults.
CalibReport fit_forward_model(const CalibrationSet& pairs, const CalibParams& init,
                              const CoordinateDescentConfig& cfg = {});

/// argmin_s (1/M) sum_i ||x_i - s FBP1(y_i)||^2, FBP1 being the reconstruction
/// with unit output scale.
double fit_fbp_scale(const CalibrationSet& pairs, const CalibParams& params, const FbpConfig& fbp = {});

/// b = (1/M) sum_i (F[params](x_i) - y_i).
BiasCorrection estimate_bias(const CalibrationSet& pairs, const CalibParams& params,
                             const ProjectorOptions& opts = {});

} // namespace fanbeam
