#include "fanbeam/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include "fanbeam/error.hpp"
#include "projector_detail.hpp"

namespace fanbeam {

namespace {

using detail::PairRefs;

double total(const std::vector<double>& per_view) {
    double acc = 0.0;
    for (double v : per_view) acc += v;
    return acc;
}

bool admissible(const CalibParams& p, const GeometryDims& dims) {
    if (!std::isfinite(p.s_fwd) || p.s_fwd <= 0.0) return false;
    if (!std::isfinite(p.d_source) || p.d_source <= 0.5 * dims.image_size) return false;
    for (double a : p.angles)
        if (!std::isfinite(a)) return false;
    return detector_distance(p.d_source, dims.n_detector, dims.image_size) > 0.0;
}

/// Deterministic subset of pair indices for one outer iteration.
PairRefs draw_subset(const CalibrationSet& set, int count, std::uint64_t seed, int iteration) {
    PairRefs all = detail::all_pairs(set);
    if (count <= 0 || static_cast<std::size_t>(count) >= all.size()) return all;
    std::mt19937_64 engine(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(iteration + 1)));
    // Partial Fisher-Yates with explicit index arithmetic so the draw does not
    // depend on the standard library's distributions.
    for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
        const std::size_t remaining = all.size() - i;
        const std::size_t j = i + static_cast<std::size_t>(engine() % remaining);
        std::swap(all[i], all[j]);
    }
    all.resize(static_cast<std::size_t>(count));
    return all;
}

/// sum <F1 x, y> / sum ||F1 x||^2 over the given pairs, NaN if every
/// projection vanishes.
double least_squares_scale(const PairRefs& pairs, const CalibParams& p, const GeometryDims& dims,
                           const ProjectorOptions& opts) {
    const FanbeamGeometry geom = geometry_from_reduced(p, dims);
    double num = 0.0, den = 0.0;
    for (const auto* pair : pairs) {
        const Sinogram f = forward_project(pair->image, geom, 1.0, opts);
        num += dot(f.values(), pair->sinogram.values());
        den += squared_norm(f.values());
    }
    return den > 0.0 ? num / den : std::numeric_limits<double>::quiet_NaN();
}

/// Last point and gradient of one coordinate, for secant rate estimates.
struct Secant {
    bool valid = false;
    double x = 0.0;
    double g = 0.0;

    /// Inverse curvature along the coordinate from the previous visit, or the
    /// fallback when no positive-curvature estimate is available. Records
    /// (x, g) for the next visit.
    double rate(double x_now, double g_now, double fallback) {
        double r = fallback;
        if (valid) {
            const double dx = x_now - x;
            const double dg = g_now - g;
            if (dx * dg > 0.0 && std::isfinite(dx / dg)) r = dx / dg;
        }
        valid = true;
        x = x_now;
        g = g_now;
        return r;
    }
};

class Optimizer {
public:
    Optimizer(const GeometryDims& dims, const CoordinateDescentConfig& cfg, std::size_t n_angle)
        : dims_(dims), cfg_(cfg), lr_s_(cfg.lr_sfwd), lr_d_(cfg.lr_dsource),
          lr_angle_(n_angle, cfg.lr_angle), angle_secant_(n_angle) {}

    double loss(const PairRefs& pairs, const CalibParams& p) const {
        return total(detail::per_view_loss_on(pairs, p, dims_, cfg_.projector, {}));
    }

    void halve_all() {
        lr_s_ *= 0.5;
        lr_d_ *= 0.5;
        for (double& lr : lr_angle_) lr *= 0.5;
    }

    /// Runs one block. Returns the objective on `pairs` afterwards.
    double step(ParamBlock block, const PairRefs& pairs, CalibParams& p, double current) {
        switch (block) {
        case ParamBlock::SFwd: return step_scale(pairs, p, current);
        case ParamBlock::DSource: return step_source(pairs, p, current);
        case ParamBlock::Angles: return step_angles(pairs, p);
        }
        return current;
    }

private:
    double step_scale(const PairRefs& pairs, CalibParams& p, double current) {
        if (cfg_.sfwd_closed_form) {
            const double s_new = least_squares_scale(pairs, p, dims_, cfg_.projector);
            if (!(std::isfinite(s_new) && s_new > 0.0)) return current;
            CalibParams trial = p;
            trial.s_fwd = s_new;
            const double l = loss(pairs, trial);
            if (l <= current) {
                p = trial;
                return l;
            }
            return current;
        }
        const auto g = detail::gradient_on(pairs, p, dims_, cfg_.projector);
        return line_search(pairs, p, current, lr_s_,
                           [&](CalibParams& t, double lr) { t.s_fwd -= lr * g.s_fwd; });
    }

    double step_source(const PairRefs& pairs, CalibParams& p, double current) {
        const auto g = detail::gradient_on(pairs, p, dims_, cfg_.projector);
        if (g.d_source == 0.0) return current;
        if (cfg_.secant_rates) lr_d_ = source_secant_.rate(p.d_source, g.d_source, lr_d_);
        return line_search(pairs, p, current, lr_d_,
                           [&](CalibParams& t, double lr) { t.d_source -= lr * g.d_source; });
    }

    template <class Update>
    double line_search(const PairRefs& pairs, CalibParams& p, double current, double& lr, Update&& update) {
        for (int h = 0; h <= cfg_.max_halvings; ++h) {
            CalibParams trial = p;
            update(trial, lr);
            if (admissible(trial, dims_)) {
                const double l = loss(pairs, trial);
                if (std::isfinite(l) && l <= current) {
                    p = trial;
                    lr *= cfg_.lr_growth;
                    return l;
                }
            }
            lr *= 0.5;
        }
        return current;
    }

    double step_angles(const PairRefs& pairs, CalibParams& p) {
        const std::size_t n = p.angles.size();
        const auto g = detail::gradient_on(pairs, p, dims_, cfg_.projector);
        std::vector<double> view_loss = detail::per_view_loss_on(pairs, p, dims_, cfg_.projector, {});
        std::vector<char> pending(n, 0);
        for (std::size_t k = 0; k < n; ++k) {
            pending[k] = g.angles[k] != 0.0;
            if (cfg_.secant_rates && pending[k])
                lr_angle_[k] = angle_secant_[k].rate(p.angles[k], g.angles[k], lr_angle_[k]);
        }

        for (int h = 0; h <= cfg_.max_halvings; ++h) {
            if (std::none_of(pending.begin(), pending.end(), [](char c) { return c != 0; })) break;
            CalibParams trial = p;
            for (std::size_t k = 0; k < n; ++k)
                if (pending[k]) trial.angles[k] -= lr_angle_[k] * g.angles[k];
            const auto trial_loss = detail::per_view_loss_on(pairs, trial, dims_, cfg_.projector, pending);
            for (std::size_t k = 0; k < n; ++k) {
                if (!pending[k]) continue;
                if (std::isfinite(trial_loss[k]) && trial_loss[k] <= view_loss[k]) {
                    p.angles[k] = trial.angles[k];
                    view_loss[k] = trial_loss[k];
                    lr_angle_[k] *= cfg_.lr_growth;
                    pending[k] = 0;
                } else {
                    lr_angle_[k] *= 0.5;
                }
            }
        }
        return total(view_loss);
    }

    GeometryDims dims_;
    const CoordinateDescentConfig& cfg_;
    double lr_s_;
    double lr_d_;
    std::vector<double> lr_angle_;
    Secant source_secant_;
    std::vector<Secant> angle_secant_;
};

void check_params(const CalibParams& p, const GeometryDims& dims) {
    require(static_cast<int>(p.angles.size()) == dims.n_angle, ErrorKind::ShapeMismatch,
            "params have " + std::to_string(p.angles.size()) + " angles, data has " +
                std::to_string(dims.n_angle) + " views");
    require(std::isfinite(p.s_fwd) && p.s_fwd > 0.0, ErrorKind::InvalidArgument,
            "s_fwd must be positive");
    geometry_from_reduced(p, dims);
}

} // namespace

std::string_view to_string(ParamBlock block) noexcept {
    switch (block) {
    case ParamBlock::SFwd: return "s_fwd";
    case ParamBlock::DSource: return "d_source";
    case ParamBlock::Angles: return "angles";
    }
    return "unknown";
}

ParamBlock block_from_string(std::string_view name) {
    if (name == "s_fwd") return ParamBlock::SFwd;
    if (name == "d_source") return ParamBlock::DSource;
    if (name == "angles") return ParamBlock::Angles;
    throw Error(ErrorKind::InvalidArgument, "unknown parameter block '" + std::string(name) + "'");
}

void CoordinateDescentConfig::validate() const {
    require(lr_sfwd > 0.0 && lr_dsource > 0.0 && lr_angle > 0.0, ErrorKind::InvalidArgument,
            "learning rates must be positive");
    require(max_outer_iters >= 1, ErrorKind::InvalidArgument, "max_outer_iters must be at least 1");
    require(tol > 0.0, ErrorKind::InvalidArgument, "tol must be positive");
    require(loss_floor >= 0.0, ErrorKind::InvalidArgument, "loss_floor must be nonnegative");
    require(lr_growth >= 1.0, ErrorKind::InvalidArgument, "lr_growth must be at least 1");
    require(max_halvings >= 0, ErrorKind::InvalidArgument, "max_halvings must be non-negative");
    require(subsample >= 0, ErrorKind::InvalidArgument, "subsample must be non-negative");
    require(!block_order.empty(), ErrorKind::InvalidArgument, "block_order is empty");
    for (std::size_t i = 0; i < block_order.size(); ++i)
        for (std::size_t j = i + 1; j < block_order.size(); ++j)
            require(block_order[i] != block_order[j], ErrorKind::InvalidArgument,
                    "block_order lists a block twice");
    require(std::isfinite(projector.step) && projector.step > 0.0, ErrorKind::InvalidArgument,
            "projector step must be positive");
}

double calibration_loss(const CalibrationSet& pairs, const CalibParams& params, const ProjectorOptions& opts) {
    return total(per_view_loss(pairs, params, pairs.dims(), opts));
}

double optimal_forward_scale(const CalibrationSet& pairs, const CalibParams& params,
                             const ProjectorOptions& opts) {
    const double s = least_squares_scale(detail::all_pairs(pairs), params, pairs.dims(), opts);
    require(!std::isnan(s), ErrorKind::Degenerate, "forward projections are all zero");
    return s;
}

CalibReport fit_forward_model(const CalibrationSet& pairs, const CalibParams& init,
                              const CoordinateDescentConfig& cfg) {
    cfg.validate();
    const GeometryDims dims = pairs.dims();
    check_params(init, dims);

    CalibReport report;
    report.params = init;
    const PairRefs everything = detail::all_pairs(pairs);
    Optimizer opt(dims, cfg, init.angles.size());

    double full = opt.loss(everything, report.params);
    report.loss_history.push_back({0, full});
    if (!std::isfinite(full)) {
        report.status = "diverged";
        return report;
    }

    // Scale for deciding that the objective has reached round-off level.
    double data_energy = 0.0;
    for (const auto& pair : pairs.pairs) data_energy += squared_norm(pair.sinogram.values());
    data_energy /= static_cast<double>(pairs.size());
    const double zero_level = cfg.loss_floor * std::max(data_energy, 1.0);

    if (full <= zero_level) {
        report.converged = true;
        report.status = "converged";
        return report;
    }

    report.status = "max_iterations";
    for (int it = 1; it <= cfg.max_outer_iters; ++it) {
        report.iterations = it;
        const PairRefs work = draw_subset(pairs, cfg.subsample, cfg.seed, it);
        const bool is_full = work.size() == everything.size();

        const CalibParams before = report.params;
        double current = is_full ? full : opt.loss(work, report.params);
        for (ParamBlock block : cfg.block_order) current = opt.step(block, work, report.params, current);

        const double next = is_full ? current : opt.loss(everything, report.params);
        if (!std::isfinite(next)) {
            report.params = before;
            report.status = "diverged";
            return report;
        }
        if (next > full) {
            // Only reachable with subsampling: the subset improved, the full set did not.
            report.params = before;
            opt.halve_all();
            continue;
        }

        const double decrease = full - next;
        full = next;
        report.loss_history.push_back({it, full});
        if (full <= zero_level || decrease < cfg.tol * (full + decrease)) {
            report.converged = true;
            report.status = "converged";
            break;
        }
    }
    return report;
}

CalibReport calibrate(const CalibrationSet& pairs, const CalibParams& init,
                      const CoordinateDescentConfig& cfg, const FbpConfig& fbp) {
    CalibReport report = fit_forward_model(pairs, init, cfg);
    if (report.status == "diverged") return report;
    report.s_fbp = fit_fbp_scale(pairs, report.params, fbp);
    report.bias = estimate_bias(pairs, report.params, cfg.projector);
    return report;
}

double fit_fbp_scale(const CalibrationSet& pairs, const CalibParams& params, const FbpConfig& fbp) {
    const GeometryDims dims = pairs.dims();
    const FanbeamGeometry geom = geometry_from_reduced(params, dims);
    FbpConfig unit = fbp;
    unit.s_fbp = 1.0;
    const RampFilter filter(dims.n_detector, unit.filter, unit.padding);
    double num = 0.0, den = 0.0;
    for (const auto& pair : pairs.pairs) {
        const Image rec = fbp_reconstruct(pair.sinogram, geom, unit, filter);
        num += dot(pair.image.values(), rec.values());
        den += squared_norm(rec.values());
    }
    require(den > 0.0, ErrorKind::Degenerate, "unit-scale reconstructions are all zero");
    return num / den;
}

BiasCorrection estimate_bias(const CalibrationSet& pairs, const CalibParams& params,
                             const ProjectorOptions& opts) {
    const GeometryDims dims = pairs.dims();
    const FanbeamGeometry geom = geometry_from_reduced(params, dims);
    Sinogram sum(static_cast<std::size_t>(dims.n_angle), static_cast<std::size_t>(dims.n_detector));
    for (const auto& pair : pairs.pairs) {
        sum += forward_project(pair.image, geom, params.s_fwd, opts);
        sum -= pair.sinogram;
    }
    sum *= 1.0 / static_cast<double>(pairs.size());
    return {std::move(sum)};
}

} // namespace fanbeam
