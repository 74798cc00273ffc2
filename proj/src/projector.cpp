#include "fanbeam/projector.hpp"

#include <cmath>
#include <string>

#include "fanbeam/error.hpp"
#include "fanbeam/jet.hpp"
#include "projector_detail.hpp"
#include "ray_trace.hpp"

namespace fanbeam {

namespace {

void check_image(const Image& image, const FanbeamGeometry& geom) {
    require(image.rows() == image.cols() &&
                image.rows() == static_cast<std::size_t>(geom.image_size),
            ErrorKind::ShapeMismatch,
            "image is " + std::to_string(image.rows()) + "x" + std::to_string(image.cols()) +
                ", geometry expects " + std::to_string(geom.image_size) + "x" +
                std::to_string(geom.image_size));
}

void check_options(const ProjectorOptions& opts) {
    require(std::isfinite(opts.step) && opts.step > 0.0, ErrorKind::InvalidArgument,
            "projector step must be positive");
}

void check_scale(double s_fwd) {
    require(std::isfinite(s_fwd) && s_fwd > 0.0, ErrorKind::InvalidArgument,
            "s_fwd must be positive");
}

void check_dims(const CalibrationSet& pairs, const GeometryDims& dims) {
    const GeometryDims data_dims = pairs.dims();
    require(data_dims.n_detector == dims.n_detector && data_dims.n_angle == dims.n_angle &&
                data_dims.image_size == dims.image_size,
            ErrorKind::ShapeMismatch, "pairs do not match the requested dimensions");
}

} // namespace

namespace detail {

PairRefs all_pairs(const CalibrationSet& set) {
    PairRefs out;
    out.reserve(set.size());
    for (const auto& p : set.pairs) out.push_back(&p);
    return out;
}

} // namespace detail

void CalibrationSet::validate() const {
    require(!pairs.empty(), ErrorKind::InvalidArgument, "calibration set is empty");
    const auto& first = pairs.front();
    require(first.image.rows() == first.image.cols() && first.image.rows() > 0,
            ErrorKind::ShapeMismatch, "calibration images must be square and non-empty");
    require(!first.sinogram.empty(), ErrorKind::ShapeMismatch, "calibration sinograms are empty");
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        require(pairs[i].image.same_shape(first.image) &&
                    pairs[i].sinogram.same_shape(first.sinogram),
                ErrorKind::ShapeMismatch,
                "pair " + std::to_string(i) + " has a different shape than pair 0");
    }
}

GeometryDims CalibrationSet::dims() const {
    validate();
    const auto& first = pairs.front();
    return {static_cast<int>(first.sinogram.cols()), static_cast<int>(first.sinogram.rows()),
            static_cast<int>(first.image.rows())};
}

Sinogram forward_project(const Image& image, const FanbeamGeometry& geom, double s_fwd,
                         const ProjectorOptions& opts) {
    geom.validate();
    check_image(image, geom);
    check_scale(s_fwd);
    check_options(opts);

    Sinogram sino(static_cast<std::size_t>(geom.n_angle), static_cast<std::size_t>(geom.n_detector));
    const auto cfg = detail::make_trace_config(geom.image_size, opts.step);
    const double weight = s_fwd * opts.step;

    parallel_for(static_cast<std::size_t>(geom.n_angle), opts.exec, [&](std::size_t k) {
        const auto frame = detail::make_view_frame(geom.d_source, geom.d_detector, geom.angles[k]);
        std::vector<detail::Sample<double>> samples;
        auto row = sino.row(k);
        for (int j = 0; j < geom.n_detector; ++j) {
            detail::sample_ray(frame, geom.detector_offset(j), cfg, samples);
            double acc = 0.0;
            for (const auto& s : samples) acc += detail::interpolate(image, s);
            row[static_cast<std::size_t>(j)] = weight * acc;
        }
    });
    return sino;
}

Sinogram apply_corrected_forward(const Image& image, const FanbeamGeometry& geom, double s_fwd,
                                 const BiasCorrection& bias, const ProjectorOptions& opts) {
    require(bias.offset.rows() == static_cast<std::size_t>(geom.n_angle) &&
                bias.offset.cols() == static_cast<std::size_t>(geom.n_detector),
            ErrorKind::ShapeMismatch, "bias shape does not match the geometry");
    Sinogram out = forward_project(image, geom, s_fwd, opts);
    out -= bias.offset;
    return out;
}

ParamGradient loss_gradient_params(const CalibrationSet& pairs, const CalibParams& params,
                                   const GeometryDims& dims, const ProjectorOptions& opts) {
    check_dims(pairs, dims);
    return detail::gradient_on(detail::all_pairs(pairs), params, dims, opts);
}

std::vector<double> per_view_loss(const CalibrationSet& pairs, const CalibParams& params,
                                  const GeometryDims& dims, const ProjectorOptions& opts,
                                  std::span<const char> active) {
    check_dims(pairs, dims);
    return detail::per_view_loss_on(detail::all_pairs(pairs), params, dims, opts, active);
}

ParamGradient detail::gradient_on(const PairRefs& pairs, const CalibParams& params,
                                  const GeometryDims& dims, const ProjectorOptions& opts) {
    require(!pairs.empty(), ErrorKind::InvalidArgument, "calibration set is empty");
    check_scale(params.s_fwd);
    check_options(opts);
    const FanbeamGeometry geom = geometry_from_reduced(params, dims);

    using J = Jet<2>; // slot 0: d_source, slot 1: angle of the current view
    const auto cfg = detail::make_trace_config(dims.image_size, opts.step);
    std::vector<const Image*> images;
    for (const auto* p : pairs) images.push_back(&p->image);
    const std::size_t n_views = static_cast<std::size_t>(dims.n_angle);
    const double s = params.s_fwd;

    struct ViewTerms {
        double loss = 0.0, g_s = 0.0, g_d = 0.0, g_phi = 0.0;
    };
    std::vector<ViewTerms> terms(n_views);

    parallel_for(n_views, opts.exec, [&](std::size_t k) {
        const J d_source = J::variable(params.d_source, 0);
        const J d_detector = detail::reduced_detector_distance(d_source, dims.n_detector, dims.image_size);
        const J phi = J::variable(params.angles[k], 1);
        const auto frame = detail::make_view_frame(d_source, d_detector, phi);

        std::vector<detail::Sample<J>> samples;
        std::vector<J> acc(images.size());
        ViewTerms t;
        for (int j = 0; j < dims.n_detector; ++j) {
            detail::sample_ray(frame, geom.detector_offset(j), cfg, samples);
            for (auto& a : acc) a = J(0.0);
            for (const auto& smp : samples)
                for (std::size_t m = 0; m < images.size(); ++m) acc[m] += detail::interpolate(*images[m], smp);
            for (std::size_t m = 0; m < images.size(); ++m) {
                const J f = acc[m] * opts.step; // unscaled forward value
                const double r = s * f.v - pairs[m]->sinogram(k, static_cast<std::size_t>(j));
                t.loss += r * r;
                t.g_s += 2.0 * r * f.v;
                t.g_d += 2.0 * r * s * f.d[0];
                t.g_phi += 2.0 * r * s * f.d[1];
            }
        }
        terms[k] = t;
    });

    const double inv_m = 1.0 / static_cast<double>(pairs.size());
    ParamGradient g;
    g.angles.resize(n_views);
    for (std::size_t k = 0; k < n_views; ++k) {
        g.loss += terms[k].loss;
        g.s_fwd += terms[k].g_s;
        g.d_source += terms[k].g_d;
        g.angles[k] = terms[k].g_phi * inv_m;
    }
    g.loss *= inv_m;
    g.s_fwd *= inv_m;
    g.d_source *= inv_m;
    return g;
}

std::vector<double> detail::per_view_loss_on(const PairRefs& pairs, const CalibParams& params,
                                             const GeometryDims& dims, const ProjectorOptions& opts,
                                             std::span<const char> active) {
    require(!pairs.empty(), ErrorKind::InvalidArgument, "calibration set is empty");
    require(active.empty() || active.size() == static_cast<std::size_t>(dims.n_angle),
            ErrorKind::InvalidArgument, "view mask has the wrong length");
    check_scale(params.s_fwd);
    check_options(opts);
    const FanbeamGeometry geom = geometry_from_reduced(params, dims);

    const auto cfg = detail::make_trace_config(dims.image_size, opts.step);
    std::vector<const Image*> images;
    for (const auto* p : pairs) images.push_back(&p->image);
    const double weight = params.s_fwd * opts.step;
    const double inv_m = 1.0 / static_cast<double>(pairs.size());
    std::vector<double> losses(static_cast<std::size_t>(dims.n_angle), 0.0);

    parallel_for(losses.size(), opts.exec, [&](std::size_t k) {
        if (!active.empty() && !active[k]) return;
        const auto frame = detail::make_view_frame(geom.d_source, geom.d_detector, geom.angles[k]);
        std::vector<detail::Sample<double>> samples;
        std::vector<double> acc(images.size());
        double loss = 0.0;
        for (int j = 0; j < dims.n_detector; ++j) {
            detail::sample_ray(frame, geom.detector_offset(j), cfg, samples);
            std::fill(acc.begin(), acc.end(), 0.0);
            for (const auto& smp : samples)
                for (std::size_t m = 0; m < images.size(); ++m) acc[m] += detail::interpolate(*images[m], smp);
            for (std::size_t m = 0; m < images.size(); ++m) {
                const double r = weight * acc[m] - pairs[m]->sinogram(k, static_cast<std::size_t>(j));
                loss += r * r;
            }
        }
        losses[k] = loss * inv_m;
    });
    return losses;
}

} // namespace fanbeam
