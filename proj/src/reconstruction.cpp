#include "fanbeam/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fanbeam/error.hpp"

namespace fanbeam {

std::string_view to_string(EnhancerKind kind) noexcept {
    switch (kind) {
    case EnhancerKind::Identity: return "identity";
    case EnhancerKind::ClampNonneg: return "clamp_nonneg";
    case EnhancerKind::GaussianSmooth: return "gaussian_smooth";
    }
    return "unknown";
}

EnhancerKind enhancer_from_string(std::string_view name) {
    if (name == "identity") return EnhancerKind::Identity;
    if (name == "clamp_nonneg") return EnhancerKind::ClampNonneg;
    if (name == "gaussian_smooth") return EnhancerKind::GaussianSmooth;
    throw Error(ErrorKind::InvalidArgument, "unknown enhancer '" + std::string(name) + "'");
}

Image gaussian_smooth(const Image& image, double sigma) {
    require(std::isfinite(sigma) && sigma > 0.0, ErrorKind::InvalidArgument, "sigma must be positive");
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
    double norm = 0.0;
    for (int k = -radius; k <= radius; ++k) {
        const double w = std::exp(-0.5 * (k * k) / (sigma * sigma));
        taps[static_cast<std::size_t>(k + radius)] = w;
        norm += w;
    }
    for (double& w : taps) w /= norm;

    const int rows = static_cast<int>(image.rows());
    const int cols = static_cast<int>(image.cols());
    auto clamp = [](int i, int n) { return std::clamp(i, 0, n - 1); };

    Image tmp(image.rows(), image.cols());
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += taps[static_cast<std::size_t>(k + radius)] *
                       image(static_cast<std::size_t>(r), static_cast<std::size_t>(clamp(c + k, cols)));
            tmp(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
        }
    Image out(image.rows(), image.cols());
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (int k = -radius; k <= radius; ++k)
                acc += taps[static_cast<std::size_t>(k + radius)] *
                       tmp(static_cast<std::size_t>(clamp(r + k, rows)), static_cast<std::size_t>(c));
            out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = acc;
        }
    return out;
}

Enhancer make_enhancer(const EnhancerSpec& spec) {
    switch (spec.kind) {
    case EnhancerKind::Identity: return [](const Image& x) { return x; };
    case EnhancerKind::ClampNonneg:
        return [](const Image& x) {
            Image out = x;
            for (double& v : out.values()) v = std::max(v, 0.0);
            return out;
        };
    case EnhancerKind::GaussianSmooth:
        require(std::isfinite(spec.sigma) && spec.sigma > 0.0, ErrorKind::InvalidArgument,
                "gaussian_smooth needs a positive sigma");
        return [sigma = spec.sigma](const Image& x) { return gaussian_smooth(x, sigma); };
    }
    throw Error(ErrorKind::InvalidArgument, "unknown enhancer");
}

void ReconConfig::validate() const {
    require(!lambdas.empty(), ErrorKind::InvalidArgument, "lambda schedule is empty");
    for (double l : lambdas)
        require(std::isfinite(l) && l >= 0.0, ErrorKind::InvalidArgument,
                "lambda values must be finite and non-negative");
    if (enhancer.kind == EnhancerKind::GaussianSmooth)
        require(std::isfinite(enhancer.sigma) && enhancer.sigma > 0.0, ErrorKind::InvalidArgument,
                "gaussian_smooth needs a positive sigma");
}

ReconOperators::ReconOperators(FanbeamGeometry geom, double s_fwd, FbpConfig fbp, ProjectorOptions projector,
                               std::shared_ptr<const BiasCorrection> bias)
    : geom_(std::move(geom)), s_fwd_(s_fwd), fbp_(fbp), projector_(projector), bias_(std::move(bias)) {
    geom_.validate();
    require(std::isfinite(s_fwd_) && s_fwd_ > 0.0, ErrorKind::InvalidArgument, "s_fwd must be positive");
    require(std::isfinite(fbp_.s_fbp) && fbp_.s_fbp > 0.0, ErrorKind::InvalidArgument,
            "s_fbp must be positive");
    if (bias_)
        require(bias_->offset.rows() == static_cast<std::size_t>(geom_.n_angle) &&
                    bias_->offset.cols() == static_cast<std::size_t>(geom_.n_detector),
                ErrorKind::ShapeMismatch, "bias shape does not match the geometry");
    filter_ = std::make_shared<const RampFilter>(geom_.n_detector, fbp_.filter, fbp_.padding);
}

Sinogram ReconOperators::forward(const Image& x) const {
    if (bias_) return apply_corrected_forward(x, geom_, s_fwd_, *bias_, projector_);
    return forward_project(x, geom_, s_fwd_, projector_);
}

Image ReconOperators::fbp(const Sinogram& y) const { return fbp_reconstruct(y, geom_, fbp_, *filter_); }

ReconOperators ReconOperators::uncorrected() const {
    ReconOperators copy = *this;
    copy.bias_.reset();
    return copy;
}

Image dc_layer(const Image& x, const Sinogram& y, double lambda, const ReconOperators& ops) {
    require(std::isfinite(lambda), ErrorKind::InvalidArgument, "lambda must be finite");
    Sinogram residual = ops.forward(x);
    residual -= y;
    Image correction = ops.fbp(residual);
    correction *= lambda;
    Image out = x;
    out -= correction;
    return out;
}

Sinogram sinogram_residual(const Sinogram& y, const Image& x, const ReconOperators& ops) {
    Sinogram r = y;
    r -= ops.forward(x);
    return r;
}

Image iterative_reconstruct(const Sinogram& y, const ReconConfig& cfg, const ReconOperators& ops,
                            ReconTrace* trace) {
    cfg.validate();
    return iterative_reconstruct(y, cfg, ops, make_enhancer(cfg.enhancer), trace);
}

Image iterative_reconstruct(const Sinogram& y, const ReconConfig& cfg, const ReconOperators& ops,
                            const Enhancer& enhancer, ReconTrace* trace) {
    cfg.validate();
    require(static_cast<bool>(enhancer), ErrorKind::InvalidArgument, "enhancer is empty");
    if (cfg.use_bias_correction)
        require(ops.has_bias(), ErrorKind::InvalidArgument,
                "bias correction requested but the operators carry no bias");
    const ReconOperators active = cfg.use_bias_correction ? ops : ops.uncorrected();

    auto record = [&](const Image& x) {
        if (trace) {
            const Sinogram r = sinogram_residual(y, x, active);
            trace->residual_norms.push_back(std::sqrt(squared_norm(r.values())));
        }
    };
    if (trace) trace->residual_norms.clear();

    Image x = active.fbp(y);
    record(x);
    for (std::size_t k = 0; k < cfg.lambdas.size(); ++k) {
        Image enhanced = enhancer(x);
        require(enhanced.all_finite(), ErrorKind::NonFinite,
                "enhancer produced non-finite values in iteration " + std::to_string(k + 1));
        x = dc_layer(enhanced, y, cfg.lambdas[k], active);
        require(x.all_finite(), ErrorKind::NonFinite,
                "non-finite image after iteration " + std::to_string(k + 1));
        record(x);
    }
    return x;
}

Image ensemble_average(std::span<const Image> reconstructions) {
    require(!reconstructions.empty(), ErrorKind::InvalidArgument, "ensemble is empty");
    Image sum(reconstructions.front().rows(), reconstructions.front().cols());
    for (const auto& r : reconstructions) {
        require(r.same_shape(sum), ErrorKind::ShapeMismatch, "ensemble members differ in shape");
        sum += r;
    }
    sum *= 1.0 / static_cast<double>(reconstructions.size());
    return sum;
}

double rmse(const Image& a, const Image& b) {
    require(a.same_shape(b), ErrorKind::ShapeMismatch, "rmse needs images of equal shape");
    require(!a.empty(), ErrorKind::InvalidArgument, "rmse of empty images");
    double acc = 0.0;
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) {
        const double d = va[i] - vb[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(va.size()));
}

double max_abs_diff(const Image& a, const Image& b) {
    require(a.same_shape(b), ErrorKind::ShapeMismatch, "max_abs_diff needs images of equal shape");
    double m = 0.0;
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(va[i] - vb[i]));
    return m;
}

} // namespace fanbeam
