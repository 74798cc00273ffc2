#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "fanbeam/fbp.hpp"
#include "fanbeam/geometry.hpp"
#include "fanbeam/grid.hpp"
#include "fanbeam/projector.hpp"

namespace fanbeam {

enum class EnhancerKind { Identity, ClampNonneg, GaussianSmooth };

std::string_view to_string(EnhancerKind kind) noexcept;
EnhancerKind enhancer_from_string(std::string_view name);

/// Image-to-image map applied before every data-consistency layer.
using Enhancer = std::function<Image(const Image&)>;

struct EnhancerSpec {
    EnhancerKind kind = EnhancerKind::Identity;
    double sigma = 1.0; ///< GaussianSmooth only, in pixels

    friend bool operator==(const EnhancerSpec&, const EnhancerSpec&) = default;
};

Enhancer make_enhancer(const EnhancerSpec& spec);

/// Separable Gaussian blur truncated at 3 sigma, edges replicated.
Image gaussian_smooth(const Image& image, double sigma);

struct ReconConfig {
    /// One data-consistency weight per iteration.
    std::vector<double> lambdas{1.1, 1.3, 1.4, 0.08};
    EnhancerSpec enhancer{};
    bool use_bias_correction = false;

    void validate() const;
};

/// Fitted forward model and its FBP, shared by every layer of the iteration.
class ReconOperators {
public:
    ReconOperators(FanbeamGeometry geom, double s_fwd, FbpConfig fbp, ProjectorOptions projector = {},
                   std::shared_ptr<const BiasCorrection> bias = nullptr);

    const FanbeamGeometry& geometry() const noexcept { return geom_; }
    double s_fwd() const noexcept { return s_fwd_; }
    const FbpConfig& fbp_config() const noexcept { return fbp_; }
    bool has_bias() const noexcept { return bias_ != nullptr; }

    /// Corrected forward model when a bias is attached, plain otherwise.
    Sinogram forward(const Image& x) const;
    Image fbp(const Sinogram& y) const;

    /// Copy without the bias.
    ReconOperators uncorrected() const;

private:
    FanbeamGeometry geom_;
    double s_fwd_;
    FbpConfig fbp_;
    ProjectorOptions projector_;
    std::shared_ptr<const BiasCorrection> bias_;
    std::shared_ptr<const RampFilter> filter_;
};

/// x - lambda * FBP(F x - y).
Image dc_layer(const Image& x, const Sinogram& y, double lambda, const ReconOperators& ops);

/// Per-iteration diagnostics: ||F x_k - y|| for k = 0..K, x_0 being FBP(y).
struct ReconTrace {
    std::vector<double> residual_norms;
};

/// x_0 = FBP(y); x_k = DC_{lambda_k, y}(enhance(x_{k-1})). With the bias
/// enabled in cfg, ops must carry one and F is the corrected model throughout.
Image iterative_reconstruct(const Sinogram& y, const ReconConfig& cfg, const ReconOperators& ops,
                            ReconTrace* trace = nullptr);

/// Same, with a caller-supplied enhancer instead of cfg.enhancer.
Image iterative_reconstruct(const Sinogram& y, const ReconConfig& cfg, const ReconOperators& ops,
                            const Enhancer& enhancer, ReconTrace* trace = nullptr);

/// y - F x, the data-consistency error of a reconstruction.
Sinogram sinogram_residual(const Sinogram& y, const Image& x, const ReconOperators& ops);

Image ensemble_average(std::span<const Image> reconstructions);

double rmse(const Image& a, const Image& b);
double max_abs_diff(const Image& a, const Image& b);

} // namespace fanbeam
