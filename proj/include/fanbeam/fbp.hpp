#pragma once

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "fanbeam/geometry.hpp"
#include "fanbeam/grid.hpp"
#include "fanbeam/parallel.hpp"

namespace fanbeam {

enum class FilterKind { HammingRamp, PureRamp };

std::string_view to_string(FilterKind kind) noexcept;
FilterKind filter_from_string(std::string_view name);

struct FbpConfig {
    double s_fbp = 1.0;
    FilterKind filter = FilterKind::HammingRamp;
    /// Zeros appended to each detector row before filtering; 0 selects
    /// n_detector. An explicit value must be at least n_detector.
    int padding = 0;
    ExecPolicy exec{};
};

/// Spatial taps of the band-limited ramp for offsets -(n-1)..(n-1), in units of
/// s_detector^-2. The pure ramp is sampled directly (1/4 at 0, -1/(pi k)^2 at
/// odd k, 0 at even k). The Hamming variant is the inverse DFT of the windowed
/// response on the padded grid used for filtering.
std::vector<double> fbp_filter_kernel(int n, FilterKind filter);

/// Hamming window 0.54 + 0.46 cos(pi w / w_max) for |w| <= w_max.
double hamming_window(double w, double w_max);

/// Ramp filter for detector rows of fixed length, applied by FFT
/// multiplication on a zero-padded power-of-two grid (linear convolution).
class RampFilter {
public:
    RampFilter(int n_detector, FilterKind filter, int padding = 0);
    ~RampFilter();
    RampFilter(RampFilter&&) noexcept;
    RampFilter& operator=(RampFilter&&) noexcept;
    RampFilter(const RampFilter&) = delete;
    RampFilter& operator=(const RampFilter&) = delete;

    int n_detector() const noexcept { return n_detector_; }
    int padded_length() const noexcept { return padded_; }

    /// Real frequency response on bins 0..padded_length/2. Bin 0 is exactly 0.
    std::span<const double> response() const noexcept { return response_; }

    /// Unwindowed ramp response on the same bins (the DFT of the spatial taps).
    std::span<const double> ramp_response() const noexcept { return ramp_response_; }

    /// Linear convolution of one detector row with the kernel, in place.
    /// Safe to call concurrently.
    void apply(std::span<double> row) const;

    /// Circular convolution of a full padded-length signal.
    std::vector<double> apply_periodic(std::span<const double> signal) const;

private:
    struct Plans;
    int n_detector_ = 0;
    int padded_ = 0;
    std::vector<double> response_;
    std::vector<double> ramp_response_;
    std::unique_ptr<Plans> plans_;
};

/// Flat-detector fanbeam FBP:
///  1. reweight detector sample j by D / sqrt(D^2 + t_j^2), D = d_source + d_detector;
///  2. ramp-filter each view along the detector;
///  3. for every pixel and view, project the pixel center onto the detector,
///     interpolate linearly and weight by 1/U^2, U being the pixel's distance
///     from the source along the central ray divided by d_source;
///  4. sum over views with weight 2*pi/n_angle and scale by s_fbp.
Image fbp_reconstruct(const Sinogram& sino, const FanbeamGeometry& geom, const FbpConfig& cfg);

/// Same as fbp_reconstruct, reusing a filter built for geom.n_detector.
Image fbp_reconstruct(const Sinogram& sino, const FanbeamGeometry& geom, const FbpConfig& cfg,
                      const RampFilter& filter);

} // namespace fanbeam
