#include "fanbeam/fbp.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "fanbeam/error.hpp"

namespace fanbeam {

namespace {

// The FFTW planner is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(void* p) const noexcept { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuffer alloc_real(int n) { return RealBuffer(fftw_alloc_real(static_cast<std::size_t>(n))); }
ComplexBuffer alloc_complex(int n) {
    return ComplexBuffer(fftw_alloc_complex(static_cast<std::size_t>(n)));
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

double ramlak_tap(long k) {
    if (k == 0) return 0.25;
    if (k % 2 == 0) return 0.0;
    const double kd = static_cast<double>(k);
    return -1.0 / (std::numbers::pi * std::numbers::pi * kd * kd);
}

} // namespace

std::string_view to_string(FilterKind kind) noexcept {
    return kind == FilterKind::HammingRamp ? "hamming_ramp" : "pure_ramp";
}

FilterKind filter_from_string(std::string_view name) {
    if (name == "hamming_ramp" || name == "hamming") return FilterKind::HammingRamp;
    if (name == "pure_ramp" || name == "ramp" || name == "ram_lak") return FilterKind::PureRamp;
    throw Error(ErrorKind::InvalidArgument, "unknown filter '" + std::string(name) + "'");
}

double hamming_window(double w, double w_max) {
    return 0.54 + 0.46 * std::cos(std::numbers::pi * w / w_max);
}

struct RampFilter::Plans {
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;

    ~Plans() {
        std::lock_guard lock(planner_mutex());
        if (forward) fftw_destroy_plan(forward);
        if (backward) fftw_destroy_plan(backward);
    }
};

RampFilter::RampFilter(int n_detector, FilterKind filter, int padding)
    : n_detector_(n_detector), plans_(std::make_unique<Plans>()) {
    require(n_detector >= 1, ErrorKind::InvalidArgument, "filter length must be positive");
    if (padding == 0) padding = n_detector;
    require(padding >= n_detector, ErrorKind::InvalidArgument,
            "padding " + std::to_string(padding) + " is shorter than n_detector " +
                std::to_string(n_detector));
    padded_ = std::max(next_pow2(n_detector + padding), 4);
    const int bins = padded_ / 2 + 1;

    RealBuffer in = alloc_real(padded_);
    ComplexBuffer out = alloc_complex(bins);
    {
        std::lock_guard lock(planner_mutex());
        plans_->forward = fftw_plan_dft_r2c_1d(padded_, in.get(), out.get(), FFTW_ESTIMATE);
        plans_->backward = fftw_plan_dft_c2r_1d(padded_, out.get(), in.get(), FFTW_ESTIMATE);
    }
    require(plans_->forward && plans_->backward, ErrorKind::InvalidArgument, "FFT planning failed");

    // Spatial Ram-Lak taps laid out circularly, then transformed. The kernel is
    // even so its spectrum is real.
    //
    // The infinite kernel sums to zero but the truncated one does not. The
    // leftover mass goes into the tap at lag P/2, which a row of n_detector
    // samples padded to P >= 2 n_detector never reaches in linear convolution.
    // This zeroes the DC gain without touching the taps that shape the output;
    // subtracting the residue from every tap instead shifts whole images.
    double tap_sum = 0.0;
    for (int k = 0; k < padded_; ++k) {
        in[k] = ramlak_tap(k <= padded_ / 2 ? k : k - padded_);
        tap_sum += in[k];
    }
    in[padded_ / 2] -= tap_sum;
    fftw_execute_dft_r2c(plans_->forward, in.get(), out.get());

    ramp_response_.resize(static_cast<std::size_t>(bins));
    response_.resize(static_cast<std::size_t>(bins));
    for (int f = 0; f < bins; ++f) ramp_response_[f] = out[f][0];
    ramp_response_[0] = 0.0;
    const double w_max = 0.5 * padded_;
    for (int f = 0; f < bins; ++f) {
        response_[f] = ramp_response_[f];
        if (filter == FilterKind::HammingRamp) response_[f] *= hamming_window(f, w_max);
    }
}

RampFilter::~RampFilter() = default;
RampFilter::RampFilter(RampFilter&&) noexcept = default;
RampFilter& RampFilter::operator=(RampFilter&&) noexcept = default;

std::vector<double> RampFilter::apply_periodic(std::span<const double> signal) const {
    require(signal.size() == static_cast<std::size_t>(padded_), ErrorKind::ShapeMismatch,
            "periodic signal must have the padded length");
    const int bins = padded_ / 2 + 1;
    RealBuffer buf = alloc_real(padded_);
    ComplexBuffer spec = alloc_complex(bins);
    std::copy(signal.begin(), signal.end(), buf.get());
    fftw_execute_dft_r2c(plans_->forward, buf.get(), spec.get());
    for (int f = 0; f < bins; ++f) {
        spec[f][0] *= response_[f];
        spec[f][1] *= response_[f];
    }
    fftw_execute_dft_c2r(plans_->backward, spec.get(), buf.get());
    const double inv = 1.0 / padded_;
    std::vector<double> out(signal.size());
    for (int k = 0; k < padded_; ++k) out[k] = buf[k] * inv;
    return out;
}

void RampFilter::apply(std::span<double> row) const {
    require(row.size() == static_cast<std::size_t>(n_detector_), ErrorKind::ShapeMismatch,
            "row length does not match the filter");
    std::vector<double> padded(static_cast<std::size_t>(padded_), 0.0);
    std::copy(row.begin(), row.end(), padded.begin());
    const auto filtered = apply_periodic(padded);
    std::copy_n(filtered.begin(), row.size(), row.begin());
}

std::vector<double> fbp_filter_kernel(int n, FilterKind filter) {
    require(n >= 1, ErrorKind::InvalidArgument, "kernel length must be positive");
    std::vector<double> taps(static_cast<std::size_t>(2 * n - 1));
    if (filter == FilterKind::PureRamp) {
        for (int k = -(n - 1); k <= n - 1; ++k) taps[static_cast<std::size_t>(k + n - 1)] = ramlak_tap(k);
        return taps;
    }
    // Impulse response of the windowed filter on its own padded grid.
    RampFilter rf(n, filter);
    std::vector<double> impulse(static_cast<std::size_t>(rf.padded_length()), 0.0);
    impulse[0] = 1.0;
    const auto h = rf.apply_periodic(impulse);
    const int p = rf.padded_length();
    for (int k = -(n - 1); k <= n - 1; ++k)
        taps[static_cast<std::size_t>(k + n - 1)] = h[static_cast<std::size_t>((k + p) % p)];
    return taps;
}

Image fbp_reconstruct(const Sinogram& sino, const FanbeamGeometry& geom, const FbpConfig& cfg) {
    geom.validate();
    const RampFilter filter(geom.n_detector, cfg.filter, cfg.padding);
    return fbp_reconstruct(sino, geom, cfg, filter);
}

Image fbp_reconstruct(const Sinogram& sino, const FanbeamGeometry& geom, const FbpConfig& cfg,
                      const RampFilter& filter) {
    geom.validate();
    require(sino.rows() == static_cast<std::size_t>(geom.n_angle) &&
                sino.cols() == static_cast<std::size_t>(geom.n_detector),
            ErrorKind::ShapeMismatch,
            "sinogram is " + std::to_string(sino.rows()) + "x" + std::to_string(sino.cols()) +
                ", geometry expects " + std::to_string(geom.n_angle) + "x" +
                std::to_string(geom.n_detector));
    require(filter.n_detector() == geom.n_detector, ErrorKind::ShapeMismatch,
            "filter was built for a different detector length");
    require(sino.all_finite(), ErrorKind::NonFinite, "sinogram has non-finite entries");
    require(std::isfinite(cfg.s_fbp) && cfg.s_fbp > 0.0, ErrorKind::InvalidArgument,
            "s_fbp must be positive");

    const double d_source = geom.d_source;
    const double dist = geom.source_to_detector();
    const double spacing = geom.s_detector;

    // Steps 1-2. Filtering happens in isocenter units where the element pitch
    // is a = s_detector * d_source / D; the discrete convolution
    // a * sum_k R_k g((n-k) a) with g = h/2 and h ~ 1/a^2 gives the factor 1/(2a).
    Sinogram filtered = sino;
    const double filter_scale = dist / (2.0 * spacing * d_source);
    parallel_for(filtered.rows(), cfg.exec, [&](std::size_t k) {
        auto row = filtered.row(k);
        for (int j = 0; j < geom.n_detector; ++j) {
            const double t = geom.detector_offset(j);
            row[static_cast<std::size_t>(j)] *= dist / std::sqrt(dist * dist + t * t);
        }
        filter.apply(row);
        for (double& v : row) v *= filter_scale;
    });

    // Steps 3-4.
    const int n_pix = geom.image_size;
    const std::size_t n_views = static_cast<std::size_t>(geom.n_angle);
    std::vector<double> cos_phi(n_views), sin_phi(n_views);
    for (std::size_t k = 0; k < n_views; ++k) {
        cos_phi[k] = std::cos(geom.angles[k]);
        sin_phi[k] = std::sin(geom.angles[k]);
    }
    const double center = 0.5 * (geom.n_detector - 1);
    const double last = geom.n_detector - 1;
    const double view_weight = cfg.s_fbp * 2.0 * std::numbers::pi / static_cast<double>(n_views);

    Image out(static_cast<std::size_t>(n_pix), static_cast<std::size_t>(n_pix));
    parallel_for(static_cast<std::size_t>(n_pix), cfg.exec, [&](std::size_t r) {
        for (int c = 0; c < n_pix; ++c) {
            const auto p = pixel_center(static_cast<int>(r), c, n_pix);
            double acc = 0.0;
            for (std::size_t k = 0; k < n_views; ++k) {
                // Depth along the central ray from the source, and lateral offset.
                const double along = d_source - (p[0] * cos_phi[k] + p[1] * sin_phi[k]);
                const double lateral = -p[0] * sin_phi[k] + p[1] * cos_phi[k];
                const double u = along / d_source;
                const double idx = lateral * dist / (along * spacing) + center;
                if (!(idx >= 0.0 && idx <= last)) continue;
                const auto i0 = static_cast<std::size_t>(idx);
                const double frac = idx - static_cast<double>(i0);
                const auto row = filtered.row(k);
                const double v = i0 + 1 < row.size() ? row[i0] + frac * (row[i0 + 1] - row[i0]) : row[i0];
                acc += v / (u * u);
            }
            out(r, static_cast<std::size_t>(c)) = view_weight * acc;
        }
    });
    return out;
}

} // namespace fanbeam
