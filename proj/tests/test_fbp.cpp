#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fanbeam/calibration.hpp"
#include "fanbeam/error.hpp"
#include "fanbeam/fbp.hpp"
#include "fanbeam/phantom.hpp"
#include "fanbeam/projector.hpp"
#include "oracles.hpp"

using namespace fanbeam;

namespace {

FanbeamGeometry disk_geometry(int n_angle, int n_pix = 64, double offset = 0.0) {
    CalibParams p;
    p.d_source = 2.0 * n_pix;
    p.angles = oracle::equispaced_angles(n_angle, offset);
    return geometry_from_reduced(p, 2 * n_pix, n_angle, n_pix);
}

double masked_relative_error(const Image& est, const Image& ref) {
    const int n = static_cast<int>(ref.rows());
    double num = 0.0, den = 0.0;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            const auto p = pixel_center(r, c, n);
            if (std::hypot(p[0], p[1]) > 0.5 * n) continue;
            num += std::pow(est(r, c) - ref(r, c), 2);
            den += ref(r, c) * ref(r, c);
        }
    return std::sqrt(num / den);
}

/// Error after the least-squares output scale, as in calibration.
double fitted_error(const Sinogram& y, const Image& truth, const FanbeamGeometry& geom, FbpConfig cfg) {
    CalibrationSet set;
    set.pairs.push_back({y, truth});
    cfg.s_fbp = fit_fbp_scale(set, CalibParams{1.0, geom.d_source, geom.angles}, cfg);
    return masked_relative_error(fbp_reconstruct(y, geom, cfg), truth);
}

} // namespace

TEST_CASE("pure ramp taps match the band-limited ramp") {
    const auto taps = fbp_filter_kernel(9, FilterKind::PureRamp);
    REQUIRE(taps.size() == 17u);
    CHECK(taps[8] == 0.25);
    for (int k = 1; k <= 8; ++k) {
        CHECK(taps[static_cast<std::size_t>(8 + k)] == taps[static_cast<std::size_t>(8 - k)]);
        if (k % 2 == 0) CHECK(taps[static_cast<std::size_t>(8 + k)] == 0.0);
    }
    for (int k = 0; k <= 8; ++k)
        CHECK(taps[static_cast<std::size_t>(8 + k)] ==
              doctest::Approx(oracle::ramp_tap_by_quadrature(k)).epsilon(1e-9).scale(1e-3));
    CHECK_THROWS_AS(fbp_filter_kernel(0, FilterKind::PureRamp), Error);
}

TEST_CASE("Hamming kernel is symmetric with a damped center tap") {
    const auto taps = fbp_filter_kernel(33, FilterKind::HammingRamp);
    REQUIRE(taps.size() == 65u);
    for (int k = 1; k <= 32; ++k)
        CHECK(taps[static_cast<std::size_t>(32 + k)] ==
              doctest::Approx(taps[static_cast<std::size_t>(32 - k)]).epsilon(1e-12).scale(1e-6));
    CHECK(taps[32] < 0.25);
    CHECK(taps[32] > 0.0);
}

TEST_CASE("Hamming window is 1 at DC and 0.08 at Nyquist") {
    CHECK(hamming_window(0.0, 5.0) == 1.0);
    CHECK(hamming_window(5.0, 5.0) == doctest::Approx(0.08).epsilon(1e-15));

    const RampFilter ramp(100, FilterKind::HammingRamp);
    const auto nyq = static_cast<std::size_t>(ramp.padded_length() / 2);
    CHECK(ramp.response()[nyq] == doctest::Approx(0.08 * ramp.ramp_response()[nyq]).epsilon(1e-12));
    CHECK(ramp.response()[0] == 0.0);
    CHECK(ramp.padded_length() == 256);
}

TEST_CASE("constant signals are annihilated") {
    for (auto kind : {FilterKind::HammingRamp, FilterKind::PureRamp}) {
        const RampFilter f(300, kind);
        const std::vector<double> ones(static_cast<std::size_t>(f.padded_length()), 3.0);
        const auto out = f.apply_periodic(ones);
        CHECK(std::sqrt(squared_norm(out)) <= 1e-10 * std::sqrt(squared_norm(ones)));
    }
}

TEST_CASE("row filtering is the linear convolution with the Ram-Lak taps") {
    const int n = 37;
    std::mt19937_64 eng(3);
    std::normal_distribution<double> nd;
    std::vector<double> row(n);
    for (double& v : row) v = nd(eng);

    std::vector<double> ramp(2 * n - 1);
    for (int k = -(n - 1); k <= n - 1; ++k) ramp[static_cast<std::size_t>(k + n - 1)] = oracle::ramp_tap_by_quadrature(k);

    const RampFilter f(n, FilterKind::PureRamp);
    std::vector<double> filtered = row;
    f.apply(filtered);
    for (int i = 0; i < n; ++i) {
        double direct = 0.0;
        for (int j = 0; j < n; ++j) direct += row[static_cast<std::size_t>(j)] * ramp[static_cast<std::size_t>(i - j + n - 1)];
        CHECK(filtered[static_cast<std::size_t>(i)] == doctest::Approx(direct).epsilon(1e-8).scale(1.0));
    }

    // The Hamming variant convolves with its own published taps.
    const RampFilter h(n, FilterKind::HammingRamp);
    const auto taps = fbp_filter_kernel(n, FilterKind::HammingRamp);
    std::vector<double> hf = row;
    h.apply(hf);
    for (int i = 0; i < n; ++i) {
        double direct = 0.0;
        for (int j = 0; j < n; ++j) direct += row[static_cast<std::size_t>(j)] * taps[static_cast<std::size_t>(i - j + n - 1)];
        CHECK(hf[static_cast<std::size_t>(i)] == doctest::Approx(direct).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("filter names and padding rules") {
    CHECK(filter_from_string("hamming_ramp") == FilterKind::HammingRamp);
    CHECK(filter_from_string("pure_ramp") == FilterKind::PureRamp);
    CHECK(filter_from_string("ram_lak") == FilterKind::PureRamp);
    CHECK(to_string(FilterKind::HammingRamp) == "hamming_ramp");
    CHECK_THROWS_AS(filter_from_string("shepp"), Error);
    CHECK_THROWS_AS(RampFilter(64, FilterKind::PureRamp, 10), Error);
    CHECK(RampFilter(64, FilterKind::PureRamp, 200).padded_length() == 512);
}

TEST_CASE("zero data reconstructs to zero and the scale is exact") {
    const auto geom = disk_geometry(32);
    FbpConfig cfg;
    const auto zero = fbp_reconstruct(Sinogram(32, 128), geom, cfg);
    for (double v : zero.values()) CHECK(v == 0.0);

    const auto y = analytic_sinogram(centered_disk(20.0), geom, 1.0);
    cfg.s_fbp = 1.5;
    const auto once = fbp_reconstruct(y, geom, cfg);
    cfg.s_fbp = 3.0;
    const auto twice = fbp_reconstruct(y, geom, cfg);
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(twice.values()[i] == 2.0 * once.values()[i]);
}

TEST_CASE("reconstruction is linear in the sinogram") {
    const auto geom = disk_geometry(24, 48);
    std::mt19937_64 eng(11);
    std::normal_distribution<double> nd;
    Sinogram a(24, 96), b(24, 96);
    for (double& v : a.values()) v = nd(eng);
    for (double& v : b.values()) v = nd(eng);
    Sinogram c = a;
    c *= 2.0;
    Sinogram b3 = b;
    b3 *= -3.0;
    c += b3;
    const FbpConfig cfg;
    const auto ra = fbp_reconstruct(a, geom, cfg);
    const auto rb = fbp_reconstruct(b, geom, cfg);
    const auto rc = fbp_reconstruct(c, geom, cfg);
    for (std::size_t i = 0; i < rc.size(); ++i)
        CHECK(rc.values()[i] == doctest::Approx(2.0 * ra.values()[i] - 3.0 * rb.values()[i]).epsilon(1e-10).scale(1.0));
}

TEST_CASE("fitted output scale is close to one for the model's own data") {
    const auto geom = disk_geometry(128);
    const auto truth = rasterize(centered_disk(20.0), 64);
    const auto y = forward_project(truth, geom, 1.0);
    CalibrationSet set;
    set.pairs.push_back({y, truth});
    const double s = fit_fbp_scale(set, CalibParams{1.0, geom.d_source, geom.angles});
    CHECK(s == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("shifting the view set by whole steps leaves a disk unchanged") {
    const auto disk = centered_disk(22.0);
    const double delta = 5.0 * 2.0 * std::numbers::pi / 96.0;
    const auto geom_a = disk_geometry(96);
    const auto geom_b = disk_geometry(96, 64, delta);
    const FbpConfig cfg;
    const auto ra = fbp_reconstruct(analytic_sinogram(disk, geom_a, 1.0), geom_a, cfg);
    const auto rb = fbp_reconstruct(analytic_sinogram(disk.rotated(delta), geom_b, 1.0), geom_b, cfg);
    CHECK(masked_relative_error(rb, ra) < 1e-10);
}

TEST_CASE("rotating views and disk by an arbitrary angle changes the full-view image by under 1%") {
    const auto disk = centered_disk(44.0);
    for (double delta : {0.37, 1.3}) {
        CAPTURE(delta);
        const auto geom_a = disk_geometry(512, 128);
        const auto geom_b = disk_geometry(512, 128, delta);
        const FbpConfig cfg;
        const auto ra = fbp_reconstruct(analytic_sinogram(disk, geom_a, 1.0), geom_a, cfg);
        const auto rb = fbp_reconstruct(analytic_sinogram(disk.rotated(delta), geom_b, 1.0), geom_b, cfg);
        CHECK(masked_relative_error(rb, ra) < 0.01);
    }
}

TEST_CASE("error falls as the number of views grows") {
    // Past about 2n views the pixelated disk edge dominates and the error levels off.
    const auto truth = rasterize(centered_disk(20.0), 64);
    double previous = 1e300;
    for (int n_angle : {16, 32, 64, 128}) {
        const auto geom = disk_geometry(n_angle);
        const double err = fitted_error(forward_project(truth, geom, 1.0), truth, geom, FbpConfig{});
        CHECK(err < previous);
        previous = err;
    }
    CHECK(previous < 0.1);
}

TEST_CASE("output does not depend on the thread count") {
    const auto geom = disk_geometry(40);
    const auto y = analytic_sinogram(centered_disk(15.0), geom, 1.0);
    FbpConfig one, many;
    one.exec.threads = 1;
    many.exec.threads = 6;
    CHECK(fbp_reconstruct(y, geom, one) == fbp_reconstruct(y, geom, many));
}

TEST_CASE("reconstruction rejects bad input") {
    const auto geom = disk_geometry(16);
    const FbpConfig cfg;
    CHECK_THROWS_AS(fbp_reconstruct(Sinogram(16, 127), geom, cfg), Error);
    Sinogram nan_sino(16, 128);
    nan_sino(3, 3) = std::nan("");
    try {
        fbp_reconstruct(nan_sino, geom, cfg);
        FAIL("expected an exception");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NonFinite);
    }
    FbpConfig zero_scale;
    zero_scale.s_fbp = 0.0;
    CHECK_THROWS_AS(fbp_reconstruct(Sinogram(16, 128), geom, zero_scale), Error);
    const RampFilter other(100, FilterKind::HammingRamp);
    CHECK_THROWS_AS(fbp_reconstruct(Sinogram(16, 128), geom, cfg, other), Error);
}
