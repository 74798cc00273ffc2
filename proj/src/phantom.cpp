#include "fanbeam/phantom.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "fanbeam/error.hpp"

namespace fanbeam {

namespace {

/// Maps world points into the frame where the ellipse is the unit disk.
struct UnitDiskFrame {
    double cx, cy, cos_r, sin_r, inv_a, inv_b;

    explicit UnitDiskFrame(const Ellipse& e)
        : cx(e.center[0]), cy(e.center[1]), cos_r(std::cos(e.rotation)), sin_r(std::sin(e.rotation)),
          inv_a(1.0 / e.semi_axes[0]), inv_b(1.0 / e.semi_axes[1]) {}

    std::array<double, 2> point(double x, double y) const {
        const double dx = x - cx;
        const double dy = y - cy;
        return {(cos_r * dx + sin_r * dy) * inv_a, (-sin_r * dx + cos_r * dy) * inv_b};
    }
    std::array<double, 2> direction(double x, double y) const {
        return {(cos_r * x + sin_r * y) * inv_a, (-sin_r * x + cos_r * y) * inv_b};
    }
};

/// Uniform double in [0, 1) built from the top 53 bits, independent of the
/// standard library's distribution implementations.
class UniformSource {
public:
    explicit UniformSource(std::uint64_t seed) : engine_(seed) {}
    double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double in(double lo, double hi) { return lo + (hi - lo) * next(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(next() * (hi - lo + 1)); }

private:
    std::mt19937_64 engine_;
};

Ellipse random_ellipse(UniformSource& rng, double radius, double min_axis, double max_axis,
                       double d_lo, double d_hi) {
    for (;;) {
        Ellipse e;
        const double a = rng.in(min_axis, max_axis);
        const double b = rng.in(min_axis, max_axis);
        const double r = radius * std::sqrt(rng.next());
        const double t = rng.in(0.0, 2.0 * std::numbers::pi);
        e.center = {r * std::cos(t), r * std::sin(t)};
        e.semi_axes = {a, b};
        e.rotation = rng.in(0.0, std::numbers::pi);
        e.density = rng.in(d_lo, d_hi);
        if (r + std::max(a, b) <= radius) return e;
    }
}

} // namespace

void EllipsePhantom::validate() const {
    require(!ellipses.empty(), ErrorKind::InvalidArgument, "phantom needs at least one ellipse");
    for (std::size_t i = 0; i < ellipses.size(); ++i) {
        const auto& e = ellipses[i];
        require(e.semi_axes[0] > 0.0 && e.semi_axes[1] > 0.0, ErrorKind::InvalidArgument,
                "ellipse " + std::to_string(i) + " has a non-positive semi-axis");
        require(std::isfinite(e.center[0]) && std::isfinite(e.center[1]) &&
                    std::isfinite(e.rotation) && std::isfinite(e.density) &&
                    std::isfinite(e.semi_axes[0]) && std::isfinite(e.semi_axes[1]),
                ErrorKind::InvalidArgument, "ellipse " + std::to_string(i) + " is not finite");
    }
}

EllipsePhantom EllipsePhantom::rotated(double angle) const {
    EllipsePhantom out = *this;
    const double c = std::cos(angle);
    const double s = std::sin(angle);
    for (auto& e : out.ellipses) {
        const auto [x, y] = e.center;
        e.center = {c * x - s * y, s * x + c * y};
        e.rotation += angle;
    }
    return out;
}

Image rasterize(const EllipsePhantom& phantom, int n_pix) {
    require(n_pix >= 1, ErrorKind::InvalidArgument, "n_pix must be positive");
    phantom.validate();
    Image img(static_cast<std::size_t>(n_pix), static_cast<std::size_t>(n_pix));
    for (const auto& e : phantom.ellipses) {
        const UnitDiskFrame frame(e);
        for (int r = 0; r < n_pix; ++r)
            for (int c = 0; c < n_pix; ++c) {
                const auto p = pixel_center(r, c, n_pix);
                const auto q = frame.point(p[0], p[1]);
                if (q[0] * q[0] + q[1] * q[1] <= 1.0)
                    img(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) += e.density;
            }
    }
    return img;
}

double line_integral(const EllipsePhantom& phantom, const std::array<double, 2>& a,
                     const std::array<double, 2>& b) {
    const double wx = b[0] - a[0];
    const double wy = b[1] - a[1];
    const double w_len = std::hypot(wx, wy);
    double total = 0.0;
    for (const auto& e : phantom.ellipses) {
        const UnitDiskFrame frame(e);
        const auto q = frame.point(a[0], a[1]);
        const auto v = frame.direction(wx, wy);
        const double vv = v[0] * v[0] + v[1] * v[1];
        const double qv = q[0] * v[0] + q[1] * v[1];
        const double qq = q[0] * q[0] + q[1] * q[1];
        const double disc = qv * qv - vv * (qq - 1.0);
        if (disc <= 0.0) continue;
        // Parameter width of the chord times the world length per unit parameter.
        total += e.density * 2.0 * std::sqrt(disc) / vv * w_len;
    }
    return total;
}

Sinogram analytic_sinogram(const EllipsePhantom& phantom, const FanbeamGeometry& geom, double s_fwd) {
    geom.validate();
    phantom.validate();
    Sinogram sino(static_cast<std::size_t>(geom.n_angle), static_cast<std::size_t>(geom.n_detector));
    for (int k = 0; k < geom.n_angle; ++k) {
        const auto rays = enumerate_rays(geom, k);
        for (int j = 0; j < geom.n_detector; ++j) {
            const auto& ray = rays[static_cast<std::size_t>(j)];
            sino(static_cast<std::size_t>(k), static_cast<std::size_t>(j)) =
                s_fwd * line_integral(phantom, ray.source_point, ray.detector_point);
        }
    }
    return sino;
}

EllipsePhantom centered_disk(double radius, double density) {
    EllipsePhantom p;
    p.ellipses.push_back({{0.0, 0.0}, {radius, radius}, 0.0, density});
    return p;
}

std::vector<EllipsePhantom> random_phantom_suite(const PhantomSuiteOptions& opts, std::uint64_t seed) {
    require(opts.count >= 1 && opts.n_pix >= 4, ErrorKind::InvalidArgument,
            "suite needs count >= 1 and n_pix >= 4");
    require(opts.min_ellipses >= 1 && opts.max_ellipses >= opts.min_ellipses,
            ErrorKind::InvalidArgument, "invalid ellipse count range");
    require(opts.fill_fraction > 0.0 && opts.fill_fraction <= 1.0, ErrorKind::InvalidArgument,
            "fill_fraction must lie in (0, 1]");

    UniformSource rng(seed);
    const double radius = opts.fill_fraction * 0.5 * opts.n_pix;
    std::vector<EllipsePhantom> suite(static_cast<std::size_t>(opts.count));
    for (auto& phantom : suite) {
        const int n = rng.integer(opts.min_ellipses, opts.max_ellipses);
        if (opts.common_body) {
            phantom.ellipses.push_back({{0.0, 0.0}, {0.9 * radius, 0.75 * radius}, 0.0, 1.0});
            for (int i = 0; i < n; ++i) {
                Ellipse e = random_ellipse(rng, 0.6 * radius, 0.05 * radius, 0.2 * radius, 0.02, 0.1);
                if (rng.next() < 0.5) e.density = -e.density;
                phantom.ellipses.push_back(e);
            }
        } else {
            for (int i = 0; i < n; ++i)
                phantom.ellipses.push_back(
                    random_ellipse(rng, radius, 0.08 * radius, 0.45 * radius, 0.2, 1.0));
        }
    }
    return suite;
}

} // namespace fanbeam
