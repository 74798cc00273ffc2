#include <cmath>
#include <numbers>

#include "doctest.h"
#include "fanbeam/error.hpp"
#include "fanbeam/geometry.hpp"
#include "oracles.hpp"

using namespace fanbeam;

namespace {

CalibParams params_with(double d_source, int n_angle, double offset = 0.0) {
    CalibParams p;
    p.d_source = d_source;
    p.angles = oracle::equispaced_angles(n_angle, offset);
    return p;
}

} // namespace

TEST_CASE("detector distance matches the closed form at the reference size") {
    const auto geom = geometry_from_reduced(params_with(1000.0, 8), 1024, 8, 512);
    const long double closed = oracle::closed_form_detector_distance(1000.0L, 256.0L);
    const long double via_fov = oracle::fov_detector_distance(1000.0L, 256.0L, 1024.0L);
    CHECK(std::abs(geom.d_detector - static_cast<double>(closed)) <= 1e-12 * static_cast<double>(closed));
    CHECK(std::abs(closed - via_fov) <= 1e-12L * closed);
    CHECK(field_of_view_angle(1000.0, 512) == doctest::Approx(std::asin(0.256)).epsilon(1e-15));
    CHECK(geom.s_detector == 1.0);
}

TEST_CASE("detector distance at a 45 degree half fan") {
    // tan(gamma) = 1 when d_source = R * sqrt(2).
    const double d = 256.0 * std::numbers::sqrt2;
    const double dd = detector_distance(d, 1024, 512);
    CHECK(dd == doctest::Approx(1024.0 / 2.0 - d).epsilon(1e-12));
}

TEST_CASE("reference dimensions give m = 131072") {
    const auto geom = geometry_from_reduced(params_with(1000.0, 128), 1024, 128, 512);
    CHECK(geom.sinogram_size() == 131072u);
    CalibParams p = params_with(1000.0, 128);
    CHECK(p.dimension() == 130u);
}

TEST_CASE("invalid reduced parameters are rejected") {
    SUBCASE("source inside the inscribed circle") {
        try {
            geometry_from_reduced(params_with(256.0, 4), 1024, 4, 512);
            FAIL("expected an exception");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::InvalidGeometry);
        }
        CHECK_THROWS_AS(field_of_view_angle(100.0, 512), Error);
    }
    SUBCASE("derived detector distance not positive") {
        // 16 elements cannot cover a 512 pixel circle from any sensible distance.
        CHECK_THROWS_AS(geometry_from_reduced(params_with(1000.0, 4), 16, 4, 512), Error);
    }
    SUBCASE("angle count mismatch") {
        CHECK_THROWS_AS(geometry_from_reduced(params_with(1000.0, 4), 1024, 5, 512), Error);
    }
}

TEST_CASE("geometry validation catches broken invariants") {
    auto geom = geometry_from_reduced(params_with(300.0, 6), 512, 6, 256);
    CHECK_NOTHROW(geom.validate());

    auto narrow = geom;
    narrow.n_detector = geom.n_detector / 2;
    CHECK_THROWS_AS(narrow.validate(), Error);

    auto bad_angles = geom;
    bad_angles.angles.pop_back();
    CHECK_THROWS_AS(bad_angles.validate(), Error);

    auto bad_spacing = geom;
    bad_spacing.s_detector = 0.0;
    CHECK_THROWS_AS(bad_spacing.validate(), Error);

    auto nan_angle = geom;
    nan_angle.angles[2] = std::nan("");
    CHECK_THROWS_AS(nan_angle.validate(), Error);
}

TEST_CASE("central ray at phi = 0 runs along the x axis") {
    const auto geom = geometry_from_reduced(params_with(200.0, 1), 257, 1, 128);
    const auto rays = enumerate_rays(geom, 0);
    REQUIRE(rays.size() == 257u);
    const auto& mid = rays[128];
    CHECK(mid.source_point[0] == doctest::Approx(200.0));
    CHECK(mid.source_point[1] == 0.0);
    CHECK(mid.detector_point[0] == doctest::Approx(-geom.d_detector));
    CHECK(mid.detector_point[1] == 0.0);
    CHECK(oracle::origin_line_distance(mid.source_point, mid.detector_point) == 0.0);
}

TEST_CASE("opposite views are point reflections of each other") {
    CalibParams p;
    p.d_source = 150.0;
    p.angles = {0.0, std::numbers::pi};
    const auto geom = geometry_from_reduced(p, 200, 2, 96);
    const auto a = enumerate_rays(geom, 0);
    const auto b = enumerate_rays(geom, 1);
    for (std::size_t j = 0; j < a.size(); ++j) {
        for (int c = 0; c < 2; ++c) {
            CHECK(b[j].source_point[c] == doctest::Approx(-a[j].source_point[c]).epsilon(1e-12).scale(150.0));
            CHECK(b[j].detector_point[c] == doctest::Approx(-a[j].detector_point[c]).epsilon(1e-12).scale(150.0));
        }
    }
}

TEST_CASE("rays are ordered, pass within d_source and have their foot inside the segment") {
    const auto geom = geometry_from_reduced(params_with(180.0, 7, 0.3), 260, 7, 128);
    for (int k = 0; k < geom.n_angle; ++k) {
        const auto rays = enumerate_rays(geom, k);
        const double phi = geom.angles[static_cast<std::size_t>(k)];
        double previous = -1e300;
        for (const auto& ray : rays) {
            CHECK(oracle::origin_line_distance(ray.source_point, ray.detector_point) <= geom.d_source);
            const double t = oracle::perpendicular_foot_parameter(ray.source_point, ray.detector_point);
            CHECK(t >= 0.0);
            CHECK(t <= 1.0);
            // Offset along (-sin phi, cos phi) grows with j.
            const double along = -std::sin(phi) * ray.detector_point[0] + std::cos(phi) * ray.detector_point[1];
            CHECK(along > previous);
            previous = along;
        }
    }
    CHECK_THROWS_AS(enumerate_rays(geom, 7), Error);
    CHECK_THROWS_AS(enumerate_rays(geom, -1), Error);
}

TEST_CASE("doubling image size, source distance and detector count doubles d_detector") {
    const double base = detector_distance(300.0, 400, 200);
    const double doubled = detector_distance(600.0, 800, 400);
    CHECK(doubled == doctest::Approx(2.0 * base).epsilon(1e-13));
}

TEST_CASE("rebuilding from extracted fields is the identity") {
    const auto p = params_with(333.3, 9, 0.17);
    const auto geom = geometry_from_reduced(p, 300, 9, 160);
    CalibParams back;
    back.s_fwd = 4.2; // does not enter the geometry
    back.d_source = geom.d_source;
    back.angles = geom.angles;
    const auto again = geometry_from_reduced(back, geom.n_detector, geom.n_angle, geom.image_size);
    CHECK(again == geom);
}

TEST_CASE("pixel centers follow the documented convention") {
    const auto tl = pixel_center(0, 0, 4);
    CHECK(tl[0] == -1.5);
    CHECK(tl[1] == 1.5);
    const auto br = pixel_center(3, 3, 4);
    CHECK(br[0] == 1.5);
    CHECK(br[1] == -1.5);
    const auto mid = pixel_center(2, 2, 5);
    CHECK(mid[0] == 0.0);
    CHECK(mid[1] == 0.0);
}
