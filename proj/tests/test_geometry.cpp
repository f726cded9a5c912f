#include <doctest.h>

#include <cmath>
#include <random>

#include "flowplan/geometry.hpp"

using namespace flowplan;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<Vec2> circle_waypoints(double radius, double arc_span,
                                   double step) {
    std::vector<Vec2> wps;
    const int n = static_cast<int>(arc_span * radius / step);
    for (int i = 0; i <= n; ++i) {
        const double phi = arc_span * i / n;
        wps.push_back(Vec2{radius * std::sin(phi),
                           radius * (1.0 - std::cos(phi))});
    }
    return wps;
}

// Dense nearest-point search along the resampled polyline, 1 mm steps.
void brute_force_project(const ReferencePath& path, double x, double y,
                         double& s_best, double& d_best) {
    double best = 1e30;
    const double L = path.total_length();
    for (double s = 0.0; s <= L; s += 0.001) {
        double px, py, h;
        path.to_cartesian(FrenetPose{s, 0.0, 0, 0}, px, py, h);
        const double dist = std::hypot(x - px, y - py);
        if (dist < best) {
            best = dist;
            s_best = s;
            const double tx = std::cos(h), ty = std::sin(h);
            d_best = (x - px) * -ty + (y - py) * tx;
        }
    }
}

} // namespace

TEST_CASE("straight path has zero heading and curvature") {
    auto path = build_reference_path({{0, 0}, {100, 0}}, 1.0);
    CHECK(path.total_length() == doctest::Approx(100.0));
    for (const auto& p : path.samples()) {
        CHECK(p.heading == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(p.curvature == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("quarter circle curvature matches 1/R") {
    const double R = 50.0;
    auto path = build_reference_path(circle_waypoints(R, kPi / 2.0, 0.5), 0.5);
    const auto& samples = path.samples();
    REQUIRE(samples.size() > 20);
    for (std::size_t i = 5; i + 5 < samples.size(); ++i) {
        CHECK(samples[i].curvature == doctest::Approx(1.0 / R).epsilon(0.05));
        CHECK(std::abs(samples[i].curvature - 0.02) < 1e-3);
    }
}

TEST_CASE("fewer than two or coincident waypoints are rejected") {
    CHECK_THROWS_AS(build_reference_path({{1, 1}}, 1.0), PathError);
    CHECK_THROWS_AS(build_reference_path({{0, 0}, {0, 0}, {5, 0}}, 1.0),
                    PathError);
}

TEST_CASE("cartesian to frenet on a straight path is the identity") {
    auto path = build_reference_path({{0, 0}, {100, 0}}, 1.0);
    const auto fp = cart_to_frenet(path, 10.0, 2.0);
    CHECK(fp.s == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(fp.d == doctest::Approx(2.0).epsilon(1e-9));

    const auto on_path = cart_to_frenet(path, 37.25, 0.0);
    CHECK(on_path.d == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("projection agrees with a dense nearest-point search") {
    const double R = 100.0;
    auto path = build_reference_path(circle_waypoints(R, 1.2, 0.5), 0.5);

    for (double offset : {1.0, -1.0}) {
        const double phi = 0.55;
        const double cx = R * std::sin(phi);
        const double cy = R * (1.0 - std::cos(phi));
        // left normal of the tangent (tangent = (cos phi, sin phi))
        const double lx = -std::sin(phi);
        const double ly = std::cos(phi);
        const double qx = cx + offset * lx;
        const double qy = cy + offset * ly;

        const auto fp = cart_to_frenet(path, qx, qy);
        double s_ref, d_ref;
        brute_force_project(path, qx, qy, s_ref, d_ref);
        CHECK(fp.s == doctest::Approx(s_ref).epsilon(1e-3));
        CHECK(fp.d == doctest::Approx(offset).epsilon(1e-3));
        CHECK(fp.d == doctest::Approx(d_ref).epsilon(1e-3));
    }
}

TEST_CASE("frenet to cartesian on a straight path") {
    auto path = build_reference_path({{0, 0}, {100, 0}}, 1.0);
    double x, y, h;
    path.to_cartesian(FrenetPose{10.0, 2.0, 0, 0}, x, y, h);
    CHECK(x == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(y == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(h == doctest::Approx(0.0).epsilon(1e-12));

    // d = 0 lands exactly on a sample
    const auto& sample = path.samples()[7];
    path.to_cartesian(FrenetPose{sample.s, 0.0, 0, 0}, x, y, h);
    CHECK(x == doctest::Approx(sample.x).epsilon(1e-12));
    CHECK(y == doctest::Approx(sample.y).epsilon(1e-12));

    CHECK_THROWS_AS(
        path.to_cartesian(FrenetPose{200.0, 0.0, 0, 0}, x, y, h), PathError);
}

TEST_CASE("round trip is exact for curved paths") {
    const double R = 100.0;
    auto path = build_reference_path(circle_waypoints(R, 1.2, 0.5), 0.5);
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> us(2.0, path.total_length() - 2.0);
    std::uniform_real_distribution<double> ud(-19.0, 19.0);

    for (int trial = 0; trial < 500; ++trial) {
        const double s = us(rng);
        const double d = ud(rng); // |d| * |kappa| < 0.2 here
        double x, y, h;
        path.to_cartesian(FrenetPose{s, d, 0, 0}, x, y, h);
        const auto fp = cart_to_frenet(path, x, y);
        CHECK(std::abs(fp.s - s) < 1e-6);
        CHECK(std::abs(fp.d - d) < 1e-6);
    }
}

TEST_CASE("left of the tangent is always positive d") {
    auto straight = build_reference_path({{0, 0}, {50, 50}}, 0.5);
    const auto fp = cart_to_frenet(straight, 10.0 - 1.0, 10.0 + 1.0);
    CHECK(fp.d > 0.0);

    auto arc = build_reference_path(circle_waypoints(80.0, 1.0, 0.5), 0.5);
    for (double s : {5.0, 20.0, 40.0, 60.0}) {
        double x, y, h;
        arc.to_cartesian(FrenetPose{s, 0.0, 0, 0}, x, y, h);
        const double lx = -std::sin(h), ly = std::cos(h);
        const auto fp_left = cart_to_frenet(arc, x + 2.0 * lx, y + 2.0 * ly);
        CHECK(fp_left.d == doctest::Approx(2.0).epsilon(1e-6));
    }
}

TEST_CASE("points outside the band or beyond the ends are rejected") {
    auto path = build_reference_path({{0, 0}, {100, 0}}, 1.0);
    CHECK(!path.project(50.0, 25.0, 20.0).has_value());
    CHECK(!path.project(-5.0, 0.0, 20.0).has_value());
    CHECK(!path.project(105.0, 1.0, 20.0).has_value());
    CHECK_THROWS_AS(cart_to_frenet(path, 50.0, 25.0), PathError);
}

TEST_CASE("sample_at clamps and extrapolates positions along end tangents") {
    auto path = build_reference_path({{0, 0}, {100, 0}}, 1.0);
    const auto beyond = path.sample_at(120.0);
    CHECK(beyond.x == doctest::Approx(120.0));
    CHECK(beyond.y == doctest::Approx(0.0));
    CHECK(beyond.curvature == doctest::Approx(0.0));
    const auto before = path.sample_at(-10.0);
    CHECK(before.x == doctest::Approx(-10.0));
}
