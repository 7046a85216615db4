#include <doctest.h>

#include <random>

#include "grasp2d/shapes.hpp"

using namespace grasp2d;

namespace {

// Monte-Carlo area / centroid / second-moment oracle over a bounding box
ShapeMass monteCarloMass(const Shape& shape, double extent, int samples, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-extent, extent);
    double hits = 0.0;
    Vec2 sum;
    std::vector<Vec2> inside;
    for (int i = 0; i < samples; ++i) {
        const Vec2 p{u(rng), u(rng)};
        if (signedDistance(shape, p) <= 0.0) {
            hits += 1.0;
            sum += p;
            inside.push_back(p);
        }
    }
    ShapeMass m;
    const double box_area = 4.0 * extent * extent;
    m.area = box_area * hits / samples;
    m.centroid = sum / hits;
    double i2 = 0.0;
    for (Vec2 p : inside) i2 += (p - m.centroid).norm2();
    m.second_moment = box_area * i2 / samples;
    return m;
}

}  // namespace

TEST_CASE("angle wrapping stays in (-pi, pi] and is consistent") {
    CHECK(wrapAngle(0.0) == doctest::Approx(0.0));
    CHECK(wrapAngle(kPi) == doctest::Approx(kPi));
    CHECK(wrapAngle(-kPi) == doctest::Approx(kPi));
    CHECK(wrapAngle(3.0 * kPi) == doctest::Approx(kPi));
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-50.0, 50.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = u(rng);
        const double w = wrapAngle(a);
        CHECK(w > -kPi - 1e-12);
        CHECK(w <= kPi + 1e-12);
        CHECK(std::abs(std::sin(w) - std::sin(a)) < 1e-9);
        CHECK(std::abs(std::cos(w) - std::cos(a)) < 1e-9);
    }
}

TEST_CASE("transforms compose and invert") {
    const Transform xf{{0.3, -0.2}, 1.1};
    const Vec2 p{0.05, -0.07};
    const Vec2 q = xf.apply(p);
    CHECK((xf.applyInv(q) - p).norm() < 1e-14);
}

TEST_CASE("box construction") {
    const Polygon box = makeBox({0.1, 0.2}, 0.03, 0.04);
    REQUIRE(box.vertices.size() == 4);
    CHECK(isConvexCcw(box.vertices));
    const ShapeMass m = shapeMass(box);
    CHECK(m.area == doctest::Approx(4.0 * 0.03 * 0.04));
    CHECK(m.centroid.x == doctest::Approx(0.1));
    CHECK(m.centroid.y == doctest::Approx(0.2));
    // closed-form rectangle second moment about its centroid
    const double w = 0.06, h = 0.08;
    CHECK(m.second_moment == doctest::Approx(w * h * (w * w + h * h) / 12.0));
}

TEST_CASE("circle mass properties") {
    const Circle c{{0.02, -0.01}, 0.05};
    const ShapeMass m = shapeMass(c);
    CHECK(m.area == doctest::Approx(kPi * 0.05 * 0.05));
    CHECK(m.centroid.x == doctest::Approx(0.02));
    CHECK(m.second_moment == doctest::Approx(kPi * std::pow(0.05, 4) / 2.0));
}

TEST_CASE("capsule mass properties match a Monte-Carlo oracle") {
    const Capsule cap{{-0.03, 0.0}, {0.03, 0.0}, 0.02};
    const ShapeMass m = shapeMass(cap);
    const ShapeMass mc = monteCarloMass(cap, 0.06, 400000, 7);
    CHECK(m.area == doctest::Approx(mc.area).epsilon(0.01));
    CHECK(std::abs(m.centroid.x - mc.centroid.x) < 1e-3);
    CHECK(m.second_moment == doctest::Approx(mc.second_moment).epsilon(0.02));
}

TEST_CASE("polygon mass properties match a Monte-Carlo oracle") {
    Polygon tri;
    tri.vertices = {{-0.04, -0.02}, {0.05, -0.03}, {0.01, 0.06}};
    const ShapeMass m = shapeMass(tri);
    const ShapeMass mc = monteCarloMass(tri, 0.08, 400000, 8);
    CHECK(m.area == doctest::Approx(mc.area).epsilon(0.01));
    CHECK(std::abs(m.centroid.x - mc.centroid.x) < 1e-3);
    CHECK(std::abs(m.centroid.y - mc.centroid.y) < 1e-3);
    CHECK(m.second_moment == doctest::Approx(mc.second_moment).epsilon(0.02));
}

TEST_CASE("signed distance: circle analytic") {
    const Circle c{{0.0, 0.0}, 0.025};
    CHECK(signedDistance(c, {0.05, 0.0}) == doctest::Approx(0.025));
    CHECK(signedDistance(c, {0.0, 0.01}) == doctest::Approx(-0.015));
    CHECK(signedDistance(c, {0.0, 0.0}) == doctest::Approx(-0.025));
}

TEST_CASE("signed distance: box faces, corners, interior") {
    const Polygon box = makeBox({0.0, 0.0}, 0.03, 0.02);
    CHECK(signedDistance(box, {0.05, 0.0}) == doctest::Approx(0.02));
    CHECK(signedDistance(box, {0.0, 0.0}) == doctest::Approx(-0.02));
    CHECK(signedDistance(box, {0.04, 0.03}) ==
          doctest::Approx(std::sqrt(0.01 * 0.01 + 0.01 * 0.01)));
}

TEST_CASE("support point maximizes the dot product") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Polygon box = makeBox({0.01, -0.02}, 0.04, 0.03);
    const Capsule cap{{-0.05, 0.01}, {0.03, -0.02}, 0.015};
    for (const Shape& s : {Shape(box), Shape(cap), Shape(Circle{{0.01, 0.0}, 0.03})}) {
        for (int i = 0; i < 200; ++i) {
            const Vec2 d = Vec2{u(rng), u(rng)}.normalized();
            if (d.norm() < 0.5) continue;
            const Vec2 sp = supportPoint(s, d);
            // no surface sample may beat the support point
            for (int j = 0; j < 100; ++j) {
                const Vec2 probe = closestSurfacePoint(s, Vec2{u(rng), u(rng)} * 0.2);
                CHECK(dot(probe, d) <= dot(sp, d) + 1e-9);
            }
        }
    }
}

TEST_CASE("closest surface point lies on the surface") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-0.2, 0.2);
    const Polygon box = makeBox({0.0, 0.0}, 0.05, 0.02);
    const Capsule cap{{-0.04, 0.0}, {0.04, 0.02}, 0.01};
    for (const Shape& s : {Shape(box), Shape(cap), Shape(Circle{{0.0, 0.0}, 0.04})}) {
        for (int i = 0; i < 500; ++i) {
            const Vec2 p{u(rng), u(rng)};
            const Vec2 cp = closestSurfacePoint(s, p);
            if (signedDistance(s, p) > 1e-9) {
                CHECK(std::abs(signedDistance(s, cp)) < 1e-7);
                CHECK((p - cp).norm() == doctest::Approx(signedDistance(s, p)).epsilon(1e-6));
            } else {
                // interior points are returned unchanged
                CHECK((p - cp).norm() == 0.0);
            }
        }
    }
}

TEST_CASE("shape validation rejects degenerate input") {
    CHECK_THROWS(validateShape(Circle{{0, 0}, -0.1}));
    Polygon concave;
    concave.vertices = {{0, 0}, {1, 0}, {0.2, 0.2}, {0, 1}};
    CHECK_THROWS(validateShape(concave));
    Polygon clockwise;
    clockwise.vertices = {{0, 0}, {0, 1}, {1, 0}};
    CHECK_THROWS(validateShape(clockwise));
    CHECK_THROWS(validateShape(Capsule{{0, 0}, {1, 0}, -0.01}));
}

TEST_CASE("bounding radius contains the shape") {
    const Polygon box = makeBox({0.02, 0.01}, 0.05, 0.03);
    const double r = boundingRadius(box);
    for (Vec2 v : box.vertices) CHECK(v.norm() <= r + 1e-12);
}
