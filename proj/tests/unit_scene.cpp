#include <doctest.h>

#include <set>

#include "grasp2d/scene.hpp"

using namespace grasp2d;

TEST_CASE("object kind names round-trip") {
    for (ObjectKind k : allObjectKinds()) CHECK(objectKindFromName(objectKindName(k)) == k);
    CHECK_THROWS(objectKindFromName("banana"));
}

TEST_CASE("disk is a circle of radius 0.025 and mass 0.1") {
    const RigidBody disk = makeObject(ObjectKind::Disk);
    REQUIRE(disk.fixtures.size() == 1);
    const Circle& c = std::get<Circle>(disk.fixtures[0]);
    CHECK(c.radius == doctest::Approx(0.025));
    CHECK(disk.mass == doctest::Approx(0.1));
    CHECK(disk.inertia > 0.0);
}

TEST_CASE("all objects have positive mass and centered centroids") {
    for (ObjectKind k : allObjectKinds()) {
        const RigidBody obj = makeObject(k);
        CHECK(obj.mass > 0.0);
        CHECK(obj.inertia > 0.0);
        // compound shapes are recentered: area centroid at the body origin
        double area = 0.0;
        Vec2 centroid;
        for (const Shape& s : obj.fixtures) {
            const ShapeMass m = shapeMass(s);
            area += m.area;
            centroid += m.centroid * m.area;
        }
        centroid = centroid / area;
        CHECK(centroid.norm() < 1e-12);
        for (const Shape& s : obj.fixtures) validateShape(s);
    }
}

TEST_CASE("pre-grasp sampling is deterministic and well-formed") {
    const auto a = samplePreGrasps(ObjectKind::Tee, 12, 99);
    const auto b = samplePreGrasps(ObjectKind::Tee, 12, 99);
    REQUIRE(a.size() == 12);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].hand_position.x == b[i].hand_position.x);
        CHECK(a[i].hand_angle == b[i].hand_angle);
        CHECK(a[i].id == static_cast<int>(i));
    }
    const auto c = samplePreGrasps(ObjectKind::Tee, 12, 100);
    bool any_different = false;
    for (size_t i = 0; i < a.size(); ++i)
        any_different = any_different || a[i].hand_position.x != c[i].hand_position.x;
    CHECK(any_different);
}

TEST_CASE("sampled pre-grasps instantiate without penetration at the sampled standoff") {
    const HandConfig hc;
    for (ObjectKind kind : {ObjectKind::Disk, ObjectKind::Bar, ObjectKind::Ell}) {
        for (const PreGrasp& pg : samplePreGrasps(kind, 10, 31, hc)) {
            World world;
            HandModel hand;
            const BodyId obj = instantiatePreGrasp(world, pg, hc, hand);
            // palm-to-object surface gap lies in the configured standoff range
            const RigidBody& palm = world.body(hand.palm);
            const RigidBody& object = world.body(obj);
            double gap = 1e30;
            for (const Shape& sp : palm.fixtures)
                for (const Shape& so : object.fixtures)
                    gap = std::min(gap, shapeDistance(sp, palm.transform(), so,
                                                      object.transform()));
            CHECK(gap >= 0.02 - 1e-6);
            CHECK(gap <= 0.08 + 1e-6);
            // nothing may start in contact
            for (const Contact& c : detectContacts(world)) CHECK(c.penetration <= 0.0);
        }
    }
}

TEST_CASE("split is disjoint, complete, sorted, deterministic, 70/30 sized") {
    auto pgs = samplePreGrasps(ObjectKind::Ring, 20, 5);
    const Dataset d1 = splitDataset(pgs, 0.7, 11);
    const Dataset d2 = splitDataset(pgs, 0.7, 11);
    CHECK(d1.train_ids == d2.train_ids);
    CHECK(d1.train_ids.size() == 14);
    CHECK(d1.test_ids.size() == 6);
    CHECK(std::is_sorted(d1.train_ids.begin(), d1.train_ids.end()));
    std::set<int> all(d1.train_ids.begin(), d1.train_ids.end());
    all.insert(d1.test_ids.begin(), d1.test_ids.end());
    CHECK(all.size() == 20);
    CHECK(*all.begin() == 0);
    CHECK(*all.rbegin() == 19);
}

TEST_CASE("degenerate splits are rejected") {
    auto pgs = samplePreGrasps(ObjectKind::Disk, 2, 1);
    CHECK_THROWS(splitDataset({pgs[0]}, 0.7, 1));
    CHECK_THROWS(splitDataset(pgs, 0.0, 1));
    CHECK_THROWS(splitDataset(pgs, 1.0, 1));
}

TEST_CASE("shape distance is symmetric and matches the circle analytic case") {
    const Shape a = Circle{{0, 0}, 0.02};
    const Shape b = makeBox({0, 0}, 0.03, 0.01);
    const Transform xfa{{0.08, 0.0}, 0.3};
    const Transform xfb{{0.0, 0.0}, -0.2};
    const double dab = shapeDistance(a, xfa, b, xfb);
    const double dba = shapeDistance(b, xfb, a, xfa);
    CHECK(dab == doctest::Approx(dba).epsilon(1e-9));

    const Shape c = Circle{{0, 0}, 0.01};
    const double d = shapeDistance(a, Transform{{0, 0}, 0.0}, c, Transform{{0.1, 0.0}, 0.0});
    CHECK(d == doctest::Approx(0.1 - 0.03));
}
