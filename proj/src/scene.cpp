#include "grasp2d/scene.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace grasp2d {

const std::vector<ObjectKind>& allObjectKinds() {
    static const std::vector<ObjectKind> kinds = {ObjectKind::Disk, ObjectKind::Ring,
                                                  ObjectKind::Bar, ObjectKind::Tee,
                                                  ObjectKind::Ell};
    return kinds;
}

std::string objectKindName(ObjectKind kind) {
    switch (kind) {
        case ObjectKind::Disk: return "disk";
        case ObjectKind::Ring: return "ring";
        case ObjectKind::Bar: return "bar";
        case ObjectKind::Tee: return "tee";
        case ObjectKind::Ell: return "ell";
    }
    return "disk";
}

ObjectKind objectKindFromName(const std::string& name) {
    for (ObjectKind k : allObjectKinds())
        if (objectKindName(k) == name) return k;
    throw std::invalid_argument("unknown object kind: " + name);
}

namespace {

void shiftShape(Shape& s, Vec2 d) {
    if (auto* c = std::get_if<Circle>(&s)) {
        c->center += d;
    } else if (auto* k = std::get_if<Capsule>(&s)) {
        k->a += d;
        k->b += d;
    } else {
        for (Vec2& v : std::get<Polygon>(s).vertices) v += d;
    }
}

// recenters fixtures on the compound centroid and sets mass properties
RigidBody assembleObject(std::vector<Shape> fixtures, double mass) {
    double area = 0.0;
    Vec2 centroid{0.0, 0.0};
    for (const Shape& s : fixtures) {
        const ShapeMass m = shapeMass(s);
        area += m.area;
        centroid += m.area * m.centroid;
    }
    centroid = centroid / area;
    for (Shape& s : fixtures) shiftShape(s, -centroid);

    const double density = mass / area;
    double inertia = 0.0;
    for (const Shape& s : fixtures) {
        const ShapeMass m = shapeMass(s);
        inertia += density * (m.second_moment + m.area * m.centroid.norm2());
    }
    RigidBody body;
    body.type = BodyType::Dynamic;
    body.fixtures = std::move(fixtures);
    body.setMass(mass, inertia);
    return body;
}

}  // namespace

RigidBody makeObject(ObjectKind kind) {
    switch (kind) {
        case ObjectKind::Disk:
            return assembleObject({Circle{{0.0, 0.0}, 0.025}}, 0.1);
        case ObjectKind::Ring:
            // annulus drawn by the renderer; collision uses the outer disk
            return assembleObject({Circle{{0.0, 0.0}, 0.03}}, 0.06);
        case ObjectKind::Bar:
            return assembleObject({makeBox({0.0, 0.0}, 0.045, 0.01)}, 0.1);
        case ObjectKind::Tee:
            return assembleObject({makeBox({0.0, 0.025}, 0.04, 0.01),
                                   makeBox({0.0, -0.02}, 0.01, 0.035)},
                                  0.12);
        case ObjectKind::Ell:
            return assembleObject({makeBox({0.0, 0.03}, 0.01, 0.035),
                                   makeBox({0.025, -0.015}, 0.035, 0.01)},
                                  0.12);
    }
    throw std::invalid_argument("unknown object kind");
}

double shapeDistance(const Shape& a, const Transform& xfa, const Shape& b, const Transform& xfb) {
    auto corePoints = [](const Shape& s, double& radius) -> std::vector<Vec2> {
        if (const auto* c = std::get_if<Circle>(&s)) {
            radius = c->radius;
            return {c->center};
        }
        if (const auto* k = std::get_if<Capsule>(&s)) {
            radius = k->radius;
            // a few interior samples tighten the estimate for long capsules
            return {k->a, 0.5 * (k->a + k->b), k->b};
        }
        radius = 0.0;
        return std::get<Polygon>(s).vertices;
    };
    double ra = 0.0, rb = 0.0;
    const auto pa = corePoints(a, ra);
    const auto pb = corePoints(b, rb);
    double best = std::numeric_limits<double>::infinity();
    for (const Vec2& p : pa)
        best = std::min(best, signedDistance(b, xfb.applyInv(xfa.apply(p))) - ra);
    for (const Vec2& p : pb)
        best = std::min(best, signedDistance(a, xfa.applyInv(xfb.apply(p))) - rb);
    return best;
}

BodyId instantiatePreGrasp(World& world, const PreGrasp& pg, const HandConfig& hand,
                           HandModel& model_out) {
    RigidBody obj = makeObject(pg.kind);
    obj.position = pg.object_position;
    obj.angle = pg.object_angle;
    const BodyId object = world.addBody(std::move(obj));
    model_out = buildHand(world, hand, Transform(pg.hand_position, pg.hand_angle), pg.q0);
    return object;
}

namespace {

double supportRadius(const RigidBody& obj, Vec2 dir) {
    double r = -std::numeric_limits<double>::infinity();
    for (const Shape& s : obj.fixtures) r = std::max(r, dot(supportPoint(s, dir), dir));
    return r;
}

// minimum distance from the palm fixture to the object surface
double palmGap(const World& world, const HandModel& model, BodyId object) {
    const RigidBody& palm = world.body(model.palm);
    const RigidBody& obj = world.body(object);
    double best = std::numeric_limits<double>::infinity();
    for (const Shape& sp : palm.fixtures)
        for (const Shape& so : obj.fixtures)
            best = std::min(best, shapeDistance(sp, palm.transform(), so, obj.transform()));
    return best;
}

bool handPenetratesObject(const World& world, const HandModel&, BodyId object) {
    for (const Contact& c : detectContacts(world)) {
        if (c.penetration <= 0.0) continue;
        if (c.body_a == object || c.body_b == object) return true;
    }
    return false;
}

}  // namespace

std::vector<PreGrasp> samplePreGrasps(ObjectKind kind, int n, std::uint64_t seed,
                                      const HandConfig& hand, const PreGraspSampler& sampler) {
    if (n <= 0) throw std::invalid_argument("n must be > 0");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);

    const RigidBody reference = makeObject(kind);
    std::vector<PreGrasp> out;
    out.reserve(static_cast<size_t>(n));
    long rejected = 0;
    while (static_cast<int>(out.size()) < n) {
        if (rejected > 100L * n)
            throw std::runtime_error("pre-grasp sampling failed: object does not fit the hand");

        const double phi = 2.0 * kPi * u01(rng);
        const double standoff =
            sampler.standoff_min + (sampler.standoff_max - sampler.standoff_min) * u01(rng);
        const double jitter = sampler.heading_jitter * (2.0 * u01(rng) - 1.0);

        const Vec2 u{std::cos(phi), std::sin(phi)};
        const double rs = supportRadius(reference, u);

        PreGrasp pg;
        pg.kind = kind;
        pg.id = static_cast<int>(out.size());
        pg.hand_angle = std::atan2(-u.y, -u.x) + jitter;  // facing the object centroid
        pg.hand_position = (rs + standoff + hand.palm_half_thickness) * u;

        // correct for jitter so the palm-to-surface gap equals the sampled standoff
        {
            World probe;
            HandModel model;
            const BodyId object = instantiatePreGrasp(probe, pg, hand, model);
            const double gap = palmGap(probe, model, object);
            pg.hand_position += (standoff - gap) * u;
        }

        World world;
        HandModel model;
        const BodyId object = instantiatePreGrasp(world, pg, hand, model);
        if (handPenetratesObject(world, model, object) ||
            palmGap(world, model, object) < sampler.standoff_min - 1e-9) {
            ++rejected;
            continue;
        }
        out.push_back(pg);
    }
    return out;
}

Dataset splitDataset(std::vector<PreGrasp> pregrasps, double ratio, std::uint64_t seed) {
    if (pregrasps.size() < 2) throw std::invalid_argument("need at least 2 pre-grasps to split");
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("ratio must be in (0, 1)");
    std::vector<int> ids(pregrasps.size());
    std::iota(ids.begin(), ids.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    const size_t n_train =
        static_cast<size_t>(std::ceil(ratio * static_cast<double>(pregrasps.size())));
    Dataset ds;
    ds.pregrasps = std::move(pregrasps);
    ds.train_ids.assign(ids.begin(), ids.begin() + static_cast<long>(n_train));
    ds.test_ids.assign(ids.begin() + static_cast<long>(n_train), ids.end());
    std::sort(ds.train_ids.begin(), ds.train_ids.end());
    std::sort(ds.test_ids.begin(), ds.test_ids.end());
    return ds;
}

}  // namespace grasp2d
