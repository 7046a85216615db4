#include "grasp2d/hand.hpp"

#include <algorithm>
#include <stdexcept>

namespace grasp2d {

namespace {

RigidBody makeLink(const HandConfig& c) {
    RigidBody link;
    link.type = BodyType::ArticulatedLink;
    // geometry extends from the joint (local origin) along +x
    link.fixtures.push_back(
        makeBox({0.5 * c.link_length, 0.0}, 0.5 * c.link_length, c.link_half_thickness));
    link.local_com = {0.5 * c.link_length, 0.0};
    const double w = 2.0 * c.link_half_thickness;
    link.setMass(c.link_mass, c.link_mass * (c.link_length * c.link_length + w * w) / 12.0);
    link.friction = c.friction;
    return link;
}

}  // namespace

HandModel buildHand(World& world, const HandConfig& c, const Transform& base_pose,
                    const Eigen::Vector4d& q0) {
    HandModel model;
    model.config = c;

    RigidBody palm;
    palm.type = BodyType::Static;
    palm.position = base_pose.p;
    palm.angle = base_pose.q.angle();
    palm.fixtures.push_back(makeBox({0.0, 0.0}, c.palm_half_thickness, c.palm_half_width));
    palm.friction = c.friction;
    model.palm = world.addBody(palm);

    for (int i = 0; i < 4; ++i) model.links[static_cast<size_t>(i)] = world.addBody(makeLink(c));

    std::vector<JointDef> joints(4);
    for (int f = 0; f < 2; ++f) {
        const double side = f == 0 ? 1.0 : -1.0;  // finger 1 on +y
        JointDef proximal;
        proximal.parent_link = -1;
        proximal.anchor_in_parent = {c.palm_half_thickness, side * c.finger_offset};
        proximal.zero_offset = 0.0;
        proximal.axis_sign = -side;  // positive q closes toward the palm centerline
        JointDef distal = proximal;
        distal.parent_link = 2 * f;
        distal.anchor_in_parent = {c.link_length, 0.0};
        for (JointDef* j : {&proximal, &distal}) {
            j->q_min = c.q_min;
            j->q_max = c.q_max;
            j->torque_limit = c.torque_limit;
            j->damping = c.damping;
        }
        joints[static_cast<size_t>(2 * f)] = proximal;
        joints[static_cast<size_t>(2 * f + 1)] = distal;
    }

    Articulation art(model.palm, {model.links[0], model.links[1], model.links[2], model.links[3]},
                     joints);
    art.setState(q0, Eigen::Vector4d::Zero());
    model.articulation = world.addArticulation(std::move(art));
    return model;
}

std::array<Transform, 5> forwardKinematics(const HandModel& model, const World& world,
                                           const Eigen::Vector4d& q) {
    const Articulation& art = world.articulations[static_cast<size_t>(model.articulation)];
    for (int i = 0; i < 4; ++i) {
        const JointDef& j = art.joints()[static_cast<size_t>(i)];
        if (q[i] < j.q_min - 1e-12 || q[i] > j.q_max + 1e-12)
            throw std::out_of_range("joint angle outside limits");
    }
    std::array<Transform, 5> poses;
    const RigidBody& palm = world.body(model.palm);
    poses[0] = palm.transform();
    for (int i = 0; i < 4; ++i) {
        const JointDef& j = art.joints()[static_cast<size_t>(i)];
        const Transform& parent = j.parent_link >= 0 ? poses[static_cast<size_t>(j.parent_link + 1)]
                                                     : poses[0];
        const Vec2 origin = parent.apply(j.anchor_in_parent);
        const double angle =
            std::atan2(parent.q.s, parent.q.c) + j.zero_offset + j.axis_sign * q[i];
        poses[static_cast<size_t>(i + 1)] = Transform(origin, angle);
    }
    return poses;
}

void applyJointTorques(const HandModel& model, World& world, const Eigen::Vector4d& tau) {
    world.articulations[static_cast<size_t>(model.articulation)].addJointTorques(tau);
}

HandReading readSensors(const HandModel& model, const World& world) {
    const Articulation& art = world.articulations[static_cast<size_t>(model.articulation)];
    HandReading r;
    r.q = art.q();
    r.dq = art.dq();

    auto handSlot = [&](BodyId id) -> int {
        if (id == model.palm) return 0;
        for (int i = 0; i < 4; ++i)
            if (model.links[static_cast<size_t>(i)] == id) return i + 1;
        return -1;
    };
    const Rot palm_rot(world.body(model.palm).angle);
    for (const Contact& c : world.last_contacts) {
        const int slot_a = handSlot(c.body_a);
        const int slot_b = handSlot(c.body_b);
        // only hand-vs-other contacts count as sensed forces
        if ((slot_a >= 0) == (slot_b >= 0)) continue;
        const Vec2 impulse =
            c.normal_impulse * c.normal + c.tangent_impulse * c.normal.perp();
        // impulse as computed acts on body b; body a receives the opposite
        const Vec2 force_world = (slot_b >= 0 ? impulse : -1.0 * impulse) / world.dt;
        r.contact_forces[static_cast<size_t>(slot_b >= 0 ? slot_b : slot_a)] +=
            palm_rot.applyInv(force_world);
    }
    return r;
}

std::array<Vec2, 2> fingertipPositions(const HandModel& model, const World& world) {
    std::array<Vec2, 2> tips;
    for (int f = 0; f < 2; ++f) {
        const RigidBody& distal = world.body(model.links[static_cast<size_t>(2 * f + 1)]);
        tips[static_cast<size_t>(f)] = distal.transform().apply({model.config.link_length, 0.0});
    }
    return tips;
}

double fingertipMeanDistance(const HandModel& model, const World& world, BodyId object) {
    const RigidBody& obj = world.body(object);
    const Transform xf = obj.transform();
    double sum = 0.0;
    for (const Vec2& tip : fingertipPositions(model, world)) {
        const Vec2 local = xf.applyInv(tip);
        double d = std::numeric_limits<double>::infinity();
        for (const Shape& s : obj.fixtures) d = std::min(d, signedDistance(s, local));
        sum += std::max(0.0, d);
    }
    return 0.5 * sum;
}

int handBodiesInContact(const HandModel& model, const World& world, BodyId object) {
    auto isHand = [&](BodyId id) {
        if (id == model.palm) return true;
        return std::find(model.links.begin(), model.links.end(), id) != model.links.end();
    };
    std::array<bool, 5> touched{};
    auto slot = [&](BodyId id) -> int {
        if (id == model.palm) return 0;
        for (int i = 0; i < 4; ++i)
            if (model.links[static_cast<size_t>(i)] == id) return i + 1;
        return -1;
    };
    for (const Contact& c : world.last_contacts) {
        if (c.penetration < 0.0) continue;  // speculative pair, not touching
        if (c.body_a == object && isHand(c.body_b)) touched[static_cast<size_t>(slot(c.body_b))] = true;
        if (c.body_b == object && isHand(c.body_a)) touched[static_cast<size_t>(slot(c.body_a))] = true;
    }
    int n = 0;
    for (bool t : touched) n += t ? 1 : 0;
    return n;
}

}  // namespace grasp2d
