#pragma once

#include <vector>

#include "grasp2d/shapes.hpp"

namespace grasp2d {

using BodyId = int;

enum class BodyType {
    Static,           // infinite mass, never moves
    Dynamic,          // free rigid body, 3 dof
    ArticulatedLink,  // pose/twist derived from an articulation's joint state
};

struct RigidBody {
    BodyId id = -1;
    BodyType type = BodyType::Dynamic;

    // pose; angle stored unwrapped
    Vec2 position;
    double angle = 0.0;

    // twist of the body origin
    Vec2 linear_vel;
    double angular_vel = 0.0;

    double mass = 0.0;
    double inertia = 0.0;  // about the center of mass
    double inv_mass = 0.0;
    double inv_inertia = 0.0;
    Vec2 local_com;  // center of mass in the body frame (zero for free bodies)

    std::vector<Shape> fixtures;  // local frame
    double friction = 0.8;

    // accumulated for the next step only
    Vec2 force;
    double torque = 0.0;

    // owning articulation and link slot, or -1
    int articulation = -1;
    int link_index = -1;

    Transform transform() const { return {position, Rot(angle)}; }

    void setMass(double m, double inertia_about_com) {
        mass = m;
        inertia = inertia_about_com;
        inv_mass = m > 0.0 ? 1.0 / m : 0.0;
        inv_inertia = inertia_about_com > 0.0 ? 1.0 / inertia_about_com : 0.0;
    }

    Vec2 worldCom() const { return transform().apply(local_com); }

    Vec2 velocityAt(Vec2 world_point) const {
        return linear_vel + cross(angular_vel, world_point - position);
    }
};

}  // namespace grasp2d
