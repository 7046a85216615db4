#pragma once

#include <array>

#include "grasp2d/world.hpp"

namespace grasp2d {

// Planar two-finger hand: fixed palm, two links per finger, four torque-
// controlled revolute joints. Joint coordinates are closing-positive for
// both fingers; the mirrored rotation sense is folded into the joint axis.
struct HandConfig {
    double palm_half_width = 0.04;      // along palm-local y
    double palm_half_thickness = 0.01;  // along palm-local x
    double finger_offset = 0.04;        // joint anchors at y = +/- this
    double link_length = 0.06;
    double link_half_thickness = 0.006;
    double link_mass = 0.03;    // kg
    double torque_limit = 2.5;  // N*m
    double damping = 0.1;       // N*m*s/rad
    double q_min = -0.35;       // rad, closing-positive coordinates
    double q_max = 1.8;
    double friction = 0.8;
};

// link order: finger-1 proximal, finger-1 distal, finger-2 proximal, finger-2 distal
struct HandModel {
    HandConfig config;
    BodyId palm = -1;
    std::array<BodyId, 4> links{};
    int articulation = -1;
};

struct HandReading {
    Eigen::Vector4d q;
    Eigen::Vector4d dq;
    // palm-frame contact force on each of palm + 4 links
    std::array<Vec2, 5> contact_forces{};
};

// instantiates palm + fingers in the world at the given base pose and
// initial joint configuration
HandModel buildHand(World& world, const HandConfig& config, const Transform& base_pose,
                    const Eigen::Vector4d& q0);

// link poses for a joint configuration, without touching the world's state;
// index 0 is the palm. Throws if q violates the joint limits.
std::array<Transform, 5> forwardKinematics(const HandModel& model, const World& world,
                                           const Eigen::Vector4d& q);

// torques are clamped to the joint limit and accumulate for the next step
void applyJointTorques(const HandModel& model, World& world, const Eigen::Vector4d& tau);

// encoder and contact-force readings from the most recent step
HandReading readSensors(const HandModel& model, const World& world);

// fingertip positions (distal link tips) in world coordinates
std::array<Vec2, 2> fingertipPositions(const HandModel& model, const World& world);

// mean distance of the two fingertips to the object's surface (0 when touching)
double fingertipMeanDistance(const HandModel& model, const World& world, BodyId object);

// number of hand bodies (palm + links) currently in contact with the object
int handBodiesInContact(const HandModel& model, const World& world, BodyId object);

}  // namespace grasp2d
