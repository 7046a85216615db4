#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "grasp2d/hand.hpp"
#include "grasp2d/world.hpp"

namespace grasp2d {

enum class ObjectKind { Disk, Ring, Bar, Tee, Ell };

const std::vector<ObjectKind>& allObjectKinds();
std::string objectKindName(ObjectKind kind);
ObjectKind objectKindFromName(const std::string& name);

// object body at the canonical pose (centroid at origin, angle 0), zero twist
RigidBody makeObject(ObjectKind kind);

struct PreGrasp {
    ObjectKind kind = ObjectKind::Disk;
    // poses stored as (x, y, theta)
    Vec2 object_position;
    double object_angle = 0.0;
    Vec2 hand_position;
    double hand_angle = 0.0;
    Eigen::Vector4d q0 = Eigen::Vector4d::Zero();
    int id = 0;
};

struct Dataset {
    std::vector<PreGrasp> pregrasps;
    std::vector<int> train_ids;
    std::vector<int> test_ids;
};

// Hand bases placed around the object: approach angle uniform on [0, 2pi),
// palm-to-surface standoff uniform on [min, max], heading jitter uniform on
// [-0.3, 0.3]. Initially penetrating candidates are rejected and resampled.
struct PreGraspSampler {
    double standoff_min = 0.02;
    double standoff_max = 0.08;
    double heading_jitter = 0.3;
};

std::vector<PreGrasp> samplePreGrasps(ObjectKind kind, int n, std::uint64_t seed,
                                      const HandConfig& hand = HandConfig{},
                                      const PreGraspSampler& sampler = PreGraspSampler{});

Dataset splitDataset(std::vector<PreGrasp> pregrasps, double ratio, std::uint64_t seed);

// exact distance between two posed shape surfaces (<= 0 when touching/overlapping)
double shapeDistance(const Shape& a, const Transform& xfa, const Shape& b, const Transform& xfb);

// instantiates object + hand for a pre-grasp; returns the object's body id
BodyId instantiatePreGrasp(World& world, const PreGrasp& pg, const HandConfig& hand,
                           HandModel& model_out);

}  // namespace grasp2d
