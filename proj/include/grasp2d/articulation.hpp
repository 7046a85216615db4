#pragma once

#include <Eigen/Dense>
#include <vector>

#include "grasp2d/body.hpp"

namespace grasp2d {

struct World;

// One revolute joint of a fixed-base serial tree. The child link's frame has
// its origin at the joint; link geometry extends from there.
struct JointDef {
    int parent_link = -1;      // -1 means the articulation base body
    Vec2 anchor_in_parent;     // joint position in the parent's frame
    double zero_offset = 0.0;  // child angle relative to parent at q = 0
    double axis_sign = 1.0;    // +1/-1: maps joint coordinate to relative rotation
    double q_min = -kPi;
    double q_max = kPi;
    double torque_limit = 2.5;   // N*m
    double damping = 0.1;        // N*m*s/rad
};

// Fixed-base planar articulated tree in reduced coordinates. Link bodies in
// the owning World mirror the joint state after every step; contact impulses
// are mapped into joint space through point Jacobians.
class Articulation {
  public:
    Articulation(BodyId base_body, std::vector<BodyId> link_bodies,
                 std::vector<JointDef> joints);

    int dof() const { return static_cast<int>(joints_.size()); }
    BodyId baseBody() const { return base_body_; }
    const std::vector<BodyId>& linkBodies() const { return link_bodies_; }
    const std::vector<JointDef>& joints() const { return joints_; }

    const Eigen::VectorXd& q() const { return q_; }
    const Eigen::VectorXd& dq() const { return dq_; }
    void setState(const Eigen::VectorXd& q, const Eigen::VectorXd& dq);
    Eigen::VectorXd& mutableDq() { return dq_; }
    void addDq(const Eigen::VectorXd& delta) { dq_ += delta; }

    // torque accumulated for the next step only, clamped to the joint limit
    void addJointTorques(const Eigen::VectorXd& tau);
    const Eigen::VectorXd& pendingTorques() const { return tau_; }
    void clearTorques() { tau_.setZero(); }

    // joint-space mass matrix at the current q (requires synced link poses)
    Eigen::MatrixXd massMatrix(const World& world) const;
    Eigen::MatrixXd massMatrixInverse(const World& world) const;

    // d(world point on link)/dq, 2 x dof; point given in world coordinates
    Eigen::Matrix<double, 2, Eigen::Dynamic> pointJacobian(const World& world, int link_index,
                                                           Vec2 world_point) const;

    // write link poses/twists derived from (q, dq) into the world's bodies
    void syncLinkBodies(World& world) const;

    // q += dt*dq, then exact projection onto joint limits
    void integrate(double dt);

    bool onPath(int link_index, int joint_index) const {
        return path_mask_[static_cast<size_t>(link_index)] & (1u << joint_index);
    }

  private:
    BodyId base_body_;
    std::vector<BodyId> link_bodies_;
    std::vector<JointDef> joints_;
    std::vector<unsigned> path_mask_;  // per link: bitmask of joints between base and link
    Eigen::VectorXd q_, dq_, tau_;
};

}  // namespace grasp2d
