#include "grasp2d/articulation.hpp"

#include <stdexcept>

#include "grasp2d/world.hpp"

namespace grasp2d {

Articulation::Articulation(BodyId base_body, std::vector<BodyId> link_bodies,
                           std::vector<JointDef> joints)
    : base_body_(base_body), link_bodies_(std::move(link_bodies)), joints_(std::move(joints)) {
    if (link_bodies_.size() != joints_.size())
        throw std::invalid_argument("one joint per link required");
    const int n = dof();
    q_ = Eigen::VectorXd::Zero(n);
    dq_ = Eigen::VectorXd::Zero(n);
    tau_ = Eigen::VectorXd::Zero(n);
    path_mask_.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int parent = joints_[static_cast<size_t>(i)].parent_link;
        if (parent >= i) throw std::invalid_argument("links must be topologically ordered");
        path_mask_[static_cast<size_t>(i)] =
            (1u << i) | (parent >= 0 ? path_mask_[static_cast<size_t>(parent)] : 0u);
    }
}

void Articulation::setState(const Eigen::VectorXd& q, const Eigen::VectorXd& dq) {
    if (q.size() != dof() || dq.size() != dof())
        throw std::invalid_argument("joint state dimension mismatch");
    q_ = q;
    dq_ = dq;
    for (int i = 0; i < dof(); ++i)
        q_[i] = clamp(q_[i], joints_[static_cast<size_t>(i)].q_min,
                      joints_[static_cast<size_t>(i)].q_max);
}

void Articulation::addJointTorques(const Eigen::VectorXd& tau) {
    if (tau.size() != dof()) throw std::invalid_argument("torque dimension mismatch");
    for (int i = 0; i < dof(); ++i) {
        const double lim = joints_[static_cast<size_t>(i)].torque_limit;
        tau_[i] += clamp(tau[i], -lim, lim);
    }
}

void Articulation::syncLinkBodies(World& world) const {
    const RigidBody& base = world.body(base_body_);
    for (int i = 0; i < dof(); ++i) {
        const JointDef& j = joints_[static_cast<size_t>(i)];
        const RigidBody& parent =
            j.parent_link >= 0 ? world.body(link_bodies_[static_cast<size_t>(j.parent_link)])
                               : base;
        RigidBody& link = world.body(link_bodies_[static_cast<size_t>(i)]);
        link.position = parent.transform().apply(j.anchor_in_parent);
        link.angle = parent.angle + j.zero_offset + j.axis_sign * q_[i];
    }
    // twists from the joint velocities
    for (int i = 0; i < dof(); ++i) {
        RigidBody& link = world.body(link_bodies_[static_cast<size_t>(i)]);
        Vec2 v{0.0, 0.0};
        double w = 0.0;
        for (int k = 0; k < dof(); ++k) {
            if (!onPath(i, k)) continue;
            const Vec2 joint_pos = world.body(link_bodies_[static_cast<size_t>(k)]).position;
            const double s = joints_[static_cast<size_t>(k)].axis_sign;
            v += s * dq_[k] * (link.position - joint_pos).perp();
            w += s * dq_[k];
        }
        link.linear_vel = v;
        link.angular_vel = w;
    }
}

Eigen::Matrix<double, 2, Eigen::Dynamic> Articulation::pointJacobian(const World& world,
                                                                     int link_index,
                                                                     Vec2 world_point) const {
    Eigen::Matrix<double, 2, Eigen::Dynamic> jac(2, dof());
    jac.setZero();
    for (int k = 0; k < dof(); ++k) {
        if (!onPath(link_index, k)) continue;
        const Vec2 joint_pos = world.body(link_bodies_[static_cast<size_t>(k)]).position;
        const Vec2 col =
            joints_[static_cast<size_t>(k)].axis_sign * (world_point - joint_pos).perp();
        jac(0, k) = col.x;
        jac(1, k) = col.y;
    }
    return jac;
}

Eigen::MatrixXd Articulation::massMatrix(const World& world) const {
    const int n = dof();
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const RigidBody& link = world.body(link_bodies_[static_cast<size_t>(i)]);
        const Vec2 com = link.worldCom();
        const auto jv = pointJacobian(world, i, com);
        Eigen::VectorXd jw = Eigen::VectorXd::Zero(n);
        for (int k = 0; k < n; ++k)
            if (onPath(i, k)) jw[k] = joints_[static_cast<size_t>(k)].axis_sign;
        m += link.mass * jv.transpose() * jv + link.inertia * jw * jw.transpose();
    }
    // small diagonal guard keeps the matrix invertible in singular configurations
    m.diagonal().array() += 1e-12;
    return m;
}

Eigen::MatrixXd Articulation::massMatrixInverse(const World& world) const {
    return massMatrix(world).inverse();
}

void Articulation::integrate(double dt) {
    q_ += dt * dq_;
    for (int i = 0; i < dof(); ++i) {
        const JointDef& j = joints_[static_cast<size_t>(i)];
        if (q_[i] < j.q_min) {
            q_[i] = j.q_min;
            if (dq_[i] < 0.0) dq_[i] = 0.0;
        } else if (q_[i] > j.q_max) {
            q_[i] = j.q_max;
            if (dq_[i] > 0.0) dq_[i] = 0.0;
        }
    }
}

}  // namespace grasp2d
