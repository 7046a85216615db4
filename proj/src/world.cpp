#include "grasp2d/world.hpp"

#include <stdexcept>

namespace grasp2d {

BodyId World::addBody(RigidBody b) {
    b.id = static_cast<BodyId>(bodies.size());
    bodies.push_back(std::move(b));
    return bodies.back().id;
}

RigidBody& World::body(BodyId id) {
    if (id < 0 || static_cast<size_t>(id) >= bodies.size())
        throw std::out_of_range("unknown body id");
    return bodies[static_cast<size_t>(id)];
}

const RigidBody& World::body(BodyId id) const {
    if (id < 0 || static_cast<size_t>(id) >= bodies.size())
        throw std::out_of_range("unknown body id");
    return bodies[static_cast<size_t>(id)];
}

int World::addArticulation(Articulation art) {
    const int index = static_cast<int>(articulations.size());
    for (size_t i = 0; i < art.linkBodies().size(); ++i) {
        RigidBody& link = body(art.linkBodies()[i]);
        link.type = BodyType::ArticulatedLink;
        link.articulation = index;
        link.link_index = static_cast<int>(i);
        const int parent = art.joints()[i].parent_link;
        excludeCollision(art.linkBodies()[i],
                         parent >= 0 ? art.linkBodies()[static_cast<size_t>(parent)]
                                     : art.baseBody());
    }
    articulations.push_back(std::move(art));
    articulations.back().syncLinkBodies(*this);
    return index;
}

void World::excludeCollision(BodyId a, BodyId b) {
    excluded_.insert({std::min(a, b), std::max(a, b)});
}

bool World::isExcluded(BodyId a, BodyId b) const {
    return excluded_.count({std::min(a, b), std::max(a, b)}) > 0;
}

void World::applyExternalForce(BodyId id, Vec2 f) {
    body(id).force += f;
}

namespace {

// one side of a contact constraint
struct Side {
    RigidBody* body = nullptr;
    Articulation* art = nullptr;
    double sign = 1.0;     // -1 for side a, +1 for side b
    Vec2 r;                // free body: contact point relative to world COM
    Eigen::VectorXd jn, jt;    // articulated: J^T (sign*n) and J^T (sign*t)
    Eigen::VectorXd dqn, dqt;  // articulated: Minv J^T n / t, per unit impulse

    // signed contribution to the relative contact velocity; the relative
    // velocity along n is the sum over both sides (articulated rows carry
    // the sign inside jn/jt already)
    double normalVel(Vec2 n) const {
        if (art) return jn.dot(art->dq());
        if (body->type == BodyType::Static) return 0.0;
        return sign * dot(body->linear_vel + cross(body->angular_vel, r), n);
    }
    double tangentVel(Vec2 t) const {
        if (art) return jt.dot(art->dq());
        if (body->type == BodyType::Static) return 0.0;
        return sign * dot(body->linear_vel + cross(body->angular_vel, r), t);
    }
    // lambda is signed along dir for this side; articulated sides fold the
    // contact sign into jn/jt, so their update lives at the call site
    void applyImpulse(double lambda, Vec2 dir) {
        if (!art && body->type != BodyType::Static) {
            body->linear_vel += lambda * body->inv_mass * dir;
            body->angular_vel += lambda * body->inv_inertia * cross(r, dir);
        }
    }
    void accumEffMass(Vec2 n, Vec2 t, double& kn, double& kt) const {
        if (art) {
            kn += jn.dot(dqn);
            kt += jt.dot(dqt);
        } else if (body->type != BodyType::Static) {
            const double cn = cross(r, n);
            const double ct = cross(r, t);
            kn += body->inv_mass + body->inv_inertia * cn * cn;
            kt += body->inv_mass + body->inv_inertia * ct * ct;
        }
    }
};

struct ContactConstraint {
    Contact* contact;
    Side a, b;
    Vec2 n, t;
    double inv_kn = 0.0, inv_kt = 0.0;
    double mu = 0.0;
    double target = 0.0;  // required post-solve normal velocity
};

struct LimitConstraint {
    Articulation* art;
    Eigen::VectorXd dir;       // generalized direction (+/- e_i)
    Eigen::VectorXd dq_unit;   // Minv * dir
    double inv_k = 0.0;
    double bias = 0.0;  // allowed approach toward the limit
    double impulse = 0.0;
};

}  // namespace

void World::solveContacts(std::vector<Contact>& contacts) {
    // joint-space inverse mass matrices, one per articulation
    std::vector<Eigen::MatrixXd> minv;
    minv.reserve(articulations.size());
    for (const Articulation& art : articulations) minv.push_back(art.massMatrixInverse(*this));

    std::vector<ContactConstraint> cons;
    cons.reserve(contacts.size());
    for (Contact& c : contacts) {
        ContactConstraint cc;
        cc.contact = &c;
        cc.n = c.normal;
        cc.t = c.normal.perp();
        RigidBody& ba = body(c.body_a);
        RigidBody& bb = body(c.body_b);
        cc.mu = std::sqrt(ba.friction * bb.friction);

        auto setup = [&](Side& side, RigidBody& rb, double sign) {
            side.body = &rb;
            side.sign = sign;
            if (rb.type == BodyType::ArticulatedLink) {
                side.art = &articulations[static_cast<size_t>(rb.articulation)];
                const auto jac = side.art->pointJacobian(*this, rb.link_index, c.point);
                const Eigen::Vector2d en(sign * cc.n.x, sign * cc.n.y);
                const Eigen::Vector2d et(sign * cc.t.x, sign * cc.t.y);
                side.jn = jac.transpose() * en;
                side.jt = jac.transpose() * et;
                const Eigen::MatrixXd& mi = minv[static_cast<size_t>(rb.articulation)];
                side.dqn = mi * side.jn;
                side.dqt = mi * side.jt;
            } else {
                side.r = c.point - rb.worldCom();
            }
        };
        // side a sees -n, side b sees +n; fold the sign into the articulated rows
        setup(cc.a, ba, -1.0);
        setup(cc.b, bb, 1.0);

        double kn = 0.0, kt = 0.0;
        cc.a.accumEffMass(cc.n, cc.t, kn, kt);
        cc.b.accumEffMass(cc.n, cc.t, kn, kt);
        cc.inv_kn = kn > 0.0 ? 1.0 / kn : 0.0;
        cc.inv_kt = kt > 0.0 ? 1.0 / kt : 0.0;

        if (c.penetration > contact_slop)
            cc.target = (baumgarte_beta / dt) * (c.penetration - contact_slop);
        else if (c.penetration < 0.0)
            cc.target = c.penetration / dt;  // separated: may close the gap within one step
        cons.push_back(std::move(cc));
    }

    std::vector<LimitConstraint> limits;
    for (size_t ai = 0; ai < articulations.size(); ++ai) {
        Articulation& art = articulations[ai];
        for (int i = 0; i < art.dof(); ++i) {
            const JointDef& j = art.joints()[static_cast<size_t>(i)];
            for (const double s : {1.0, -1.0}) {
                const double gap = s > 0.0 ? art.q()[i] - j.q_min : j.q_max - art.q()[i];
                LimitConstraint lc;
                lc.art = &art;
                lc.dir = Eigen::VectorXd::Zero(art.dof());
                lc.dir[i] = s;
                lc.dq_unit = minv[ai] * lc.dir;
                const double k = lc.dir.dot(lc.dq_unit);
                lc.inv_k = k > 0.0 ? 1.0 / k : 0.0;
                lc.bias = -gap / dt;
                limits.push_back(std::move(lc));
            }
        }
    }

    for (int iter = 0; iter < solver_iterations; ++iter) {
        for (LimitConstraint& lc : limits) {
            const double v = lc.dir.dot(lc.art->dq());
            const double d = (lc.bias - v) * lc.inv_k;
            const double old = lc.impulse;
            lc.impulse = std::max(0.0, old + d);
            lc.art->addDq((lc.impulse - old) * lc.dq_unit);
        }
        for (ContactConstraint& cc : cons) {
            Contact& c = *cc.contact;
            // normal
            {
                const double vn = cc.a.normalVel(cc.n) + cc.b.normalVel(cc.n);
                const double d = (cc.target - vn) * cc.inv_kn;
                const double old = c.normal_impulse;
                c.normal_impulse = std::max(0.0, old + d);
                const double applied = c.normal_impulse - old;
                if (cc.a.art)
                    cc.a.art->addDq(applied * cc.a.dqn);
                else
                    cc.a.applyImpulse(-applied, cc.n);
                if (cc.b.art)
                    cc.b.art->addDq(applied * cc.b.dqn);
                else
                    cc.b.applyImpulse(applied, cc.n);
            }
            // friction, clamped to the cone
            {
                const double vt = cc.a.tangentVel(cc.t) + cc.b.tangentVel(cc.t);
                const double d = -vt * cc.inv_kt;
                const double max_t = cc.mu * c.normal_impulse;
                const double old = c.tangent_impulse;
                c.tangent_impulse = clamp(old + d, -max_t, max_t);
                const double applied = c.tangent_impulse - old;
                if (cc.a.art)
                    cc.a.art->addDq(applied * cc.a.dqt);
                else
                    cc.a.applyImpulse(-applied, cc.t);
                if (cc.b.art)
                    cc.b.art->addDq(applied * cc.b.dqt);
                else
                    cc.b.applyImpulse(applied, cc.t);
            }
        }
    }

    diagnostics.contact_count = static_cast<int>(contacts.size());
    diagnostics.max_normal_residual = 0.0;
    for (ContactConstraint& cc : cons) {
        const double vn = cc.a.normalVel(cc.n) + cc.b.normalVel(cc.n);
        diagnostics.max_normal_residual =
            std::max(diagnostics.max_normal_residual, cc.target - vn);
    }
}

void World::step() {
    // integrate forces into velocities
    for (RigidBody& b : bodies) {
        if (b.type != BodyType::Dynamic) continue;
        b.linear_vel += dt * b.inv_mass * b.force;
        b.angular_vel += dt * b.inv_inertia * b.torque;
    }
    for (Articulation& art : articulations) {
        // implicit joint damping: (M + dt*C) dq' = M dq + dt*tau
        const Eigen::MatrixXd m = art.massMatrix(*this);
        Eigen::MatrixXd a = m;
        for (int i = 0; i < art.dof(); ++i)
            a(i, i) += dt * art.joints()[static_cast<size_t>(i)].damping;
        const Eigen::VectorXd rhs = m * art.dq() + dt * art.pendingTorques();
        art.mutableDq() = a.ldlt().solve(rhs);
    }

    std::vector<Contact> contacts = detectContacts(*this);
    solveContacts(contacts);

    // integrate poses
    for (RigidBody& b : bodies) {
        if (b.type != BodyType::Dynamic) continue;
        b.position += dt * b.linear_vel;
        b.angle += dt * b.angular_vel;
    }
    for (Articulation& art : articulations) {
        art.integrate(dt);
        art.syncLinkBodies(*this);
    }

    for (RigidBody& b : bodies) {
        b.force = Vec2{};
        b.torque = 0.0;
        if (b.linear_vel.norm() > speed_cap) unstable = true;
    }
    for (Articulation& art : articulations) art.clearTorques();

    last_contacts = std::move(contacts);
}

}  // namespace grasp2d
