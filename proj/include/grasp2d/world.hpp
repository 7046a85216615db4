#pragma once

#include <memory>
#include <set>
#include <utility>
#include <vector>

#include "grasp2d/articulation.hpp"
#include "grasp2d/body.hpp"
#include "grasp2d/contact.hpp"

namespace grasp2d {

struct SolverDiagnostics {
    double max_normal_residual = 0.0;  // worst remaining approach velocity
    int contact_count = 0;
};

struct World {
    std::vector<RigidBody> bodies;
    std::vector<Articulation> articulations;

    double dt = 0.010;
    int solver_iterations = 10;
    double contact_slop = 1e-3;
    double baumgarte_beta = 0.2;
    double speed_cap = 100.0;  // m/s; exceeding it marks the world unstable

    bool unstable = false;
    SolverDiagnostics diagnostics;
    std::vector<Contact> last_contacts;  // solved contacts from the most recent step

    BodyId addBody(RigidBody body);
    RigidBody& body(BodyId id);
    const RigidBody& body(BodyId id) const;

    int addArticulation(Articulation art);

    // pairs that are never collision-tested (adjacent links of a chain)
    void excludeCollision(BodyId a, BodyId b);
    bool isExcluded(BodyId a, BodyId b) const;

    // force accumulates for the next step only; throws on unknown id
    void applyExternalForce(BodyId body, Vec2 force);

    // solves the given contacts in place (velocity impulses applied to bodies)
    void solveContacts(std::vector<Contact>& contacts);

    // one full step: integrate forces, detect + solve contacts, integrate poses
    void step();

  private:
    std::set<std::pair<BodyId, BodyId>> excluded_;
};

}  // namespace grasp2d
