#pragma once

#include <vector>

#include "grasp2d/body.hpp"

namespace grasp2d {

struct Contact {
    BodyId body_a = -1;
    BodyId body_b = -1;
    int fixture_a = 0;
    int fixture_b = 0;
    Vec2 point;           // world
    Vec2 normal;          // unit, from a to b
    double penetration = 0.0;  // > 0 when overlapping
    double normal_impulse = 0.0;
    double tangent_impulse = 0.0;
};

// narrowphase between two posed shapes; appends up to two manifold points
// with body/fixture ids left unset
void collideShapes(const Shape& shape_a, const Transform& xf_a, const Shape& shape_b,
                   const Transform& xf_b, double slop, std::vector<Contact>& out);

struct World;

// every overlapping (or within-slop) pair, deterministically ordered
std::vector<Contact> detectContacts(const World& world);

}  // namespace grasp2d
