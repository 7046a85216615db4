#pragma once

#include <stdexcept>
#include <variant>
#include <vector>

#include "grasp2d/math2d.hpp"

namespace grasp2d {

// All shape geometry lives in the owning body's local frame.

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

// convex, counter-clockwise, >= 3 vertices
struct Polygon {
    std::vector<Vec2> vertices;
};

// segment from a to b, inflated by radius
struct Capsule {
    Vec2 a;
    Vec2 b;
    double radius = 0.0;
};

using Shape = std::variant<Circle, Polygon, Capsule>;

bool isConvexCcw(const std::vector<Vec2>& vertices);
void validateShape(const Shape& shape);

// axis-aligned rectangle centered at `center`, half extents hx, hy
Polygon makeBox(Vec2 center, double hx, double hy);

// area, centroid and second moment of area about the centroid, all in local frame
struct ShapeMass {
    double area = 0.0;
    Vec2 centroid;
    // second moment of area about the shape centroid (multiply by density for inertia)
    double second_moment = 0.0;
};

ShapeMass shapeMass(const Shape& shape);

// support point of the shape surface in direction d (unit), local frame
Vec2 supportPoint(const Shape& shape, Vec2 d);

// signed distance from a local-frame point to the shape surface (< 0 inside)
double signedDistance(const Shape& shape, Vec2 point);

// closest point on the shape surface (or the point itself if inside) to a local-frame point
Vec2 closestSurfacePoint(const Shape& shape, Vec2 point);

// conservative radius of a disk around the local origin containing the shape
double boundingRadius(const Shape& shape);

}  // namespace grasp2d
