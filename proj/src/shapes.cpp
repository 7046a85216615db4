#include "grasp2d/shapes.hpp"

#include <algorithm>
#include <limits>

namespace grasp2d {

bool isConvexCcw(const std::vector<Vec2>& v) {
    const size_t n = v.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = v[i];
        const Vec2 b = v[(i + 1) % n];
        const Vec2 c = v[(i + 2) % n];
        if (cross(b - a, c - b) <= 0.0) return false;
    }
    return true;
}

void validateShape(const Shape& shape) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Circle>) {
                if (!(s.radius > 0.0)) throw std::invalid_argument("circle radius must be > 0");
            } else if constexpr (std::is_same_v<T, Capsule>) {
                if (!(s.radius > 0.0)) throw std::invalid_argument("capsule radius must be > 0");
                if ((s.b - s.a).norm() <= 0.0)
                    throw std::invalid_argument("capsule endpoints must be distinct");
            } else {
                if (!isConvexCcw(s.vertices))
                    throw std::invalid_argument(
                        "polygon must be convex, counter-clockwise, with >= 3 vertices");
            }
        },
        shape);
}

Polygon makeBox(Vec2 c, double hx, double hy) {
    return Polygon{{{c.x - hx, c.y - hy},
                    {c.x + hx, c.y - hy},
                    {c.x + hx, c.y + hy},
                    {c.x - hx, c.y + hy}}};
}

ShapeMass shapeMass(const Shape& shape) {
    ShapeMass m;
    if (const auto* c = std::get_if<Circle>(&shape)) {
        m.area = kPi * c->radius * c->radius;
        m.centroid = c->center;
        m.second_moment = m.area * 0.5 * c->radius * c->radius;
        return m;
    }
    if (const auto* k = std::get_if<Capsule>(&shape)) {
        // rectangle part + two half disks
        const double len = (k->b - k->a).norm();
        const double r = k->radius;
        const double a_rect = len * 2.0 * r;
        const double a_caps = kPi * r * r;
        m.area = a_rect + a_caps;
        m.centroid = 0.5 * (k->a + k->b);
        const double i_rect = a_rect * (len * len + 4.0 * r * r) / 12.0;
        // each half disk: moment about its flat-edge center, then parallel axis to the capsule center
        const double a_half = 0.5 * kPi * r * r;
        const double i_half_edge = 0.25 * kPi * r * r * r * r;
        const double d = 0.5 * len;
        const double c_off = 4.0 * r / (3.0 * kPi);
        const double i_caps = 2.0 * (i_half_edge + a_half * (d * d + 2.0 * d * c_off));
        m.second_moment = i_rect + i_caps;
        return m;
    }
    const auto& v = std::get<Polygon>(shape).vertices;
    double area = 0.0;
    Vec2 c{0.0, 0.0};
    double inertia_origin = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        const Vec2 p0 = v[i];
        const Vec2 p1 = v[(i + 1) % v.size()];
        const double a = cross(p0, p1);
        area += 0.5 * a;
        c += (a / 6.0) * (p0 + p1);
        inertia_origin += (a / 12.0) * (dot(p0, p0) + dot(p0, p1) + dot(p1, p1));
    }
    m.area = area;
    m.centroid = c / area;
    m.second_moment = inertia_origin - area * m.centroid.norm2();
    return m;
}

Vec2 supportPoint(const Shape& shape, Vec2 d) {
    if (const auto* c = std::get_if<Circle>(&shape)) return c->center + c->radius * d;
    if (const auto* k = std::get_if<Capsule>(&shape)) {
        const Vec2 base = dot(k->a, d) > dot(k->b, d) ? k->a : k->b;
        return base + k->radius * d;
    }
    const auto& v = std::get<Polygon>(shape).vertices;
    size_t best = 0;
    double best_dot = dot(v[0], d);
    for (size_t i = 1; i < v.size(); ++i) {
        const double s = dot(v[i], d);
        if (s > best_dot) {
            best_dot = s;
            best = i;
        }
    }
    return v[best];
}

namespace {

Vec2 closestOnSegment(Vec2 a, Vec2 b, Vec2 p) {
    const Vec2 ab = b - a;
    const double t = clamp(dot(p - a, ab) / ab.norm2(), 0.0, 1.0);
    return a + t * ab;
}

}  // namespace

double signedDistance(const Shape& shape, Vec2 p) {
    if (const auto* c = std::get_if<Circle>(&shape)) return (p - c->center).norm() - c->radius;
    if (const auto* k = std::get_if<Capsule>(&shape))
        return (p - closestOnSegment(k->a, k->b, p)).norm() - k->radius;
    const auto& v = std::get<Polygon>(shape).vertices;
    double max_plane = -std::numeric_limits<double>::infinity();
    double min_edge = std::numeric_limits<double>::infinity();
    bool inside = true;
    for (size_t i = 0; i < v.size(); ++i) {
        const Vec2 a = v[i];
        const Vec2 b = v[(i + 1) % v.size()];
        const Vec2 n = (b - a).perp().normalized() * -1.0;  // outward for CCW
        max_plane = std::max(max_plane, dot(p - a, n));
        if (dot(p - a, n) > 0.0) inside = false;
        min_edge = std::min(min_edge, (p - closestOnSegment(a, b, p)).norm());
    }
    return inside ? max_plane : min_edge;
}

Vec2 closestSurfacePoint(const Shape& shape, Vec2 p) {
    if (const auto* c = std::get_if<Circle>(&shape)) {
        const Vec2 d = p - c->center;
        const double n = d.norm();
        if (n <= c->radius) return p;
        return c->center + (c->radius / n) * d;
    }
    if (const auto* k = std::get_if<Capsule>(&shape)) {
        const Vec2 q = closestOnSegment(k->a, k->b, p);
        const Vec2 d = p - q;
        const double n = d.norm();
        if (n <= k->radius) return p;
        return q + (k->radius / n) * d;
    }
    if (signedDistance(shape, p) <= 0.0) return p;
    const auto& v = std::get<Polygon>(shape).vertices;
    Vec2 best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < v.size(); ++i) {
        const Vec2 q = closestOnSegment(v[i], v[(i + 1) % v.size()], p);
        const double d2 = (p - q).norm2();
        if (d2 < best_d2) {
            best_d2 = d2;
            best = q;
        }
    }
    return best;
}

double boundingRadius(const Shape& shape) {
    if (const auto* c = std::get_if<Circle>(&shape)) return c->center.norm() + c->radius;
    if (const auto* k = std::get_if<Capsule>(&shape))
        return std::max(k->a.norm(), k->b.norm()) + k->radius;
    const auto& v = std::get<Polygon>(shape).vertices;
    double r = 0.0;
    for (const Vec2& p : v) r = std::max(r, p.norm());
    return r;
}

}  // namespace grasp2d
