#include "grasp2d/contact.hpp"

#include <algorithm>
#include <limits>

#include "grasp2d/world.hpp"

namespace grasp2d {

namespace {

Vec2 closestOnSegment(Vec2 a, Vec2 b, Vec2 p) {
    const Vec2 ab = b - a;
    const double len2 = ab.norm2();
    if (len2 <= 0.0) return a;
    const double t = clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return a + t * ab;
}

// closest points between segments [p1,q1] and [p2,q2]
void closestSegmentSegment(Vec2 p1, Vec2 q1, Vec2 p2, Vec2 q2, Vec2& c1, Vec2& c2) {
    const Vec2 d1 = q1 - p1;
    const Vec2 d2 = q2 - p2;
    const Vec2 r = p1 - p2;
    const double a = d1.norm2();
    const double e = d2.norm2();
    const double f = dot(d2, r);
    double s = 0.0, t = 0.0;
    if (a <= 0.0 && e <= 0.0) {
        // both degenerate
    } else if (a <= 0.0) {
        t = clamp(f / e, 0.0, 1.0);
    } else {
        const double c = dot(d1, r);
        if (e <= 0.0) {
            s = clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = dot(d1, d2);
            const double denom = a * e - b * b;
            s = denom > 0.0 ? clamp((b * f - c * e) / denom, 0.0, 1.0) : 0.0;
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    c1 = p1 + s * d1;
    c2 = p2 + t * d2;
}

struct WorldPoly {
    std::vector<Vec2> v;  // world vertices, CCW
    std::vector<Vec2> n;  // outward edge normals, n[i] for edge v[i] -> v[i+1]
};

WorldPoly toWorld(const Polygon& poly, const Transform& xf) {
    WorldPoly w;
    w.v.reserve(poly.vertices.size());
    for (Vec2 p : poly.vertices) w.v.push_back(xf.apply(p));
    w.n.reserve(w.v.size());
    for (size_t i = 0; i < w.v.size(); ++i) {
        const Vec2 e = w.v[(i + 1) % w.v.size()] - w.v[i];
        w.n.push_back((-1.0) * e.perp().normalized());
    }
    return w;
}

// one point; normal points from circle a toward circle b
void circleCircle(Vec2 ca, double ra, Vec2 cb, double rb, double slop, std::vector<Contact>& out) {
    const Vec2 d = cb - ca;
    const double dist = d.norm();
    const double pen = ra + rb - dist;
    if (pen <= -slop) return;
    Contact c;
    c.normal = dist > 1e-12 ? d / dist : Vec2{1.0, 0.0};
    c.penetration = pen;
    c.point = ca + (ra - 0.5 * pen) * c.normal;
    out.push_back(c);
}

// normal points from the circle toward the polygon
void circlePolygon(Vec2 center, double r, const WorldPoly& poly, double slop,
                   std::vector<Contact>& out) {
    // max separation of the center over the polygon faces
    double sep = -std::numeric_limits<double>::infinity();
    size_t face = 0;
    for (size_t i = 0; i < poly.v.size(); ++i) {
        const double s = dot(poly.n[i], center - poly.v[i]);
        if (s > sep) {
            sep = s;
            face = i;
        }
    }
    Contact c;
    if (sep <= 0.0) {
        // center inside: push the circle out along the closest face normal
        c.normal = -1.0 * poly.n[face];
        c.penetration = r - sep;
        c.point = center - sep * poly.n[face];
    } else {
        Vec2 q = center;
        double best = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < poly.v.size(); ++i) {
            const Vec2 p = closestOnSegment(poly.v[i], poly.v[(i + 1) % poly.v.size()], center);
            const double d2 = (center - p).norm2();
            if (d2 < best) {
                best = d2;
                q = p;
            }
        }
        const double dist = std::sqrt(best);
        c.penetration = r - dist;
        if (c.penetration <= -slop) return;
        c.normal = dist > 1e-12 ? (q - center) / dist : -1.0 * poly.n[face];
        c.point = q;
    }
    out.push_back(c);
}

double maxSeparation(const WorldPoly& a, const WorldPoly& b, size_t& best_face) {
    double best = -std::numeric_limits<double>::infinity();
    best_face = 0;
    for (size_t i = 0; i < a.v.size(); ++i) {
        double min_proj = std::numeric_limits<double>::infinity();
        for (const Vec2& vb : b.v) min_proj = std::min(min_proj, dot(a.n[i], vb - a.v[i]));
        if (min_proj > best) {
            best = min_proj;
            best_face = i;
        }
    }
    return best;
}

int clipSegment(Vec2 in0, Vec2 in1, Vec2 n, double offset, Vec2* out) {
    int count = 0;
    const double d0 = dot(n, in0) - offset;
    const double d1 = dot(n, in1) - offset;
    if (d0 <= 0.0) out[count++] = in0;
    if (d1 <= 0.0) out[count++] = in1;
    if (d0 * d1 < 0.0) out[count++] = in0 + (d0 / (d0 - d1)) * (in1 - in0);
    return count > 2 ? 2 : count;
}

// up to two points; normal points from polygon a toward polygon b
void polygonPolygon(const WorldPoly& a, const WorldPoly& b, double slop,
                    std::vector<Contact>& out) {
    size_t face_a = 0, face_b = 0;
    const double sep_a = maxSeparation(a, b, face_a);
    if (sep_a >= slop) return;
    const double sep_b = maxSeparation(b, a, face_b);
    if (sep_b >= slop) return;

    const bool flip = sep_b > sep_a + 1e-10;  // reference face on b
    const WorldPoly& ref = flip ? b : a;
    const WorldPoly& inc = flip ? a : b;
    const size_t rf = flip ? face_b : face_a;
    const Vec2 ref_n = ref.n[rf];

    // incident face: the most anti-parallel face of the other polygon
    size_t inf = 0;
    double min_dot = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < inc.n.size(); ++i) {
        const double d = dot(ref_n, inc.n[i]);
        if (d < min_dot) {
            min_dot = d;
            inf = i;
        }
    }
    const Vec2 rv0 = ref.v[rf];
    const Vec2 rv1 = ref.v[(rf + 1) % ref.v.size()];
    Vec2 iv0 = inc.v[inf];
    Vec2 iv1 = inc.v[(inf + 1) % inc.v.size()];

    // clip the incident edge to the side planes of the reference face
    const Vec2 tangent = (rv1 - rv0).normalized();
    Vec2 clipped1[2], clipped2[2];
    if (clipSegment(iv0, iv1, -1.0 * tangent, -dot(tangent, rv0), clipped1) < 2) return;
    if (clipSegment(clipped1[0], clipped1[1], tangent, dot(tangent, rv1), clipped2) < 2) return;

    for (int i = 0; i < 2; ++i) {
        const double sep = dot(ref_n, clipped2[i] - rv0);
        if (sep >= slop) continue;
        Contact c;
        c.penetration = -sep;
        c.point = clipped2[i];
        c.normal = flip ? -1.0 * ref_n : ref_n;
        out.push_back(c);
    }
}

// normal points from the capsule toward the polygon
void capsulePolygon(Vec2 ka, Vec2 kb, double r, const WorldPoly& poly, double slop,
                    std::vector<Contact>& out) {
    std::vector<Contact> cand;
    circlePolygon(ka, r, poly, slop, cand);
    circlePolygon(kb, r, poly, slop, cand);
    // polygon vertices against the capsule core
    for (const Vec2& v : poly.v) {
        const Vec2 q = closestOnSegment(ka, kb, v);
        const Vec2 d = v - q;
        const double dist = d.norm();
        const double pen = r - dist;
        if (pen <= -slop) continue;
        Contact c;
        c.normal = dist > 1e-12 ? d / dist : (kb - ka).perp().normalized();
        c.penetration = pen;
        c.point = q + (r - 0.5 * pen) * c.normal;
        cand.push_back(c);
    }
    std::sort(cand.begin(), cand.end(),
              [](const Contact& x, const Contact& y) { return x.penetration > y.penetration; });
    for (const Contact& c : cand) {
        bool dup = false;
        for (const Contact& kept : out)
            if ((kept.point - c.point).norm() < 0.25 * r) dup = true;
        if (!dup) out.push_back(c);
        if (out.size() >= 2) break;
    }
}

void flipNormals(std::vector<Contact>& contacts, size_t from) {
    for (size_t i = from; i < contacts.size(); ++i) contacts[i].normal = -1.0 * contacts[i].normal;
}

}  // namespace

void collideShapes(const Shape& sa, const Transform& xfa, const Shape& sb, const Transform& xfb,
                   double slop, std::vector<Contact>& out) {
    const size_t start = out.size();
    const auto* ca = std::get_if<Circle>(&sa);
    const auto* cb = std::get_if<Circle>(&sb);
    const auto* pa = std::get_if<Polygon>(&sa);
    const auto* pb = std::get_if<Polygon>(&sb);
    const auto* ka = std::get_if<Capsule>(&sa);
    const auto* kb = std::get_if<Capsule>(&sb);

    if (ca && cb) {
        circleCircle(xfa.apply(ca->center), ca->radius, xfb.apply(cb->center), cb->radius, slop,
                     out);
    } else if (ca && pb) {
        circlePolygon(xfa.apply(ca->center), ca->radius, toWorld(*pb, xfb), slop, out);
    } else if (pa && cb) {
        circlePolygon(xfb.apply(cb->center), cb->radius, toWorld(*pa, xfa), slop, out);
        flipNormals(out, start);
    } else if (pa && pb) {
        polygonPolygon(toWorld(*pa, xfa), toWorld(*pb, xfb), slop, out);
    } else if (ca && kb) {
        const Vec2 c = xfa.apply(ca->center);
        const Vec2 q = closestOnSegment(xfb.apply(kb->a), xfb.apply(kb->b), c);
        circleCircle(c, ca->radius, q, kb->radius, slop, out);
    } else if (ka && cb) {
        const Vec2 c = xfb.apply(cb->center);
        const Vec2 q = closestOnSegment(xfa.apply(ka->a), xfa.apply(ka->b), c);
        circleCircle(q, ka->radius, c, cb->radius, slop, out);
    } else if (ka && kb) {
        Vec2 q1, q2;
        closestSegmentSegment(xfa.apply(ka->a), xfa.apply(ka->b), xfb.apply(kb->a),
                              xfb.apply(kb->b), q1, q2);
        circleCircle(q1, ka->radius, q2, kb->radius, slop, out);
    } else if (ka && pb) {
        capsulePolygon(xfa.apply(ka->a), xfa.apply(ka->b), ka->radius, toWorld(*pb, xfb), slop,
                       out);
    } else if (pa && kb) {
        capsulePolygon(xfb.apply(kb->a), xfb.apply(kb->b), kb->radius, toWorld(*pa, xfa), slop,
                       out);
        flipNormals(out, start);
    }
}

std::vector<Contact> detectContacts(const World& world) {
    std::vector<Contact> contacts;
    const size_t n = world.bodies.size();
    std::vector<double> bound(n, 0.0);
    std::vector<double> motion(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (const Shape& s : world.bodies[i].fixtures)
            bound[i] = std::max(bound[i], boundingRadius(s));
        // Speculative margin: how far any surface point can travel in one step.
        // Separated contacts within this margin enter the solver, whose velocity
        // target (gap / dt) stops fast bodies from tunnelling through thin ones.
        motion[i] = world.dt * (world.bodies[i].linear_vel.norm() +
                                std::abs(world.bodies[i].angular_vel) * bound[i]);
    }

    for (size_t i = 0; i + 1 < n; ++i) {
        const RigidBody& a = world.bodies[i];
        for (size_t j = i + 1; j < n; ++j) {
            const RigidBody& b = world.bodies[j];
            if (a.type == BodyType::Static && b.type == BodyType::Static) continue;
            if (world.isExcluded(a.id, b.id)) continue;
            const double margin = world.contact_slop + motion[i] + motion[j];
            if ((b.position - a.position).norm() > bound[i] + bound[j] + margin)
                continue;
            const Transform xfa = a.transform();
            const Transform xfb = b.transform();
            for (size_t fi = 0; fi < a.fixtures.size(); ++fi) {
                for (size_t fj = 0; fj < b.fixtures.size(); ++fj) {
                    const size_t start = contacts.size();
                    collideShapes(a.fixtures[fi], xfa, b.fixtures[fj], xfb, margin, contacts);
                    for (size_t k = start; k < contacts.size(); ++k) {
                        contacts[k].body_a = a.id;
                        contacts[k].body_b = b.id;
                        contacts[k].fixture_a = static_cast<int>(fi);
                        contacts[k].fixture_b = static_cast<int>(fj);
                    }
                }
            }
        }
    }
    std::sort(contacts.begin(), contacts.end(), [](const Contact& x, const Contact& y) {
        if (x.body_a != y.body_a) return x.body_a < y.body_a;
        if (x.body_b != y.body_b) return x.body_b < y.body_b;
        if (x.fixture_a != y.fixture_a) return x.fixture_a < y.fixture_a;
        if (x.fixture_b != y.fixture_b) return x.fixture_b < y.fixture_b;
        if (x.point.x != y.point.x) return x.point.x < y.point.x;
        return x.point.y < y.point.y;
    });
    return contacts;
}

}  // namespace grasp2d
