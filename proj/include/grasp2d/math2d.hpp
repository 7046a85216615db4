#pragma once

#include <cmath>

namespace grasp2d {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(Vec2 o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(Vec2 o) { x -= o.x; y -= o.y; return *this; }
    Vec2& operator*=(double s) { x *= s; y *= s; return *this; }

    double norm() const { return std::sqrt(x * x + y * y); }
    constexpr double norm2() const { return x * x + y * y; }
    Vec2 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    // counter-clockwise perpendicular
    constexpr Vec2 perp() const { return {-y, x}; }
};

constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }
constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
// cross of scalar z-axis with vector: w x v
constexpr Vec2 cross(double w, Vec2 v) { return {-w * v.y, w * v.x}; }

// 2D rotation stored as cos/sin
struct Rot {
    double c = 1.0;
    double s = 0.0;

    Rot() = default;
    explicit Rot(double angle) : c(std::cos(angle)), s(std::sin(angle)) {}

    Vec2 apply(Vec2 v) const { return {c * v.x - s * v.y, s * v.x + c * v.y}; }
    Vec2 applyInv(Vec2 v) const { return {c * v.x + s * v.y, -s * v.x + c * v.y}; }
    double angle() const { return std::atan2(s, c); }
};

// rigid transform: rotation then translation
struct Transform {
    Vec2 p;
    Rot q;

    Transform() = default;
    Transform(Vec2 p_, double angle) : p(p_), q(angle) {}
    Transform(Vec2 p_, Rot q_) : p(p_), q(q_) {}

    Vec2 apply(Vec2 v) const { return q.apply(v) + p; }
    Vec2 applyInv(Vec2 v) const { return q.applyInv(v - p); }
    Vec2 rotate(Vec2 v) const { return q.apply(v); }
    Vec2 rotateInv(Vec2 v) const { return q.applyInv(v); }
};

constexpr double kPi = 3.14159265358979323846;

// wraps an angle to (-pi, pi]
inline double wrapAngle(double a) {
    a = std::fmod(a + kPi, 2.0 * kPi);
    if (a <= 0.0) a += 2.0 * kPi;
    return a - kPi;
}

// wrapped difference a - b in (-pi, pi]
inline double angleDiff(double a, double b) { return wrapAngle(a - b); }

inline double clamp(double v, double lo, double hi) {
    return v < lo ? lo : (v > hi ? hi : v);
}

}  // namespace grasp2d
