#pragma once

#include <cmath>

namespace plume {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2 operator/(double s) const { return {x / s, y / s}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double norm() const { return std::hypot(x, y); }
    double norm_inf() const { return std::max(std::abs(x), std::abs(y)); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.dot(b); }

/// Axis-aligned box, closed by default.
struct Box2 {
    Vec2 lo;
    Vec2 hi;

    bool contains(const Vec2& v) const {
        return v.x >= lo.x && v.x <= hi.x && v.y >= lo.y && v.y <= hi.y;
    }
    bool contains_strict(const Vec2& v) const {
        return v.x > lo.x && v.x < hi.x && v.y > lo.y && v.y < hi.y;
    }
    Vec2 clamp(const Vec2& v) const {
        return {std::min(std::max(v.x, lo.x), hi.x), std::min(std::max(v.y, lo.y), hi.y)};
    }
    Vec2 center() const { return {(lo.x + hi.x) / 2, (lo.y + hi.y) / 2}; }
};

// Problem geometry and transport constants. Coordinates are km, time in hours,
// concentration dimensionless with unit source strength.
inline constexpr double kDomainLo = 0.0;
inline constexpr double kDomainHi = 1.0;
inline const Box2 kDomain{{0.0, 0.0}, {1.0, 1.0}};
inline const Box2 kSourceBox{{0.35, 0.35}, {0.65, 0.65}};
inline constexpr double kDefaultKappa = 1.0;      // km^2/h
inline const Vec2 kDefaultVelocity{3.0, 3.0};     // km/h
inline constexpr double kExclusionRadiusKm = 0.02;
inline constexpr int kDefaultMeshN = 241;

}  // namespace plume
