#pragma once

#include <algorithm>
#include <cmath>
#include <variant>
#include <vector>

namespace riskplan {

/// 2-D state in environment units.
struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
    friend constexpr Vec2 operator*(Vec2 v, double s) { return {s * v.x, s * v.y}; }
    friend constexpr bool operator==(Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }

    double norm() const { return std::hypot(x, y); }
    constexpr double squared_norm() const { return x * x + y * y; }
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

/// Point interpolated along the segment a->b at fraction t in [0,1].
inline Vec2 lerp(Vec2 a, Vec2 b, double t) { return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)}; }

/// Axis-aligned rectangle, min corner inclusive.
struct Rect {
    Vec2 min;
    Vec2 max;

    constexpr bool contains(Vec2 p) const {
        return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y;
    }
    constexpr double width() const { return max.x - min.x; }
    constexpr double height() const { return max.y - min.y; }
    constexpr double area() const { return width() * height(); }
    double diameter() const { return (max - min).norm(); }
    constexpr Vec2 center() const { return {0.5 * (min.x + max.x), 0.5 * (min.y + max.y)}; }

    /// Euclidean distance from p to the rectangle, 0 inside.
    double distance_to(Vec2 p) const {
        const double dx = std::max({min.x - p.x, 0.0, p.x - max.x});
        const double dy = std::max({min.y - p.y, 0.0, p.y - max.y});
        return std::hypot(dx, dy);
    }

    /// Signed distance: negative inside, positive outside.
    double signed_distance(Vec2 p) const {
        const Vec2 c = center();
        const double qx = std::abs(p.x - c.x) - 0.5 * width();
        const double qy = std::abs(p.y - c.y) - 0.5 * height();
        const double outside = std::hypot(std::max(qx, 0.0), std::max(qy, 0.0));
        const double inside = std::min(std::max(qx, qy), 0.0);
        return outside + inside;
    }
};

struct Circle {
    Vec2 center;
    double radius = 0.0;

    bool contains(Vec2 p) const { return distance(p, center) <= radius; }
    double distance_to(Vec2 p) const { return std::max(0.0, distance(p, center) - radius); }
    double signed_distance(Vec2 p) const { return distance(p, center) - radius; }
};

/// Goal region for planning queries: circle or axis-aligned rectangle.
using GoalRegion = std::variant<Circle, Rect>;

inline bool goal_contains(const GoalRegion& g, Vec2 p) {
    return std::visit([&](const auto& shape) { return shape.contains(p); }, g);
}

/// Distance from p to the nearest point of the goal region (0 inside).
inline double goal_distance(const GoalRegion& g, Vec2 p) {
    return std::visit([&](const auto& shape) { return shape.distance_to(p); }, g);
}

inline Vec2 goal_center(const GoalRegion& g) {
    return std::visit([](const auto& shape) {
        if constexpr (std::is_same_v<std::decay_t<decltype(shape)>, Circle>)
            return shape.center;
        else
            return shape.center();
    }, g);
}

}  // namespace riskplan
