#include "riskplan/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace riskplan {

bool obstacle_contains(const Obstacle& o, Vec2 p) {
    return std::visit([&](const auto& shape) { return shape.signed_distance(p) < 0.0; }, o);
}

double obstacle_signed_distance(const Obstacle& o, Vec2 p) {
    return std::visit([&](const auto& shape) { return shape.signed_distance(p); }, o);
}

Vec2 HazardSource::peak() const {
    const double angle = 2.0 * std::numbers::pi * tau;
    return {center.x + 1.5 * std::sin(angle), center.y + 1.5 * std::cos(angle)};
}

double HazardSource::value_at(Vec2 p, bool literal_exponents) const {
    const Vec2 shifted = peak();
    const double ax = (p.x - shifted.x) / decay.x;
    const double ay = (p.y - shifted.y) / decay.y;
    if (literal_exponents) {
        return gain * std::exp(-ax) * std::exp(-ay);
    }
    return gain * std::exp(-ax * ax) * std::exp(-ay * ay);
}

SignedDistanceGrid::SignedDistanceGrid(Rect bounds, const std::vector<Obstacle>& obstacles,
                                       double resolution) {
    if (!(resolution > 0.0)) {
        throw std::invalid_argument("SignedDistanceGrid: resolution must be positive");
    }
    origin_ = bounds.min;
    nx_ = std::max(2, static_cast<int>(std::ceil(bounds.width() / resolution)) + 1);
    ny_ = std::max(2, static_cast<int>(std::ceil(bounds.height() / resolution)) + 1);
    // snap the cell size so the grid covers the bounds exactly
    const double cx = bounds.width() / (nx_ - 1);
    const double cy = bounds.height() / (ny_ - 1);
    cell_size_ = std::max(cx, cy);
    values_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));

    for (int iy = 0; iy < ny_; ++iy) {
        for (int ix = 0; ix < nx_; ++ix) {
            const Vec2 p{origin_.x + ix * cx, origin_.y + iy * cy};
            double d = std::min({p.x - bounds.min.x, bounds.max.x - p.x,
                                 p.y - bounds.min.y, bounds.max.y - p.y});
            for (const Obstacle& o : obstacles) {
                d = std::min(d, obstacle_signed_distance(o, p));
            }
            values_[static_cast<std::size_t>(iy) * nx_ + ix] = d;
        }
    }
    cell_x_ = cx;
    cell_y_ = cy;
}

double SignedDistanceGrid::interpolate(Vec2 p) const {
    const double fx = std::clamp((p.x - origin_.x) / cell_x_, 0.0, static_cast<double>(nx_ - 1));
    const double fy = std::clamp((p.y - origin_.y) / cell_y_, 0.0, static_cast<double>(ny_ - 1));
    const int ix = std::min(static_cast<int>(fx), nx_ - 2);
    const int iy = std::min(static_cast<int>(fy), ny_ - 2);
    const double tx = fx - ix;
    const double ty = fy - iy;
    const double v00 = at(ix, iy);
    const double v10 = at(ix + 1, iy);
    const double v01 = at(ix, iy + 1);
    const double v11 = at(ix + 1, iy + 1);
    return v00 * (1 - tx) * (1 - ty) + v10 * tx * (1 - ty) + v01 * (1 - tx) * ty +
           v11 * tx * ty;
}

Vec2 SignedDistanceGrid::gradient(Vec2 p) const {
    const double fx = std::clamp((p.x - origin_.x) / cell_x_, 0.0, static_cast<double>(nx_ - 1));
    const double fy = std::clamp((p.y - origin_.y) / cell_y_, 0.0, static_cast<double>(ny_ - 1));
    const int ix = std::min(static_cast<int>(fx), nx_ - 2);
    const int iy = std::min(static_cast<int>(fy), ny_ - 2);
    const double tx = fx - ix;
    const double ty = fy - iy;
    const double v00 = at(ix, iy);
    const double v10 = at(ix + 1, iy);
    const double v01 = at(ix, iy + 1);
    const double v11 = at(ix + 1, iy + 1);
    const double gx = ((v10 - v00) * (1 - ty) + (v11 - v01) * ty) / cell_x_;
    const double gy = ((v01 - v00) * (1 - tx) + (v11 - v10) * tx) / cell_y_;
    return {gx, gy};
}

World::World(WorldConfig config) : config_(std::move(config)) {
    if (!(config_.bounds.width() > 0.0 && config_.bounds.height() > 0.0)) {
        throw std::invalid_argument("World: bounds must have positive extent");
    }
    if (!(config_.sensor_noise_variance >= 0.0)) {
        throw std::invalid_argument("World: sensor noise variance must be nonnegative");
    }
    for (const HazardSource& s : config_.sources) {
        if (!(s.decay.x > 0.0 && s.decay.y > 0.0)) {
            throw std::invalid_argument("World: hazard decay constants must be positive");
        }
    }
    sdf_ = SignedDistanceGrid(config_.bounds, config_.obstacles, config_.sdf_resolution);
    if (free_measure() <= 0.0) {
        throw std::invalid_argument("World: free space is empty");
    }
}

double World::hazard(Vec2 x) const {
    double total = 0.0;
    for (const HazardSource& s : config_.sources) {
        total += s.value_at(x, config_.literal_exponents);
    }
    return total;
}

double World::observe(Vec2 x, Rng& rng) const {
    const double noise = config_.sensor_noise_variance > 0.0
                             ? rng.normal(0.0, std::sqrt(config_.sensor_noise_variance))
                             : 0.0;
    return hazard(x) + noise;
}

bool World::in_free_space(Vec2 x) const {
    if (!in_bounds(x)) {
        return false;
    }
    for (const Obstacle& o : config_.obstacles) {
        if (obstacle_contains(o, x)) {
            return false;
        }
    }
    return true;
}

bool World::collision_free(Vec2 a, Vec2 b) const {
    const double len = distance(a, b);
    const double step = 0.5 * sdf_.cell_size();
    const int n = std::max(1, static_cast<int>(std::ceil(len / step)));
    for (int i = 0; i <= n; ++i) {
        const Vec2 p = lerp(a, b, static_cast<double>(i) / n);
        if (!in_free_space(p)) {
            return false;
        }
    }
    return true;
}

double World::free_measure() const {
    double area = config_.bounds.area();
    for (const Obstacle& o : config_.obstacles) {
        if (std::holds_alternative<Rect>(o)) {
            area -= std::get<Rect>(o).area();
        } else {
            const Circle& c = std::get<Circle>(o);
            area -= std::numbers::pi * c.radius * c.radius;
        }
    }
    return std::max(area, 0.0);
}

}  // namespace riskplan
