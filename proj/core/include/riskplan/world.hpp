#pragma once

#include <variant>
#include <vector>

#include "riskplan/geometry.hpp"
#include "riskplan/rng.hpp"

namespace riskplan {

using Obstacle = std::variant<Rect, Circle>;

bool obstacle_contains(const Obstacle& o, Vec2 p);
double obstacle_signed_distance(const Obstacle& o, Vec2 p);

/// One localized source of the ground-truth hazard field. The source peak
/// sits at center + 1.5 * (sin 2*pi*tau, cos 2*pi*tau) and decays per axis
/// with the given decay constants.
struct HazardSource {
    Vec2 center;
    double gain = 100.0;
    double tau = 0.0;  // fixed phase in [0, 1]
    Vec2 decay{1.1, 0.9};

    Vec2 peak() const;
    double value_at(Vec2 p, bool literal_exponents) const;
};

/// Regular grid of signed distances to the nearest non-free boundary
/// (obstacles or the world bounds), negative inside obstacles.
class SignedDistanceGrid {
public:
    SignedDistanceGrid() = default;
    SignedDistanceGrid(Rect bounds, const std::vector<Obstacle>& obstacles, double resolution);

    /// Bilinear interpolation of the grid; clamps queries to the grid hull.
    double interpolate(Vec2 p) const;

    /// Gradient of the bilinear interpolant (piecewise constant per cell).
    Vec2 gradient(Vec2 p) const;

    double cell_size() const { return cell_size_; }
    Vec2 origin() const { return origin_; }
    int rows() const { return ny_; }
    int cols() const { return nx_; }
    double cell_x() const { return cell_x_; }
    double cell_y() const { return cell_y_; }
    double at(int ix, int iy) const { return values_[static_cast<std::size_t>(iy) * nx_ + ix]; }

private:
    Vec2 origin_;
    double cell_size_ = 0.1;  // max of the per-axis cell sizes
    double cell_x_ = 0.1;
    double cell_y_ = 0.1;
    int nx_ = 0;
    int ny_ = 0;
    std::vector<double> values_;
};

struct WorldConfig {
    Rect bounds{{0.0, 0.0}, {20.0, 20.0}};
    std::vector<Obstacle> obstacles;
    std::vector<HazardSource> sources;
    double sensor_noise_variance = 0.5;
    double sdf_resolution = 0.1;
    /// When true, reproduces the literal unsquared exponents of the source
    /// model instead of the Gaussian-bump form.
    bool literal_exponents = false;
};

/// Immutable ground-truth environment: bounds, obstacles with a precomputed
/// signed-distance grid, hazard sources, and the noisy observation channel.
class World {
public:
    explicit World(WorldConfig config);

    /// Ground-truth hazard value; additive over sources, nonnegative.
    double hazard(Vec2 x) const;

    /// Noisy sample: hazard(x) plus zero-mean Gaussian sensor noise.
    double observe(Vec2 x, Rng& rng) const;

    /// Bilinear interpolation of the signed-distance grid.
    double signed_distance(Vec2 x) const { return sdf_.interpolate(x); }
    Vec2 signed_distance_gradient(Vec2 x) const { return sdf_.gradient(x); }

    /// True iff the segment a->b, sampled at steps of at most half the grid
    /// cell size, stays inside free space.
    bool collision_free(Vec2 a, Vec2 b) const;

    bool in_bounds(Vec2 x) const { return config_.bounds.contains(x); }
    bool in_free_space(Vec2 x) const;

    const Rect& bounds() const { return config_.bounds; }
    const std::vector<Obstacle>& obstacles() const { return config_.obstacles; }
    const std::vector<HazardSource>& sources() const { return config_.sources; }
    double sensor_noise_variance() const { return config_.sensor_noise_variance; }
    const SignedDistanceGrid& sdf() const { return sdf_; }
    const WorldConfig& config() const { return config_; }

    /// Free-space area estimate (bounds area minus obstacle areas).
    double free_measure() const;

private:
    WorldConfig config_;
    SignedDistanceGrid sdf_;
};

}  // namespace riskplan
