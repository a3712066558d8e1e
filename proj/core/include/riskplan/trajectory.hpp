#pragma once

#include <vector>

#include "riskplan/geometry.hpp"

namespace riskplan {

/// Waypoint polyline with an arc-length-proportional parametrization over
/// [0, 1]. Headings, when present, ride along with linear interpolation and
/// do not contribute to arc length.
class Trajectory {
public:
    Trajectory() = default;
    explicit Trajectory(std::vector<Vec2> waypoints, std::vector<double> headings = {});

    const std::vector<Vec2>& waypoints() const { return waypoints_; }
    const std::vector<double>& headings() const { return headings_; }
    bool has_headings() const { return !headings_.empty(); }
    std::size_t size() const { return waypoints_.size(); }

    double length() const { return total_length_; }

    /// Point at parameter t in [0, 1], proportional to arc length.
    Vec2 sample(double t) const;

    /// New trajectory with waypoints respaced at the given arc-length step;
    /// first and last waypoints are preserved.
    Trajectory respaced(double step) const;

    Vec2 front() const { return waypoints_.front(); }
    Vec2 back() const { return waypoints_.back(); }

private:
    std::vector<Vec2> waypoints_;
    std::vector<double> headings_;
    std::vector<double> cumulative_;  // arc length up to each waypoint
    double total_length_ = 0.0;
};

}  // namespace riskplan
