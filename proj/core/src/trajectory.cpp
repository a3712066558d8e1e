#include "riskplan/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace riskplan {

Trajectory::Trajectory(std::vector<Vec2> waypoints, std::vector<double> headings)
    : waypoints_(std::move(waypoints)), headings_(std::move(headings)) {
    if (waypoints_.size() < 2) {
        throw std::invalid_argument("Trajectory: needs at least 2 waypoints");
    }
    if (!headings_.empty() && headings_.size() != waypoints_.size()) {
        throw std::invalid_argument("Trajectory: headings must match waypoints");
    }
    cumulative_.resize(waypoints_.size(), 0.0);
    for (std::size_t i = 1; i < waypoints_.size(); ++i) {
        cumulative_[i] = cumulative_[i - 1] + distance(waypoints_[i - 1], waypoints_[i]);
    }
    total_length_ = cumulative_.back();
}

Vec2 Trajectory::sample(double t) const {
    t = std::clamp(t, 0.0, 1.0);
    if (total_length_ == 0.0) {
        return waypoints_.front();
    }
    const double target = t * total_length_;
    const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
    const auto idx = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
    if (idx == 0) {
        return waypoints_.front();
    }
    const double seg = cumulative_[idx] - cumulative_[idx - 1];
    const double frac = seg > 0.0 ? (target - cumulative_[idx - 1]) / seg : 0.0;
    return lerp(waypoints_[idx - 1], waypoints_[idx], frac);
}

Trajectory Trajectory::respaced(double step) const {
    if (!(step > 0.0)) {
        throw std::invalid_argument("Trajectory::respaced: step must be positive");
    }
    if (total_length_ == 0.0) {
        return *this;
    }
    const int n = std::max(1, static_cast<int>(std::ceil(total_length_ / step)));
    std::vector<Vec2> pts;
    std::vector<double> hds;
    pts.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        pts.push_back(sample(t));
        if (has_headings()) {
            // nearest-segment linear heading interpolation
            const double target = t * total_length_;
            const auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), target);
            auto idx = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
            if (idx == 0) {
                hds.push_back(headings_.front());
            } else {
                const double seg = cumulative_[idx] - cumulative_[idx - 1];
                const double frac = seg > 0.0 ? (target - cumulative_[idx - 1]) / seg : 0.0;
                hds.push_back(headings_[idx - 1] + frac * (headings_[idx] - headings_[idx - 1]));
            }
        }
    }
    return Trajectory(std::move(pts), std::move(hds));
}

}  // namespace riskplan
