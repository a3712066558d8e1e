#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "riskplan/geometry.hpp"
#include "riskplan/kernel.hpp"

namespace riskplan {

/// Scalar Gaussian distribution: the belief over the field value (or one
/// component of its spatial derivative) at a single state.
struct GaussianBelief {
    double mean = 0.0;
    double variance = 0.0;
};

/// Exact Gaussian-process regression over a scalar 2-D field.
///
/// Holds the kernel, the dataset of noisy observations, and a cached Cholesky
/// factor of the regularized Gram matrix. Posterior queries are const and safe
/// to run concurrently; add_observation requires exclusive access
/// (single-writer, multi-reader between updates).
class GpModel {
public:
    GpModel(Kernel kernel, double noise_variance, Rect bounds);

    /// Posterior belief of the field at a query state.
    /// Empty dataset yields the zero-mean prior. Variance is clamped to
    /// [0, kappa(x, x)]. Throws std::domain_error for out-of-bounds queries.
    GaussianBelief posterior(Vec2 query) const;

    /// Posterior belief of the field derivative per input dimension.
    /// Only the diagonal of the derivative covariance is exposed.
    std::array<GaussianBelief, 2> posterior_derivative(Vec2 query) const;

    /// Appends one observation and extends the cached factorization by one
    /// row (rank-1 Cholesky append; falls back to a full refactorization when
    /// the appended pivot is not safely positive). Results match a batch
    /// rebuild to well below 1e-8.
    /// Throws std::domain_error for out-of-bounds x, std::invalid_argument
    /// for non-finite z.
    void add_observation(Vec2 x, double z);

    std::size_t size() const { return points_.size(); }
    const std::vector<Vec2>& points() const { return points_; }
    const std::vector<double>& values() const { return values_; }
    const Kernel& kernel() const { return kernel_; }
    double noise_variance() const { return noise_variance_; }
    const Rect& bounds() const { return bounds_; }

private:
    void require_in_bounds(Vec2 x, const char* what) const;
    void refactorize();
    void recompute_alpha();
    Eigen::VectorXd kernel_vector(Vec2 query) const;

    Kernel kernel_;
    double noise_variance_ = 0.0;
    Rect bounds_;
    std::vector<Vec2> points_;
    std::vector<double> values_;

    Eigen::MatrixXd chol_;   // lower Cholesky factor of K + sigma_n^2 I
    Eigen::VectorXd alpha_;  // cached (K + sigma_n^2 I)^{-1} z
};

}  // namespace riskplan
