#pragma once

#include <array>

#include "riskplan/geometry.hpp"

namespace riskplan {

enum class KernelKind { SquaredExponential };

/// Stationary covariance function over 2-D states. Only the squared
/// exponential variant is implemented; the tag keeps the menu extensible.
struct Kernel {
    KernelKind kind = KernelKind::SquaredExponential;
    double signal_variance = 50.0;            // field-units^2
    std::array<double, 2> lengthscales{2.0, 2.0};  // environment-units per axis

    /// Throws std::invalid_argument if any hyperparameter is out of range.
    void validate() const;

    double operator()(Vec2 a, Vec2 b) const;

    /// d kappa(a, b) / d a_dim.
    double derivative(Vec2 a, Vec2 b, int dim) const;

    /// d^2 kappa(a, b) / (d a_dim d b_dim) evaluated at a = b.
    /// For the squared exponential this is signal_variance / lengthscale^2.
    double second_derivative_at_equal(int dim) const;
};

}  // namespace riskplan
