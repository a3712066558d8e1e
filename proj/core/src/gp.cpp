#include "riskplan/gp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace riskplan {

namespace {
constexpr double kJitter = 1e-10;
}

GpModel::GpModel(Kernel kernel, double noise_variance, Rect bounds)
    : kernel_(kernel), noise_variance_(noise_variance), bounds_(bounds) {
    kernel_.validate();
    if (!(noise_variance >= 0.0)) {
        throw std::invalid_argument("GpModel: noise variance must be nonnegative");
    }
}

void GpModel::require_in_bounds(Vec2 x, const char* what) const {
    if (!bounds_.contains(x)) {
        throw std::domain_error(std::string(what) + ": state outside world bounds");
    }
}

Eigen::VectorXd GpModel::kernel_vector(Vec2 query) const {
    const auto n = static_cast<Eigen::Index>(points_.size());
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k[i] = kernel_(points_[static_cast<std::size_t>(i)], query);
    }
    return k;
}

GaussianBelief GpModel::posterior(Vec2 query) const {
    require_in_bounds(query, "GpModel::posterior");
    const double prior_var = kernel_(query, query);
    if (points_.empty()) {
        return {0.0, prior_var};
    }
    const Eigen::VectorXd k = kernel_vector(query);
    const double mean = k.dot(alpha_);
    const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
    double variance = prior_var - v.squaredNorm();
    variance = std::clamp(variance, 0.0, prior_var);
    return {mean, variance};
}

std::array<GaussianBelief, 2> GpModel::posterior_derivative(Vec2 query) const {
    require_in_bounds(query, "GpModel::posterior_derivative");
    std::array<GaussianBelief, 2> out;
    for (int dim = 0; dim < 2; ++dim) {
        const double prior_var = kernel_.second_derivative_at_equal(dim);
        if (points_.empty()) {
            out[static_cast<std::size_t>(dim)] = {0.0, prior_var};
            continue;
        }
        const auto n = static_cast<Eigen::Index>(points_.size());
        // w[i] = d kappa(x_i, x) / d x_dim at the query
        Eigen::VectorXd w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            w[i] = -kernel_.derivative(points_[static_cast<std::size_t>(i)], query, dim);
        }
        const double mean = w.dot(alpha_);
        const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(w);
        double variance = prior_var - v.squaredNorm();
        variance = std::clamp(variance, 0.0, prior_var);
        out[static_cast<std::size_t>(dim)] = {mean, variance};
    }
    return out;
}

void GpModel::add_observation(Vec2 x, double z) {
    require_in_bounds(x, "GpModel::add_observation");
    if (!std::isfinite(z)) {
        throw std::invalid_argument("GpModel::add_observation: non-finite observation");
    }

    const auto n = static_cast<Eigen::Index>(points_.size());
    points_.push_back(x);
    values_.push_back(z);

    if (n == 0) {
        refactorize();
        return;
    }

    // Extend the Cholesky factor: L_new = [[L, 0], [b^T, d]] with
    // L b = k(x) and d^2 = kappa(x, x) + sigma_n^2 - b^T b.
    Eigen::VectorXd k(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        k[i] = kernel_(points_[static_cast<std::size_t>(i)], x);
    }
    const Eigen::VectorXd b = chol_.triangularView<Eigen::Lower>().solve(k);
    const double diag = kernel_(x, x) + noise_variance_ - b.squaredNorm();
    if (!(diag > kJitter)) {
        refactorize();
        return;
    }

    chol_.conservativeResize(n + 1, n + 1);
    chol_.row(n).head(n) = b.transpose();
    chol_.col(n).setZero();
    chol_(n, n) = std::sqrt(diag);
    recompute_alpha();
}

void GpModel::refactorize() {
    const auto n = static_cast<Eigen::Index>(points_.size());
    Eigen::MatrixXd gram(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double k = kernel_(points_[static_cast<std::size_t>(i)],
                                     points_[static_cast<std::size_t>(j)]);
            gram(i, j) = k;
            gram(j, i) = k;
        }
        gram(i, i) += noise_variance_;
    }

    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) {
        gram.diagonal().array() += kJitter;
        llt.compute(gram);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("GpModel: Gram matrix not positive definite");
        }
    }
    chol_ = llt.matrixL();
    recompute_alpha();
}

void GpModel::recompute_alpha() {
    const auto n = static_cast<Eigen::Index>(points_.size());
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        z[i] = values_[static_cast<std::size_t>(i)];
    }
    alpha_ = chol_.triangularView<Eigen::Lower>().solve(z);
    chol_.triangularView<Eigen::Lower>().transpose().solveInPlace(alpha_);
}

}  // namespace riskplan
