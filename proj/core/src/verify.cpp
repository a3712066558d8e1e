#include "riskplan/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "riskplan/graph_planner.hpp"
#include "riskplan/rng.hpp"

namespace riskplan::verify {

namespace {

const Rect kDomain{{0.0, 0.0}, {20.0, 20.0}};

/// Solves A x = b in place by Gaussian elimination with partial pivoting.
std::vector<double> gauss_solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t row = col + 1; row < n; ++row) {
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) {
                pivot = row;
            }
        }
        if (a[pivot][col] == 0.0) {
            throw std::runtime_error("gauss_solve: singular matrix");
        }
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t row = col + 1; row < n; ++row) {
            const double factor = a[row][col] / a[col][col];
            if (factor == 0.0) {
                continue;
            }
            for (std::size_t k = col; k < n; ++k) {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (std::size_t i = n; i-- > 0;) {
        double sum = b[i];
        for (std::size_t k = i + 1; k < n; ++k) {
            sum -= a[i][k] * x[k];
        }
        x[i] = sum / a[i][i];
    }
    return x;
}

GpModel random_model(Rng& rng, int n_points, const Kernel& kernel, double noise) {
    GpModel model(kernel, noise, kDomain);
    for (int i = 0; i < n_points; ++i) {
        const Vec2 p{rng.uniform(kDomain.min.x, kDomain.max.x),
                     rng.uniform(kDomain.min.y, kDomain.max.y)};
        model.add_observation(p, rng.uniform(-20.0, 100.0));
    }
    return model;
}

CheckResult make_result(std::string name, double measured, double tolerance) {
    return {std::move(name), measured, tolerance, measured <= tolerance};
}

}  // namespace

GaussianBelief dense_posterior(const Kernel& kernel, const std::vector<Vec2>& points,
                               const std::vector<double>& values, double noise_variance,
                               Vec2 query) {
    const std::size_t n = points.size();
    if (n == 0) {
        return {0.0, kernel(query, query)};
    }
    std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            gram[i][j] = kernel(points[i], points[j]);
        }
        gram[i][i] += noise_variance;
    }
    std::vector<double> k(n);
    for (std::size_t i = 0; i < n; ++i) {
        k[i] = kernel(points[i], query);
    }
    const std::vector<double> alpha = gauss_solve(gram, values);
    const std::vector<double> v = gauss_solve(gram, k);
    double mean = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean += k[i] * alpha[i];
        quad += k[i] * v[i];
    }
    return {mean, kernel(query, query) - quad};
}

double mc_value_at_risk(double mean, double variance, double beta, Tail tail,
                        std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    const double sd = std::sqrt(variance);
    std::vector<double> samples(n);
    for (double& s : samples) {
        s = rng.normal(mean, sd);
    }
    // Upper tail: the (1-beta)-quantile.
    const double q = tail == Tail::Upper ? 1.0 - beta : beta;
    const auto idx = static_cast<std::ptrdiff_t>(q * static_cast<double>(n));
    std::nth_element(samples.begin(), samples.begin() + idx, samples.end());
    return samples[static_cast<std::size_t>(idx)];
}

double mc_cvar(double mean, double variance, double beta, Tail tail, std::size_t n,
               std::uint64_t seed) {
    Rng rng(seed);
    const double sd = std::sqrt(variance);
    std::vector<double> samples(n);
    for (double& s : samples) {
        s = rng.normal(mean, sd);
    }
    const double q = tail == Tail::Upper ? 1.0 - beta : beta;
    const auto idx = static_cast<std::ptrdiff_t>(q * static_cast<double>(n));
    std::nth_element(samples.begin(), samples.begin() + idx, samples.end());
    if (tail == Tail::Upper) {
        const double sum = std::accumulate(samples.begin() + idx, samples.end(), 0.0);
        return sum / static_cast<double>(samples.end() - (samples.begin() + idx));
    }
    const double sum = std::accumulate(samples.begin(), samples.begin() + idx + 1, 0.0);
    return sum / static_cast<double>(idx + 1);
}

std::vector<CheckResult> gp_checks(std::uint64_t seed, int instances, int max_points) {
    Rng rng(seed);
    double worst_mean = 0.0;
    double worst_var = 0.0;
    for (int i = 0; i < instances; ++i) {
        Kernel kernel;
        kernel.signal_variance = rng.uniform(1.0, 80.0);
        kernel.lengthscales = {rng.uniform(0.5, 4.0), rng.uniform(0.5, 4.0)};
        const double noise = rng.uniform(0.1, 2.0);
        const int n = 1 + static_cast<int>(rng.uniform01() * (max_points - 1));
        const GpModel model = random_model(rng, n, kernel, noise);
        for (int q = 0; q < 5; ++q) {
            const Vec2 query{rng.uniform(kDomain.min.x, kDomain.max.x),
                             rng.uniform(kDomain.min.y, kDomain.max.y)};
            const GaussianBelief got = model.posterior(query);
            const GaussianBelief want =
                dense_posterior(kernel, model.points(), model.values(), noise, query);
            worst_mean = std::max(worst_mean, std::abs(got.mean - want.mean));
            worst_var = std::max(worst_var,
                                 std::abs(got.variance - std::max(want.variance, 0.0)));
        }
    }

    // incremental appends vs a batch-built model on the same data
    double worst_incremental = 0.0;
    {
        Kernel kernel;
        const double noise = 0.5;
        GpModel incremental(kernel, noise, kDomain);
        std::vector<Vec2> pts;
        std::vector<double> vals;
        for (int i = 0; i < 50; ++i) {
            const Vec2 p{rng.uniform(kDomain.min.x, kDomain.max.x),
                         rng.uniform(kDomain.min.y, kDomain.max.y)};
            const double z = rng.uniform(0.0, 100.0);
            incremental.add_observation(p, z);
            pts.push_back(p);
            vals.push_back(z);
        }
        GpModel batch(kernel, noise, kDomain);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            batch.add_observation(pts[i], vals[i]);
        }
        // also compare against the dense oracle for the same dataset
        for (int q = 0; q < 20; ++q) {
            const Vec2 query{rng.uniform(kDomain.min.x, kDomain.max.x),
                             rng.uniform(kDomain.min.y, kDomain.max.y)};
            const GaussianBelief a = incremental.posterior(query);
            const GaussianBelief b =
                dense_posterior(kernel, pts, vals, noise, query);
            worst_incremental =
                std::max({worst_incremental, std::abs(a.mean - b.mean),
                          std::abs(a.variance - std::max(b.variance, 0.0))});
        }
    }

    return {make_result("gp.posterior_mean_vs_dense", worst_mean, 1e-8),
            make_result("gp.posterior_var_vs_dense", worst_var, 1e-8),
            make_result("gp.incremental_vs_batch", worst_incremental, 1e-8)};
}

std::vector<CheckResult> derivative_checks(std::uint64_t seed, int configurations) {
    Rng rng(seed);
    const double h = 1e-5;
    double worst = 0.0;
    for (int i = 0; i < configurations; ++i) {
        Kernel kernel;
        kernel.signal_variance = rng.uniform(5.0, 80.0);
        kernel.lengthscales = {rng.uniform(0.8, 4.0), rng.uniform(0.8, 4.0)};
        const GpModel model =
            random_model(rng, 3 + static_cast<int>(rng.uniform01() * 30), kernel, 0.5);
        const Vec2 query{rng.uniform(2.0, 18.0), rng.uniform(2.0, 18.0)};
        const auto deriv = model.posterior_derivative(query);
        const Vec2 dx{h, 0.0};
        const Vec2 dy{0.0, h};
        const double fd_x =
            (model.posterior(query + dx).mean - model.posterior(query - dx).mean) / (2 * h);
        const double fd_y =
            (model.posterior(query + dy).mean - model.posterior(query - dy).mean) / (2 * h);
        const double scale = std::max({std::abs(deriv[0].mean), std::abs(deriv[1].mean), 1e-3});
        worst = std::max({worst, std::abs(deriv[0].mean - fd_x) / scale,
                          std::abs(deriv[1].mean - fd_y) / scale});
    }
    return {make_result("gp.derivative_mean_vs_fd", worst, 1e-4)};
}

std::vector<CheckResult> risk_checks(std::uint64_t seed, std::size_t mc_samples) {
    std::vector<CheckResult> results;
    double worst_var = 0.0;
    double worst_cvar = 0.0;
    const GaussianBelief unit{0.0, 1.0};
    int tag = 0;
    for (const double beta : {0.01, 0.05, 0.2, 0.5}) {
        const double closed_var = value_at_risk(unit, beta, Tail::Upper);
        const double closed_cvar = cvar(unit, beta, Tail::Upper);
        const double mc_var =
            mc_value_at_risk(0.0, 1.0, beta, Tail::Upper, mc_samples, seed + tag);
        const double mc_cv = mc_cvar(0.0, 1.0, beta, Tail::Upper, mc_samples, seed + tag + 100);
        // relative tolerance with an absolute floor of 1 (VaR at beta=0.5 is 0)
        worst_var = std::max(worst_var, std::abs(closed_var - mc_var) /
                                            std::max(1.0, std::abs(closed_var)));
        worst_cvar = std::max(worst_cvar, std::abs(closed_cvar - mc_cv) /
                                              std::max(1.0, std::abs(closed_cvar)));
        ++tag;
    }
    results.push_back(make_result("risk.var_vs_mc", worst_var, 0.005));
    results.push_back(make_result("risk.cvar_vs_mc", worst_cvar, 0.005));

    Rng rng(seed ^ 0xabcd);
    double worst_translation = 0.0;
    double worst_homogeneity = 0.0;
    double worst_order = 0.0;  // violation of CVaR >= VaR >= mean
    for (int i = 0; i < 200; ++i) {
        const double mu = rng.uniform(-50.0, 50.0);
        const double sigma = rng.uniform(0.1, 10.0);
        const double beta = rng.uniform(0.01, 0.99);
        const double c = rng.uniform(-20.0, 20.0);
        const double lambda = rng.uniform(0.1, 5.0);
        const GaussianBelief base{mu, sigma * sigma};
        const GaussianBelief shifted{mu + c, sigma * sigma};
        const GaussianBelief scaled{lambda * mu, lambda * lambda * sigma * sigma};
        for (const Tail tail : {Tail::Upper, Tail::Lower}) {
            worst_translation = std::max(
                {worst_translation,
                 std::abs(value_at_risk(shifted, beta, tail) -
                          (value_at_risk(base, beta, tail) + c)),
                 std::abs(cvar(shifted, beta, tail) - (cvar(base, beta, tail) + c))});
            worst_homogeneity = std::max(
                {worst_homogeneity,
                 std::abs(value_at_risk(scaled, beta, tail) -
                          lambda * value_at_risk(base, beta, tail)),
                 std::abs(cvar(scaled, beta, tail) - lambda * cvar(base, beta, tail))});
        }
        worst_order = std::max(worst_order,
                               value_at_risk(base, beta, Tail::Upper) -
                                   cvar(base, beta, Tail::Upper));
    }
    // scale-aware tolerance: properties are exact up to rounding of ~100-unit values
    results.push_back(make_result("risk.translation_equivariance", worst_translation, 1e-10));
    results.push_back(make_result("risk.positive_homogeneity", worst_homogeneity, 1e-10));
    results.push_back(make_result("risk.cvar_ge_var", worst_order, 1e-10));
    return results;
}

std::vector<CheckResult> gradient_checks(std::uint64_t seed, int states) {
    Rng rng(seed);
    Kernel kernel;
    const GpModel model = random_model(rng, 40, kernel, 0.5);

    RiskConstraint expected{{MetricKind::ExpectedValue, 0.05, Tail::Upper}, 5.0, 0.1};
    double worst_rel = 0.0;
    int used = 0;
    const double h = 1e-5;
    int attempts = 0;
    while (used < states && attempts < states * 200) {
        ++attempts;
        const Vec2 x{rng.uniform(1.0, 19.0), rng.uniform(1.0, 19.0)};
        if (phi(expected, model, x) >= -0.5) {
            continue;  // want clearly violated states
        }
        const Vec2 analytic = cost_gradient(expected, model, x);
        const Vec2 dx{h, 0.0};
        const Vec2 dy{0.0, h};
        const Vec2 fd{(cost(expected, model, x + dx) - cost(expected, model, x - dx)) / (2 * h),
                      (cost(expected, model, x + dy) - cost(expected, model, x - dy)) / (2 * h)};
        const double scale = std::max({std::abs(fd.x), std::abs(fd.y), 1e-6});
        worst_rel = std::max({worst_rel, std::abs(analytic.x - fd.x) / scale,
                              std::abs(analytic.y - fd.y) / scale});
        ++used;
    }

    // CVaR metric: the commuted gradient is only conservative, so an exact
    // match is not expected. On a hazard-bump field, its direction must agree
    // with the finite-difference gradient at nearly all violated states.
    Rng field_rng(seed ^ 0x5eed);
    Kernel field_kernel;
    field_kernel.lengthscales = {1.5, 1.5};
    GpModel field(field_kernel, 0.5, kDomain);
    const auto bump = [](Vec2 p, Vec2 c) {
        const double ax = (p.x - c.x) / 1.1;
        const double ay = (p.y - c.y) / 0.9;
        return 100.0 * std::exp(-ax * ax - ay * ay);
    };
    for (int i = 0; i < 160; ++i) {
        const Vec2 p{field_rng.uniform(2.0, 18.0), field_rng.uniform(2.0, 18.0)};
        const double g =
            bump(p, {7.0, 7.0}) + bump(p, {13.0, 12.0}) + field_rng.normal(0.0, 0.7071);
        field.add_observation(p, g);
    }
    RiskConstraint cvar_c{{MetricKind::ConditionalValueAtRisk, 0.05, Tail::Upper}, 30.0, 0.1};
    int checked = 0;
    int agree = 0;
    attempts = 0;
    while (checked < 1000 && attempts < 400000) {
        ++attempts;
        const Vec2 x{field_rng.uniform(1.0, 19.0), field_rng.uniform(1.0, 19.0)};
        if (phi(cvar_c, field, x) >= 0.0) {
            continue;
        }
        const Vec2 analytic = cost_gradient(cvar_c, field, x);
        const Vec2 dx{h, 0.0};
        const Vec2 dy{0.0, h};
        const Vec2 fd{(cost(cvar_c, field, x + dx) - cost(cvar_c, field, x - dx)) / (2 * h),
                      (cost(cvar_c, field, x + dy) - cost(cvar_c, field, x - dy)) / (2 * h)};
        ++checked;
        if (dot(analytic, fd) > 0.0 || fd.norm() < 1e-6) {
            ++agree;
        }
    }
    const double disagree_rate =
        checked > 0 ? 1.0 - static_cast<double>(agree) / checked : 1.0;

    return {make_result("gradient.expected_metric_vs_fd", worst_rel, 1e-3),
            make_result("gradient.cvar_sign_disagreement", disagree_rate, 0.05)};
}

std::vector<CheckResult> quadrature_checks(std::uint64_t seed, int segments) {
    Rng rng(seed);
    // posterior of a hazard-bump field, the regime edge costs operate in
    Kernel kernel;
    kernel.lengthscales = {1.5, 1.5};
    GpModel model(kernel, 0.5, kDomain);
    const auto bump = [](Vec2 p, Vec2 c) {
        const double ax = (p.x - c.x) / 1.1;
        const double ay = (p.y - c.y) / 0.9;
        return 100.0 * std::exp(-ax * ax - ay * ay);
    };
    for (int i = 0; i < 140; ++i) {
        const Vec2 p{rng.uniform(2.0, 18.0), rng.uniform(2.0, 18.0)};
        model.add_observation(p, bump(p, {7.0, 7.0}) + bump(p, {13.0, 12.0}) +
                                     rng.normal(0.0, 0.7071));
    }
    RiskConstraint constraint{{MetricKind::ConditionalValueAtRisk, 0.05, Tail::Upper}, 30.0,
                              0.1};

    double worst_rel = 0.0;
    double worst_lower_bound = 0.0;  // violation of edge_cost >= length
    const double step = 0.1;
    for (int i = 0; i < segments; ++i) {
        const Vec2 a{rng.uniform(1.0, 19.0), rng.uniform(1.0, 19.0)};
        const Vec2 b{rng.uniform(1.0, 19.0), rng.uniform(1.0, 19.0)};
        const double coarse = edge_cost(constraint, model, a, b, step);
        // reference: same composite trapezoid at 100x finer resolution,
        // written out directly rather than through edge_cost
        const double len = distance(a, b);
        const int n = std::max(1, static_cast<int>(std::ceil(len / (step / 100.0))));
        double sum = 0.5 * (cost(constraint, model, a) + cost(constraint, model, b));
        for (int k = 1; k < n; ++k) {
            sum += cost(constraint, model, lerp(a, b, static_cast<double>(k) / n));
        }
        const double fine = sum * (len / n);
        if (fine > 0.0) {
            worst_rel = std::max(worst_rel, std::abs(coarse - fine) / fine);
        }
        worst_lower_bound = std::max(worst_lower_bound, len - coarse);
    }
    return {make_result("quadrature.trapezoid_vs_fine", worst_rel, 0.01),
            make_result("quadrature.length_lower_bound", worst_lower_bound, 1e-9)};
}

std::vector<CheckResult> run_all(std::uint64_t seed, std::size_t mc_samples) {
    std::vector<CheckResult> all;
    for (auto batch : {gp_checks(seed, 100, 100), derivative_checks(seed + 1, 100),
                       risk_checks(seed + 2, mc_samples), gradient_checks(seed + 3, 100),
                       quadrature_checks(seed + 4, 50)}) {
        all.insert(all.end(), batch.begin(), batch.end());
    }
    return all;
}

}  // namespace riskplan::verify
