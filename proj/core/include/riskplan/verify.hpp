#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "riskplan/constraint.hpp"
#include "riskplan/gp.hpp"
#include "riskplan/risk.hpp"

namespace riskplan::verify {

struct CheckResult {
    std::string name;
    double measured = 0.0;   // worst observed error
    double tolerance = 0.0;
    bool pass = false;
};

/// Independent reference posterior: forms the regularized Gram matrix
/// explicitly and solves by Gaussian elimination with partial pivoting.
/// Deliberately shares no code with GpModel's Cholesky path.
GaussianBelief dense_posterior(const Kernel& kernel, const std::vector<Vec2>& points,
                               const std::vector<double>& values, double noise_variance,
                               Vec2 query);

/// Monte-Carlo estimate of the VaR of N(mean, variance) from n samples.
double mc_value_at_risk(double mean, double variance, double beta, Tail tail,
                        std::size_t n, std::uint64_t seed);

/// Monte-Carlo estimate of the CVaR (conditional tail mean) of N(mean, variance).
double mc_cvar(double mean, double variance, double beta, Tail tail, std::size_t n,
               std::uint64_t seed);

/// GP posterior vs the dense-solve oracle on random instances, plus
/// incremental-vs-batch agreement.
std::vector<CheckResult> gp_checks(std::uint64_t seed, int instances = 100,
                                   int max_points = 100);

/// Derivative posterior mean vs central finite differences.
std::vector<CheckResult> derivative_checks(std::uint64_t seed, int configurations = 100);

/// Closed-form VaR/CVaR vs Monte Carlo plus coherence properties.
std::vector<CheckResult> risk_checks(std::uint64_t seed, std::size_t mc_samples = 10'000'000);

/// Analytic cost gradient vs finite differences of the cost field
/// (exact for the expected-value metric, direction agreement for CVaR).
std::vector<CheckResult> gradient_checks(std::uint64_t seed, int states = 100);

/// Trapezoid edge cost vs a 100x finer quadrature and the length lower bound.
std::vector<CheckResult> quadrature_checks(std::uint64_t seed, int segments = 50);

std::vector<CheckResult> run_all(std::uint64_t seed, std::size_t mc_samples = 10'000'000);

}  // namespace riskplan::verify
