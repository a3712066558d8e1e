#pragma once

#include <string>

#include "riskplan/gp.hpp"

namespace riskplan {

enum class MetricKind { ExpectedValue, ValueAtRisk, ConditionalValueAtRisk };
enum class Tail { Upper, Lower };

/// Risk metric selection: maps a Gaussian belief to a scalar perceived risk.
struct RiskMetric {
    MetricKind kind = MetricKind::ConditionalValueAtRisk;
    double beta = 0.05;  // tail mass, smaller is more conservative
    Tail tail = Tail::Upper;

    void validate() const;
    RiskMetric with_beta(double b) const { return {kind, b, tail}; }
};

/// Value at Risk of a Gaussian belief: the (1-beta)-quantile for the upper
/// tail, the beta-quantile for the lower tail. Degenerate variance returns
/// the mean. Throws std::invalid_argument for beta outside (0, 1) or
/// negative variance.
double value_at_risk(GaussianBelief belief, double beta, Tail tail = Tail::Upper);

/// Conditional Value at Risk: expectation of the tail past the VaR.
/// Upper tail: mu + sigma * pdf(Q(1-beta)) / beta; lower tail mirrored.
double cvar(GaussianBelief belief, double beta, Tail tail = Tail::Upper);

/// Dispatches on the metric variant.
double apply(const RiskMetric& metric, GaussianBelief belief);

std::string to_string(MetricKind kind);
std::string to_string(Tail tail);
MetricKind metric_kind_from_string(const std::string& name);
Tail tail_from_string(const std::string& name);

}  // namespace riskplan
