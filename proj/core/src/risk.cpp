#include "riskplan/risk.hpp"

#include <cmath>
#include <stdexcept>

#include "riskplan/normal.hpp"

namespace riskplan {

namespace {

void check_inputs(GaussianBelief belief, double beta) {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw std::invalid_argument("risk metric: beta must lie in (0, 1)");
    }
    if (!(belief.variance >= 0.0)) {
        throw std::invalid_argument("risk metric: belief variance must be nonnegative");
    }
}

}  // namespace

void RiskMetric::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) {
        throw std::invalid_argument("RiskMetric: beta must lie in (0, 1)");
    }
}

double value_at_risk(GaussianBelief belief, double beta, Tail tail) {
    check_inputs(belief, beta);
    if (belief.variance == 0.0) {
        return belief.mean;
    }
    const double sigma = std::sqrt(belief.variance);
    const double q = tail == Tail::Upper ? standard_normal_quantile(1.0 - beta)
                                         : standard_normal_quantile(beta);
    return belief.mean + sigma * q;
}

double cvar(GaussianBelief belief, double beta, Tail tail) {
    check_inputs(belief, beta);
    if (belief.variance == 0.0) {
        return belief.mean;
    }
    const double sigma = std::sqrt(belief.variance);
    if (tail == Tail::Upper) {
        const double q = standard_normal_quantile(1.0 - beta);
        return belief.mean + sigma * standard_normal_pdf(q) / beta;
    }
    const double q = standard_normal_quantile(beta);
    return belief.mean - sigma * standard_normal_pdf(q) / beta;
}

double apply(const RiskMetric& metric, GaussianBelief belief) {
    switch (metric.kind) {
        case MetricKind::ExpectedValue:
            return belief.mean;
        case MetricKind::ValueAtRisk:
            return value_at_risk(belief, metric.beta, metric.tail);
        case MetricKind::ConditionalValueAtRisk:
            return cvar(belief, metric.beta, metric.tail);
    }
    throw std::logic_error("apply: unknown metric kind");
}

std::string to_string(MetricKind kind) {
    switch (kind) {
        case MetricKind::ExpectedValue: return "expected";
        case MetricKind::ValueAtRisk: return "var";
        case MetricKind::ConditionalValueAtRisk: return "cvar";
    }
    return "unknown";
}

std::string to_string(Tail tail) {
    return tail == Tail::Upper ? "upper" : "lower";
}

MetricKind metric_kind_from_string(const std::string& name) {
    if (name == "expected") return MetricKind::ExpectedValue;
    if (name == "var") return MetricKind::ValueAtRisk;
    if (name == "cvar") return MetricKind::ConditionalValueAtRisk;
    throw std::invalid_argument("unknown risk metric '" + name + "' (expected|var|cvar)");
}

Tail tail_from_string(const std::string& name) {
    if (name == "upper") return Tail::Upper;
    if (name == "lower") return Tail::Lower;
    throw std::invalid_argument("unknown tail '" + name + "' (upper|lower)");
}

}  // namespace riskplan
