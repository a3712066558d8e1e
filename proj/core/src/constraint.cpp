#include "riskplan/constraint.hpp"

#include <cmath>
#include <stdexcept>

namespace riskplan {

namespace {
constexpr double kMaxExponent = 700.0;
}

void RiskConstraint::validate() const {
    metric.validate();
    if (!(gamma > 0.0)) {
        throw std::invalid_argument("RiskConstraint: gamma must be positive");
    }
}

double phi(const RiskConstraint& c, const GpModel& model, Vec2 x) {
    return c.alpha - apply(c.metric, model.posterior(x));
}

CostEval cost_eval(const RiskConstraint& c, const GpModel& model, Vec2 x) {
    CostEval out;
    out.phi = phi(c, model, x);
    if (out.phi >= 0.0) {
        out.value = 1.0;
        return out;
    }
    double exponent = -c.gamma * out.phi;
    if (exponent > kMaxExponent) {
        exponent = kMaxExponent;
        out.saturated = true;
    }
    out.value = std::exp(exponent);
    return out;
}

double cost(const RiskConstraint& c, const GpModel& model, Vec2 x) {
    return cost_eval(c, model, x).value;
}

Vec2 cost_gradient(const RiskConstraint& c, const GpModel& model, Vec2 x) {
    const CostEval eval = cost_eval(c, model, x);
    if (eval.phi >= 0.0) {
        return {0.0, 0.0};
    }
    const auto deriv = model.posterior_derivative(x);
    const double scale = c.gamma * eval.value;
    return {scale * apply(c.metric, deriv[0]), scale * apply(c.metric, deriv[1])};
}

}  // namespace riskplan
