#pragma once

#include "riskplan/gp.hpp"
#include "riskplan/risk.hpp"

namespace riskplan {

/// Risk-aware threshold constraint: satisfied where the perceived risk of the
/// field stays at or below alpha.
struct RiskConstraint {
    RiskMetric metric;
    double alpha = 30.0;  // field-units
    double gamma = 0.1;   // penalty steepness, per field-unit

    void validate() const;
};

/// Constraint margin at a state: alpha - r_beta(posterior(x)).
/// Negative iff the constraint is violated.
double phi(const RiskConstraint& c, const GpModel& model, Vec2 x);

struct CostEval {
    double phi = 0.0;
    double value = 1.0;
    bool saturated = false;  // exponent hit the overflow cap
};

/// Risk cost field: max(exp(-gamma * phi(x)), 1). Exactly 1 on the satisfied
/// set, > 1 where violated. The exponent is capped at 700 before
/// exponentiation; capped results carry the saturated flag.
CostEval cost_eval(const RiskConstraint& c, const GpModel& model, Vec2 x);
double cost(const RiskConstraint& c, const GpModel& model, Vec2 x);

/// Conservative gradient of the risk cost: the zero vector on the satisfied
/// set, otherwise gamma * r_beta(d posterior / d x_dim) * exp(-gamma * phi)
/// per dimension, applying the same metric to each derivative belief.
Vec2 cost_gradient(const RiskConstraint& c, const GpModel& model, Vec2 x);

}  // namespace riskplan
