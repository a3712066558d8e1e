#pragma once

namespace riskplan {

/// Standard normal density at z.
double standard_normal_pdf(double z);

/// Standard normal cumulative distribution at z.
double standard_normal_cdf(double z);

/// Inverse of the standard normal CDF. Rational approximation refined by one
/// Halley step; absolute error below 1e-9 on (0, 1).
/// Throws std::invalid_argument for p outside (0, 1).
double standard_normal_quantile(double p);

}  // namespace riskplan
