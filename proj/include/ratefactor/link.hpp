#pragma once

#include <string>

namespace ratefactor {

// Transformation between a Poisson rate and the linear-predictor scale the
// factor structure lives on.
enum class Link { identity, log, sqrt };

Link link_from_string(const std::string& name);  // "identity" | "log" | "sqrt"
std::string to_string(Link link);

// g: rate -> linear predictor. Requires rate > 0 for log/sqrt.
double link_forward(Link link, double rate);

// g^{-1}: linear predictor -> rate, floored at kRateFloor so any predictor
// value yields a usable positive rate.
double link_inverse(Link link, double eta);

// d(rate)/d(eta): 1, exp(eta), 2*eta. Signed for sqrt (eta may wander
// negative during iterations; the rate eta^2 stays valid).
double link_inverse_deriv(Link link, double eta);

// Shift added to raw counts before g during initialization so zero counts
// stay finite on the transformed scale: +1/4 (sqrt), +1/2 (log), +kRateFloor
// (identity).
double link_zero_shift(Link link);

}  // namespace ratefactor
