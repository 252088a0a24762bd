#pragma once

namespace covdist {

// Real dilogarithm Li2(x) = sum_{k>=1} x^k / k^2 for |x| <= 1, extended to
// x < -1 by the standard inversion identity.  Arguments x > 1 are rejected
// ("DomainError"): the analytic continuation is complex there and nothing in
// this library needs it.  Absolute accuracy ~1e-15.
double li2(double x);

// The real-integral variant used by the distance coefficients,
//
//     phi2(x) = -\int_0^x log|1 - y| / y dy,   x >= 0.
//
// For x < 1 this coincides with li2(x); for x >= 1 it keeps integrating
// through the logarithmic singularity (which is integrable), giving
//     phi2(x) = pi^2/3 - log(x)^2 / 2 - li2(1/x).
// Continuous on [0, inf), increasing on [0, 2], decreasing afterwards
// (the integrand changes sign at y = 2).  Negative x is rejected
// ("NegativeArgument").
double phi2(double x);

}  // namespace covdist
