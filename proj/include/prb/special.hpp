#pragma once

namespace prb::special {

// log Gamma(x) for x > 0 via the Lanczos approximation (g = 671/128, 14 terms).
double log_gamma(double x);

// d/dx log Gamma(x) for x > 0: upward recurrence to x >= 10, then the asymptotic series.
double digamma(double x);

}  // namespace prb::special
