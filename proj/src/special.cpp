#include "prb/special.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace prb::special {

namespace {

// Lanczos series with g = 671/128 and 14 terms (relative error ~1e-15 for x > 0).
constexpr double kLanczosG = 5.24218750000000000;
constexpr std::array<double, 14> kLanczosCoef = {
    57.1562356658629235,     -59.5979603554754912,    14.1360979747417471,
    -0.491913816097620199,   .339946499848118887e-4,  .465236289270485756e-4,
    -.983744753048795646e-4, .158088703224912494e-3,  -.210264441724104883e-3,
    .217439618115212643e-3,  -.164318106536763890e-3, .844182239838527433e-4,
    -.261908384015814087e-4, .368991826595316234e-5};
constexpr double kLanczosSeries0 = 0.999999999999997092;
constexpr double kSqrt2Pi = 2.5066282746310005;

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
  const double t = x + kLanczosG;
  double series = kLanczosSeries0;
  double y = x;
  for (double c : kLanczosCoef) series += c / ++y;
  return (x + 0.5) * std::log(t) - t + std::log(kSqrt2Pi * series / x);
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: argument must be positive");
  double acc = 0.0;
  while (x < 10.0) {
    acc -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double tail =
      inv2 * (1.0 / 12.0 -
              inv2 * (1.0 / 120.0 -
                      inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
  return acc + std::log(x) - 0.5 * inv - tail;
}

}  // namespace prb::special
