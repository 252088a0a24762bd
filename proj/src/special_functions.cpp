#include "covdist/special_functions.hpp"

#include <cmath>

#include "covdist/error.hpp"

namespace covdist {
namespace {

constexpr double kPi = 3.14159265358979323846;

// Power series on |x| <= 1/2: converges geometrically, <= ~60 terms.
double li2_series(double x) {
  double term = x;
  double sum = x;
  for (int k = 2; k < 80; ++k) {
    term *= x;
    const double add = term / (static_cast<double>(k) * k);
    sum += add;
    if (std::abs(add) < 1e-18 * (1.0 + std::abs(sum))) break;
  }
  return sum;
}

}  // namespace

double li2(double x) {
  if (x > 1.0) {
    throw Error("DomainError", "li2 is real only for x <= 1 (got x = " + std::to_string(x) + ")");
  }
  if (x == 1.0) return kPi * kPi / 6.0;
  if (x == -1.0) return -kPi * kPi / 12.0;
  if (x < -1.0) {
    // Inversion: Li2(x) = -pi^2/6 - log(-x)^2/2 - Li2(1/x); 1/x lands in (-1, 0).
    const double lg = std::log(-x);
    return -kPi * kPi / 6.0 - 0.5 * lg * lg - li2(1.0 / x);
  }
  if (x < -0.5) {
    // Landen: Li2(x) = -log(1-x)^2/2 - Li2(x/(x-1)); x/(x-1) lands in (1/3, 1/2].
    const double lg = std::log1p(-x);
    return -0.5 * lg * lg - li2_series(x / (x - 1.0));
  }
  if (x <= 0.5) return li2_series(x);
  // Reflection onto [0, 1/2): Li2(x) = pi^2/6 - log(x) log(1-x) - Li2(1-x).
  return kPi * kPi / 6.0 - std::log(x) * std::log1p(-x) - li2_series(1.0 - x);
}

double phi2(double x) {
  if (x < 0.0) {
    throw Error("NegativeArgument", "phi2 is defined on x >= 0 (got x = " + std::to_string(x) + ")");
  }
  if (x < 1.0) return li2(x);
  if (x == 1.0) return kPi * kPi / 6.0;
  const double lg = std::log(x);
  return kPi * kPi / 3.0 - 0.5 * lg * lg - li2(1.0 / x);
}

}  // namespace covdist
