#pragma once

#include <cmath>
#include <functional>
#include <string>

#include <doctest.h>

#include "covdist/error.hpp"

namespace covdist_tests {

// Relative deviation against a reference that may legitimately be near zero.
inline double rel_dev(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

// Adaptive Simpson quadrature, used as an independent cross-check of the
// series/functional-equation special-function implementations.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-12, int depth = 48) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const std::function<double(double, double, double, double, double, double, double, int)> go =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole, double eps,
          int level) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    if (level <= 0 || std::abs(left + right - whole) < 15.0 * eps) {
      return left + right + (left + right - whole) / 15.0;
    }
    return go(lo, mid, flo, flm, fmid, left, 0.5 * eps, level - 1) +
           go(mid, hi, fmid, frm, fhi, right, 0.5 * eps, level - 1);
  };
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return go(a, b, fa, fm, fb, whole, tol, depth);
}

// doctest helper: require that `body` throws a covdist::Error with this code.
#define REQUIRE_ERROR_CODE(code_literal, ...)                    \
  do {                                                           \
    bool caught_ = false;                                        \
    try {                                                        \
      __VA_ARGS__;                                               \
    } catch (const covdist::Error& e_) {                         \
      caught_ = true;                                            \
      CHECK(e_.code() == std::string(code_literal));             \
    }                                                            \
    CHECK_MESSAGE(caught_, "expected error " << (code_literal)); \
  } while (0)

}  // namespace covdist_tests
