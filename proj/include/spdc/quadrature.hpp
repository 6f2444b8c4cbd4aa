#pragma once

#include <cmath>
#include <cstdint>

#include "spdc/errors.hpp"

namespace spdc {

/// sin(x)/x with sinc(0) = 1 (unnormalized convention).
inline double sinc(double x) {
  // Below ~1e-4 the Taylor form is more accurate than sin(x)/x.
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::int64_t evaluations = 0;
  bool converged = true;
};

namespace detail {

template <typename F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm,
                       double fb, double whole, double tol, int depth,
                       int forced_splits, QuadratureResult& stats) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  stats.evaluations += 2;
  const double h = b - a;
  const double left = h / 12.0 * (fa + 4.0 * flm + fm);
  const double right = h / 12.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) {
    stats.converged = false;
    stats.error_estimate += std::abs(delta);
    return left + right + delta / 15.0;
  }
  // Oscillatory integrands can alias into an accidentally small delta on
  // coarse panels; forced splits keep the acceptance test honest until the
  // panels resolve the integrand.
  if (forced_splits <= 0 && std::abs(delta) <= 15.0 * tol) {
    stats.error_estimate += std::abs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1,
                         forced_splits - 1, stats) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1,
                         forced_splits - 1, stats);
}

}  // namespace detail

/// Adaptive Simpson quadrature with a deterministic, schedule-independent
/// evaluation order. `tol` is an absolute tolerance on the integral;
/// `min_depth` forces that many binary splits before the error test may
/// accept a panel (size it to the integrand's oscillation count).
template <typename F>
QuadratureResult adaptive_simpson(const F& f, double a, double b, double tol,
                                  int max_depth = 48, int min_depth = 5) {
  QuadratureResult stats;
  if (a == b) return stats;
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  stats.evaluations = 3;
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  stats.value = detail::simpson_recurse(f, a, b, fa, fm, fb, whole, tol,
                                        max_depth, min_depth, stats);
  return stats;
}

/// Like adaptive_simpson but throws NumericsError when the requested
/// tolerance was not met; the message carries the achieved estimate.
template <typename F>
double integrate_or_throw(const F& f, double a, double b, double tol,
                          int max_depth = 48, int min_depth = 5) {
  const QuadratureResult r = adaptive_simpson(f, a, b, tol, max_depth, min_depth);
  if (!r.converged) {
    throw NumericsError("quadrature did not converge on [" +
                        std::to_string(a) + ", " + std::to_string(b) +
                        "]: achieved estimate " + std::to_string(r.value) +
                        " with error ~" + std::to_string(r.error_estimate));
  }
  return r.value;
}

}  // namespace spdc
