#include "spdc/phase_matching.hpp"

#include <algorithm>
#include <cmath>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

constexpr double kDegToRad = constants::pi / 180.0;

struct UnitDirection {
  double sx, sy, sz;
};

UnitDirection unit_direction(double theta_deg, double phi_deg) {
  const double theta = theta_deg * kDegToRad;
  const double phi = phi_deg * kDegToRad;
  return {std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
          std::cos(theta)};
}

// Bisection on a bracketing interval; the mismatch is continuous in theta.
double bisect_root(const std::function<double(double)>& f, double lo,
                   double hi, double f_lo) {
  for (int i = 0; i < 120 && hi - lo > 1e-13; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

void push_unique(std::vector<double>& roots, double candidate,
                 double min_separation) {
  for (double r : roots) {
    if (std::abs(r - candidate) < min_separation) return;
  }
  roots.push_back(candidate);
}

}  // namespace

BranchIndices direction_indices(const PrincipalIndices& indices,
                                double theta_deg, double phi_deg) {
  const UnitDirection s = unit_direction(theta_deg, phi_deg);
  const auto [slow, fast] = wave_normal_roots<double>(
      indices.n_x, indices.n_y, indices.n_z, s.sx, s.sy, s.sz);
  return {slow, fast};
}

double pm_mismatch(const PrincipalIndices& at_pump,
                   const PrincipalIndices& at_signal, double theta_deg,
                   double phi_deg) {
  const BranchIndices pump = direction_indices(at_pump, theta_deg, phi_deg);
  const BranchIndices signal = direction_indices(at_signal, theta_deg, phi_deg);
  return pump.n_fast - signal.n_slow;
}

std::vector<double> solve_theta_roots(const PrincipalIndices& at_pump,
                                      const PrincipalIndices& at_signal,
                                      double phi_deg,
                                      const PmSolverOptions& options) {
  const auto f = [&](double theta_deg) {
    return pm_mismatch(at_pump, at_signal, theta_deg, phi_deg);
  };
  const double step = options.scan_step_deg;
  const int n = static_cast<int>(std::ceil(90.0 / step));
  std::vector<double> roots;
  double prev_theta = 0.0;
  double prev_f = f(0.0);
  if (std::abs(prev_f) <= options.index_tolerance)
    push_unique(roots, 0.0, 0.5 * step);
  for (int i = 1; i <= n; ++i) {
    const double theta = std::min(i * step, 90.0);
    const double value = f(theta);
    if (std::abs(value) <= options.index_tolerance) {
      push_unique(roots, theta, 0.5 * step);
    } else if (prev_f * value < 0.0) {
      const double root = bisect_root(f, prev_theta, theta, prev_f);
      if (std::abs(f(root)) <= options.index_tolerance) {
        push_unique(roots, root, 0.5 * step);
      }
    }
    prev_theta = theta;
    prev_f = value;
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

PhaseMatchSolution solve_uniaxial_pm(const PrincipalDispersion& dispersion,
                                     double lambda_pump_nm,
                                     const PmSolverOptions& options) {
  PhaseMatchSolution solution;
  solution.lambda_pump_nm = lambda_pump_nm;
  solution.lambda_signal_nm = 2.0 * lambda_pump_nm;
  const PrincipalIndices at_pump = dispersion.at(lambda_pump_nm);
  const PrincipalIndices at_signal = dispersion.at(solution.lambda_signal_nm);
  for (double theta : solve_theta_roots(at_pump, at_signal, 0.0, options)) {
    solution.directions.push_back({theta, 0.0});
    solution.residuals.push_back(
        std::abs(pm_mismatch(at_pump, at_signal, theta, 0.0)));
  }
  return solution;
}

PhaseMatchSolution solve_biaxial_pm_locus(const PrincipalDispersion& dispersion,
                                          double lambda_pump_nm,
                                          double phi_step_deg,
                                          const PmSolverOptions& options) {
  PhaseMatchSolution solution;
  solution.lambda_pump_nm = lambda_pump_nm;
  solution.lambda_signal_nm = 2.0 * lambda_pump_nm;
  const PrincipalIndices at_pump = dispersion.at(lambda_pump_nm);
  const PrincipalIndices at_signal = dispersion.at(solution.lambda_signal_nm);
  const int n = static_cast<int>(std::ceil(90.0 / phi_step_deg));
  for (int i = 0; i <= n; ++i) {
    const double phi = std::min(i * phi_step_deg, 90.0);
    for (double theta : solve_theta_roots(at_pump, at_signal, phi, options)) {
      solution.directions.push_back({theta, phi});
      solution.residuals.push_back(
          std::abs(pm_mismatch(at_pump, at_signal, theta, phi)));
    }
  }
  return solution;
}

std::vector<PmCurvePoint> pm_curve_vs_wavelength(
    const PrincipalDispersion& dispersion,
    const std::vector<double>& lambda_s_nm, double phi_deg,
    const PmSolverOptions& options) {
  std::vector<PmCurvePoint> curve;
  curve.reserve(lambda_s_nm.size());
  bool has_previous = false;
  double previous_theta = 0.0;
  for (double lambda_s : lambda_s_nm) {
    PmCurvePoint point;
    point.lambda_s_nm = lambda_s;
    const double lambda_p = 0.5 * lambda_s;
    const PrincipalIndices at_pump = dispersion.at(lambda_p);
    const PrincipalIndices at_signal = dispersion.at(lambda_s);
    const auto f = [&](double theta) {
      return pm_mismatch(at_pump, at_signal, theta, phi_deg);
    };

    std::optional<double> found;
    if (has_previous) {
      // Continuation: bracket around the previous root first.
      const double lo = std::max(0.0, previous_theta - 2.0 * options.scan_step_deg);
      const double hi = std::min(90.0, previous_theta + 2.0 * options.scan_step_deg);
      const double f_lo = f(lo), f_hi = f(hi);
      if (f_lo * f_hi < 0.0) {
        const double root = bisect_root(f, lo, hi, f_lo);
        if (std::abs(f(root)) <= options.index_tolerance) found = root;
      }
    }
    if (!found) {
      const auto roots = solve_theta_roots(at_pump, at_signal, phi_deg, options);
      if (!roots.empty()) {
        if (has_previous) {
          const double prev = previous_theta;
          found = *std::min_element(roots.begin(), roots.end(),
                                    [prev](double l, double r) {
                                      return std::abs(l - prev) <
                                             std::abs(r - prev);
                                    });
        } else {
          found = roots.front();
        }
      }
    }
    if (found) {
      point.direction = Direction{*found, phi_deg};
      point.residual = std::abs(f(*found));
      previous_theta = *found;
      has_previous = true;
    } else {
      has_previous = false;
    }
    curve.push_back(point);
  }
  return curve;
}

}  // namespace spdc
