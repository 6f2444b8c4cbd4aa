#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "spdc/dispersion.hpp"
#include "spdc/frames.hpp"

namespace spdc {

struct Direction {
  double theta_deg = 0.0;
  double phi_deg = 0.0;
};

/// Both refractive-index roots of the Fresnel equation of wave normals for a
/// unit propagation direction (sx, sy, sz) in the crystallophysical frame.
/// Returned as {n_slow, n_fast} with n_slow >= n_fast. Templated so tests
/// can rerun the closed form at extended precision.
template <typename Scalar>
std::pair<Scalar, Scalar> wave_normal_roots(Scalar n_x, Scalar n_y, Scalar n_z,
                                            Scalar sx, Scalar sy, Scalar sz) {
  const Scalar a = Scalar(1) / (n_x * n_x);
  const Scalar b = Scalar(1) / (n_y * n_y);
  const Scalar c = Scalar(1) / (n_z * n_z);
  const Scalar sx2 = sx * sx, sy2 = sy * sy, sz2 = sz * sz;
  // sum_i s_i^2 (u - u_j)(u - u_k) = 0, quadratic in u = 1/n^2.
  const Scalar a1 = -(sx2 * (b + c) + sy2 * (a + c) + sz2 * (a + b));
  const Scalar a0 = sx2 * b * c + sy2 * a * c + sz2 * a * b;
  Scalar disc = a1 * a1 - Scalar(4) * a0;
  if (disc < Scalar(0)) disc = Scalar(0);  // roundoff near optic axes
  const Scalar root = std::sqrt(disc);
  const Scalar u_hi = (-a1 + root) / Scalar(2);  // larger u -> smaller n
  const Scalar u_lo = (-a1 - root) / Scalar(2);
  return {Scalar(1) / std::sqrt(u_lo), Scalar(1) / std::sqrt(u_hi)};
}

struct BranchIndices {
  double n_slow = 0.0;
  double n_fast = 0.0;
};

/// Fresnel wave-normal roots for polar angle theta from Z and azimuth phi
/// from X (degrees).
BranchIndices direction_indices(const PrincipalIndices& indices,
                                double theta_deg, double phi_deg);

/// Principal dispersion: the index triple as a function of wavelength, in a
/// fixed crystallophysical frame.
struct PrincipalDispersion {
  const DispersionModel* x = nullptr;
  const DispersionModel* y = nullptr;
  const DispersionModel* z = nullptr;
  PrincipalIndices at(double lambda_nm) const {
    return {x->index_at(lambda_nm), y->index_at(lambda_nm),
            z->index_at(lambda_nm), lambda_nm};
  }
};

struct PmSolverOptions {
  double scan_step_deg = 0.1;
  double index_tolerance = 1e-10;  // |n_pump - n_signal| at accepted roots
};

/// Collinear degenerate type-I solution set. The signal wavelength is tied
/// structurally to the pump: lambda_s = 2 lambda_p.
struct PhaseMatchSolution {
  std::vector<Direction> directions;
  std::vector<double> residuals;  // |n_fast(lambda_p) - n_slow(lambda_s)|
  std::string branch_config = "pump-fast/signal-slow";
  double lambda_pump_nm = 0.0;
  double lambda_signal_nm = 0.0;
  bool phase_matchable() const { return !directions.empty(); }
};

/// Index mismatch n_fast(lambda_p; theta, phi) - n_slow(lambda_s; theta, phi).
/// Zero at a type-I degenerate phase-matched direction (the reverse branch
/// pairing cannot cross zero under normal dispersion).
double pm_mismatch(const PrincipalIndices& at_pump,
                   const PrincipalIndices& at_signal, double theta_deg,
                   double phi_deg);

/// All theta roots in [0, 90] deg at fixed phi, found by bracketing on the
/// scan grid and bisection; exact grid-point zeros are kept. An empty result
/// means not phase-matchable at that azimuth.
std::vector<double> solve_theta_roots(const PrincipalIndices& at_pump,
                                      const PrincipalIndices& at_signal,
                                      double phi_deg,
                                      const PmSolverOptions& options);

/// Uniaxial solver: scans theta at phi = 0; the mismatch is azimuth
/// independent when n_x = n_y.
PhaseMatchSolution solve_uniaxial_pm(const PrincipalDispersion& dispersion,
                                     double lambda_pump_nm,
                                     const PmSolverOptions& options = {});

/// Biaxial solver: theta roots for each phi on a [0, 90] deg grid; the
/// returned polyline is ordered by (phi, theta).
PhaseMatchSolution solve_biaxial_pm_locus(const PrincipalDispersion& dispersion,
                                          double lambda_pump_nm,
                                          double phi_step_deg = 1.0,
                                          const PmSolverOptions& options = {});

struct PmCurvePoint {
  double lambda_s_nm = 0.0;
  std::optional<Direction> direction;  // empty = no solution (gap)
  double residual = 0.0;
};

/// Phase-matching angle versus signal wavelength at fixed phi, with
/// continuation from the previous root and full re-scan fallback.
std::vector<PmCurvePoint> pm_curve_vs_wavelength(
    const PrincipalDispersion& dispersion, const std::vector<double>& lambda_s_nm,
    double phi_deg = 0.0, const PmSolverOptions& options = {});

}  // namespace spdc
