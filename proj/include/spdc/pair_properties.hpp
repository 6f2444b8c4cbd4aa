#pragma once

#include <vector>

#include "spdc/dispersion.hpp"

namespace spdc {

struct G2Params {
  double kappa_fs2_per_mm = 0.0;
  double length_mm = 1.0;
  double sigma_rad_per_s = 0.0;  // detector bandwidth
};

/// Normalized two-photon correlation profile: peak value 1 at tau = 0.
struct G2Profile {
  std::vector<double> tau_fs;
  std::vector<double> values;
  G2Params params;
};

/// G2(tau) = |integral sinc(kappa nu^2 L / 4) exp(-nu^2/sigma^2)
///            exp(-i nu tau) d nu|^2, normalized to its tau = 0 peak.
/// The integrand is even in nu, so each point is one real cosine
/// transform over |nu| <= 8 sigma by adaptive quadrature.
G2Profile g2_profile(double kappa_fs2_per_mm, double length_mm,
                     double sigma_rad_per_s,
                     const std::vector<double>& tau_grid_fs,
                     double quad_rel_tol = 1e-9);

/// FWHM of a normalized profile with its maximum at tau = 0, by linear
/// interpolation between the bracketing grid points on each side. Throws
/// NumericsError when the half maximum is not bracketed inside the grid
/// (the message advises a wider grid).
double correlation_time_fs(const G2Profile& profile);

/// Grid-converged FWHM: symmetric grids are widened until the half maximum
/// is bracketed and refined until the FWHM changes by < rel_change.
double converged_correlation_time_fs(double kappa_fs2_per_mm, double length_mm,
                                     double sigma_rad_per_s,
                                     double rel_change = 1e-3);

/// Detuning of the first zero of sinc(kappa nu^2 L / 4), rad/s. The default
/// detector bandwidth is chosen as 5x this value so the crystal, not the
/// detector, is the limiting spectral filter.
double sinc_first_zero_rad_per_s(double kappa_fs2_per_mm, double length_mm);

/// Everything the counting-rate integral needs at one phase-matched point.
struct PairRateInputs {
  double d_eff_pm_per_v = 0.0;
  double lambda_pump_nm = 0.0;
  double n_pump = 1.0;    // pump branch at the matched direction
  double n_signal = 1.0;  // signal branch
  double n_idler = 1.0;
  double n_g_signal = 1.0;
  double n_g_idler = 1.0;
  double kappa_fs2_per_mm = 0.0;  // signal-branch GVD at degeneracy
  double length_mm = 1.0;
  double pump_power_mw = 1.0;
  double pump_waist_um = 10.0;        // transverse Gaussian width sigma_p
  double collection_waist_um = 10.0;  // sigma_1 = sigma_2
  double detector_bandwidth_rad_s = 0.0;
};

struct PairRateResult {
  double rate_per_s_mw_mm = 0.0;  // raw rate / (P[mW] * L[mm])
  double raw_rate_per_s = 0.0;
  double integration_window_rad_s = 0.0;
  std::int64_t integrand_evaluations = 0;
};

/// Single-mode photon-pair counting rate for collinear degenerate type-I
/// operation:
///   R = |E_p|^2 d_eff^2 L^2 / (2 pi c^2) * (n_g1 n_g2)/(n_1 n_2)
///       * (sigma_p^2/(sigma_1^2 + 2 sigma_p^2))^2
///       * integral d omega_1 omega_1 (omega_p - omega_1) sinc^2(dk L / 2)
/// with dk = kappa nu^2, nu the detuning from degeneracy, and
/// |E_p|^2 = P / (eps0 c pi sigma_p^2 n_pump) for a Gaussian pump of power P.
PairRateResult pair_rate(const PairRateInputs& in);

}  // namespace spdc
