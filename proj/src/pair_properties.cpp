#include "spdc/pair_properties.hpp"

#include <algorithm>
#include <cmath>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"
#include "spdc/quadrature.hpp"

namespace spdc {

namespace {

// Fourier amplitude at one delay; even integrand folded onto [0, 8 sigma].
double g2_amplitude(double kappa_fs2_per_mm, double length_mm,
                    double sigma_rad_per_fs, double tau_fs, double abs_tol) {
  const double quarter_kl = 0.25 * kappa_fs2_per_mm * length_mm;
  const auto integrand = [&](double nu) {
    return sinc(quarter_kl * nu * nu) *
           std::exp(-nu * nu / (sigma_rad_per_fs * sigma_rad_per_fs)) *
           std::cos(nu * tau_fs);
  };
  // Initial panels must resolve both the cosine (period 2 pi / tau) and the
  // sinc chirp over the window, or the adaptive test can alias.
  const double window = 8.0 * sigma_rad_per_fs;
  const double cycles = std::max(window * std::abs(tau_fs),
                                 quarter_kl * window * window) /
                        (2.0 * constants::pi);
  int min_depth = 5;
  while ((1 << min_depth) < 8.0 * cycles && min_depth < 20) ++min_depth;
  return 2.0 * integrate_or_throw(integrand, 0.0, window, abs_tol, 48,
                                  min_depth);
}

}  // namespace

G2Profile g2_profile(double kappa_fs2_per_mm, double length_mm,
                     double sigma_rad_per_s,
                     const std::vector<double>& tau_grid_fs,
                     double quad_rel_tol) {
  if (!(length_mm > 0.0)) throw ContractError("g2_profile: length must be positive");
  if (!(sigma_rad_per_s > 0.0)) throw ContractError("g2_profile: detector bandwidth must be positive");
  if (!std::isfinite(kappa_fs2_per_mm)) throw ContractError("g2_profile: kappa must be finite");

  const double sigma_fs = sigma_rad_per_s * 1e-15;  // rad/s -> rad/fs
  const double coarse_tol = quad_rel_tol * sigma_fs;
  const double peak =
      g2_amplitude(kappa_fs2_per_mm, length_mm, sigma_fs, 0.0, coarse_tol);
  if (!(peak > 0.0)) {
    throw NumericsError("g2_profile: vanishing peak amplitude");
  }
  const double abs_tol = quad_rel_tol * std::abs(peak);

  G2Profile profile;
  profile.params = {kappa_fs2_per_mm, length_mm, sigma_rad_per_s};
  profile.tau_fs = tau_grid_fs;
  profile.values.reserve(tau_grid_fs.size());
  for (double tau : tau_grid_fs) {
    const double amp =
        g2_amplitude(kappa_fs2_per_mm, length_mm, sigma_fs, tau, abs_tol);
    const double ratio = amp / peak;
    profile.values.push_back(ratio * ratio);
  }
  return profile;
}

double correlation_time_fs(const G2Profile& profile) {
  const std::size_t n = profile.values.size();
  if (n < 3) throw ContractError("correlation_time: profile too short");
  std::size_t center = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(profile.tau_fs[i]) < std::abs(profile.tau_fs[center]))
      center = i;
  }
  const double peak = profile.values[center];
  for (double v : profile.values) {
    if (v > peak * (1.0 + 1e-12)) {
      throw ContractError("correlation_time: profile maximum is not at tau = 0");
    }
  }
  const double half = 0.5 * peak;

  auto crossing = [&](int step) -> double {
    std::size_t i = center;
    while (true) {
      const std::size_t next = i + step;
      if (next >= n) {
        throw NumericsError(
            "correlation_time: half maximum not bracketed inside the tau "
            "grid; widen the grid");
      }
      if (profile.values[next] < half) {
        const double t0 = profile.tau_fs[i], t1 = profile.tau_fs[next];
        const double v0 = profile.values[i], v1 = profile.values[next];
        return t0 + (half - v0) * (t1 - t0) / (v1 - v0);
      }
      i = next;
    }
  };
  const double right = crossing(+1);
  const double left = crossing(-1);
  return right - left;
}

double converged_correlation_time_fs(double kappa_fs2_per_mm, double length_mm,
                                     double sigma_rad_per_s,
                                     double rel_change) {
  const double sigma_fs = sigma_rad_per_s * 1e-15;
  // Gaussian-limit FWHM as the opening width guess; sinc filtering only
  // broadens the profile further.
  double half_width = 2.0 * std::sqrt(2.0 * std::log(2.0)) / sigma_fs;
  const double kl = std::abs(kappa_fs2_per_mm) * length_mm;
  if (kl > 0.0) {
    const double nu0 = std::sqrt(4.0 * constants::pi / kl);
    half_width = std::max(half_width, 4.0 * constants::pi / nu0);
  }

  auto grid = [](double w, int points) {
    std::vector<double> tau(points);
    for (int i = 0; i < points; ++i)
      tau[i] = -w + 2.0 * w * static_cast<double>(i) / (points - 1);
    return tau;
  };

  for (int widen = 0; widen < 16; ++widen) {
    try {
      int points = 129;
      double fwhm = correlation_time_fs(
          g2_profile(kappa_fs2_per_mm, length_mm, sigma_rad_per_s,
                     grid(half_width, points)));
      for (int refine = 0; refine < 10; ++refine) {
        points = 2 * points - 1;
        const double next = correlation_time_fs(
            g2_profile(kappa_fs2_per_mm, length_mm, sigma_rad_per_s,
                       grid(half_width, points)));
        const double change = std::abs(next - fwhm) / next;
        fwhm = next;
        if (change < rel_change) return fwhm;
      }
      return fwhm;
    } catch (const NumericsError&) {
      half_width *= 2.0;  // half maximum not bracketed yet
    }
  }
  throw NumericsError("correlation_time: failed to bracket the half maximum");
}

double sinc_first_zero_rad_per_s(double kappa_fs2_per_mm, double length_mm) {
  const double kl = std::abs(kappa_fs2_per_mm) * length_mm;
  if (!(kl > 0.0)) {
    throw NumericsError("sinc first zero undefined: kappa * L vanishes");
  }
  return std::sqrt(4.0 * constants::pi / kl) * 1e15;  // rad/fs -> rad/s
}

PairRateResult pair_rate(const PairRateInputs& in) {
  if (!(in.length_mm > 0.0) || !(in.pump_power_mw > 0.0) ||
      !(in.pump_waist_um > 0.0) || !(in.collection_waist_um > 0.0)) {
    throw ContractError("pair_rate: lengths, power and waists must be positive");
  }
  if (!std::isfinite(in.n_g_signal) || !std::isfinite(in.n_g_idler)) {
    throw ContractError("pair_rate: missing group indices");
  }
  const double c = constants::c_m_per_s;
  const double length_m = in.length_mm * 1e-3;
  const double kappa_si = in.kappa_fs2_per_mm * 1e-27;  // fs^2/mm -> s^2/m
  const double sigma_p = in.pump_waist_um * 1e-6;
  const double sigma_1 = in.collection_waist_um * 1e-6;
  const double power_w = in.pump_power_mw * 1e-3;
  const double d_si = in.d_eff_pm_per_v * 1e-12;

  const double omega_p = 2.0 * constants::pi * c / (in.lambda_pump_nm * 1e-9);
  const double omega_deg = 0.5 * omega_p;

  // Integration window: the first 40 sinc^2 zeros or the detector band,
  // whichever is smaller, clamped inside the physical band.
  double window = 0.999 * omega_deg;
  if (kappa_si != 0.0) {
    window = std::min(window,
                      std::sqrt(80.0 * constants::pi /
                                (std::abs(kappa_si) * length_m)));
  }
  if (in.detector_bandwidth_rad_s > 0.0) {
    window = std::min(window, 8.0 * in.detector_bandwidth_rad_s);
  }
  if (kappa_si == 0.0 && !(in.detector_bandwidth_rad_s > 0.0)) {
    throw NumericsError("pair_rate: unbounded integration window (kappa = 0 and no detector bandwidth)");
  }

  const double half_kl = 0.5 * std::abs(kappa_si) * length_m;
  const auto integrand = [&](double nu) {
    const double s = sinc(half_kl * nu * nu);
    return (omega_deg + nu) * (omega_deg - nu) * s * s;
  };
  const double tol = 1e-9 * omega_deg * omega_deg * window;
  const double cycles =
      half_kl * window * window / (2.0 * constants::pi);
  int min_depth = 5;
  while ((1 << min_depth) < 8.0 * cycles && min_depth < 20) ++min_depth;
  const QuadratureResult quad =
      adaptive_simpson(integrand, 0.0, window, tol, 48, min_depth);
  if (!quad.converged) {
    throw NumericsError("pair_rate: spectral integral did not converge");
  }
  const double spectral_integral = 2.0 * quad.value;

  // |E_p|^2 = P / (eps0 c pi sigma_p^2 n) from the Gaussian-pump power
  // relation P = c |D_p|^2 pi sigma_p^2 / (n^3 eps0), |E_p| = |D_p|/(eps0 n^2).
  const double e_p_sq = power_w / (constants::eps0_f_per_m * c * constants::pi *
                                   sigma_p * sigma_p * in.n_pump);
  const double overlap =
      sigma_p * sigma_p / (sigma_1 * sigma_1 + 2.0 * sigma_p * sigma_p);
  const double prefactor = e_p_sq * d_si * d_si * length_m * length_m /
                           (2.0 * constants::pi * c * c) *
                           (in.n_g_signal * in.n_g_idler) /
                           (in.n_signal * in.n_idler) * overlap * overlap;

  PairRateResult result;
  result.raw_rate_per_s = prefactor * spectral_integral;
  result.rate_per_s_mw_mm =
      result.raw_rate_per_s / (in.pump_power_mw * in.length_mm);
  result.integration_window_rad_s = window;
  result.integrand_evaluations = quad.evaluations;
  return result;
}

}  // namespace spdc
