#include <doctest.h>

#include <cmath>
#include <random>

#include "spdc/errors.hpp"
#include "spdc/pair_properties.hpp"
#include "spdc/quadrature.hpp"

using namespace spdc;

namespace {

std::vector<double> symmetric_grid(double half_width_fs, int points) {
  std::vector<double> tau(points);
  for (int i = 0; i < points; ++i) {
    tau[i] = -half_width_fs +
             2.0 * half_width_fs * static_cast<double>(i) / (points - 1);
  }
  return tau;
}

}  // namespace

TEST_CASE("sinc convention: sin(x)/x with sinc(0) = 1") {
  CHECK(sinc(0.0) == 1.0);
  CHECK(sinc(1.3) == doctest::Approx(std::sin(1.3) / 1.3).epsilon(1e-15));
  // Taylor branch continuity around the crossover.
  CHECK(sinc(9.9e-5) == doctest::Approx(sinc(1.01e-4)).epsilon(1e-9));
}

TEST_CASE("adaptive quadrature reports non-convergence honestly") {
  const auto nasty = [](double x) { return std::cos(500.0 * x); };
  const QuadratureResult shallow = adaptive_simpson(nasty, 0.0, 3.0, 1e-14, 2);
  CHECK_FALSE(shallow.converged);
  CHECK_THROWS_AS(integrate_or_throw(nasty, 0.0, 3.0, 1e-14, 2), NumericsError);
  const QuadratureResult deep = adaptive_simpson(nasty, 0.0, 3.0, 1e-12);
  CHECK(deep.converged);
  CHECK(deep.value == doctest::Approx(std::sin(1500.0) / 500.0).epsilon(1e-8));
}

TEST_CASE("Gaussian limit: FWHM equals 2 sqrt(2 ln 2) / sigma") {
  const double sigma = 3e14;  // rad/s
  const double expected_fs = 2.0 * std::sqrt(2.0 * std::log(2.0)) / (sigma * 1e-15);
  SUBCASE("kappa = 0") {
    const double fwhm = converged_correlation_time_fs(0.0, 1.0, sigma);
    CHECK(fwhm == doctest::Approx(expected_fs).epsilon(5e-3));
  }
  SUBCASE("vanishing length is the same limit") {
    const double fwhm = converged_correlation_time_fs(300.0, 1e-12, sigma);
    CHECK(fwhm == doctest::Approx(expected_fs).epsilon(5e-3));
  }
  SUBCASE("doubling sigma halves the correlation time") {
    const double one = converged_correlation_time_fs(0.0, 1.0, sigma);
    const double two = converged_correlation_time_fs(0.0, 1.0, 2.0 * sigma);
    CHECK(one / two == doctest::Approx(2.0).epsilon(1e-3));
  }
}

TEST_CASE("profile is normalized, symmetric, and bounded") {
  const double kappa = 280.0, length = 1.0, sigma = 1.2e15;
  const auto tau = symmetric_grid(60.0, 241);
  const G2Profile profile = g2_profile(kappa, length, sigma, tau);
  const std::size_t n = profile.values.size();
  std::size_t center = n / 2;
  CHECK(profile.tau_fs[center] == doctest::Approx(0.0));
  CHECK(profile.values[center] == doctest::Approx(1.0).epsilon(1e-12));
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(profile.values[i] >= 0.0);
    CHECK(profile.values[i] <= 1.0 + 1e-12);
    CHECK(profile.values[i] ==
          doctest::Approx(profile.values[n - 1 - i]).epsilon(1e-10));
  }
}

TEST_CASE("quadrature profile matches a 10x-denser trapezoid oracle") {
  const double kappa = 350.0, length = 1.0, sigma_rad_s = 9e14;
  const auto tau = symmetric_grid(40.0, 41);
  const G2Profile profile = g2_profile(kappa, length, sigma_rad_s, tau, 1e-10);

  const double sigma_fs = sigma_rad_s * 1e-15;
  auto oracle_amplitude = [&](double tau_fs) {
    // Dense fixed-step trapezoid over the same window.
    const int steps = 800000;
    const double upper = 8.0 * sigma_fs;
    const double h = upper / steps;
    double acc = 0.0;
    for (int i = 0; i <= steps; ++i) {
      const double nu = i * h;
      const double weight = (i == 0 || i == steps) ? 0.5 : 1.0;
      acc += weight * sinc(0.25 * kappa * length * nu * nu) *
             std::exp(-nu * nu / (sigma_fs * sigma_fs)) * std::cos(nu * tau_fs);
    }
    return 2.0 * acc * h;
  };
  const double peak = oracle_amplitude(0.0);
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double ratio = oracle_amplitude(tau[i]) / peak;
    const double oracle_value = ratio * ratio;
    CHECK(std::abs(profile.values[i] - oracle_value) <
          1e-6 * std::max(oracle_value, 1e-3));
  }
}

TEST_CASE("correlation time grows with crystal length") {
  const double sigma = 2e15;
  double previous = 0.0;
  for (double length : {0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    const double fwhm = converged_correlation_time_fs(300.0, length, sigma);
    CHECK(fwhm >= previous * (1.0 - 1e-6));
    previous = fwhm;
  }
}

TEST_CASE("half maximum outside the grid raises an advisory error") {
  const auto tau = symmetric_grid(0.5, 21);  // far too narrow
  const G2Profile profile = g2_profile(0.0, 1.0, 1e13, tau);
  CHECK_THROWS_WITH_AS(correlation_time_fs(profile),
                       doctest::Contains("widen the grid"), NumericsError);
}

TEST_CASE("pair rate scales exactly with d_eff^2 and pump power") {
  PairRateInputs in;
  in.d_eff_pm_per_v = 1.3;
  in.lambda_pump_nm = 532.0;
  in.n_pump = 1.63;
  in.n_signal = in.n_idler = 1.60;
  in.n_g_signal = in.n_g_idler = 1.68;
  in.kappa_fs2_per_mm = 240.0;
  in.length_mm = 1.0;
  in.pump_power_mw = 1.0;
  in.pump_waist_um = 10.0;
  in.collection_waist_um = 10.0;
  in.detector_bandwidth_rad_s = 2e15;
  const PairRateResult base = pair_rate(in);
  CHECK(base.raw_rate_per_s > 0.0);

  SUBCASE("doubling d_eff quadruples the rate to machine precision") {
    PairRateInputs scaled = in;
    scaled.d_eff_pm_per_v = 2.0 * in.d_eff_pm_per_v;
    const PairRateResult result = pair_rate(scaled);
    CHECK(result.raw_rate_per_s == 4.0 * base.raw_rate_per_s);
  }
  SUBCASE("raw rate is linear in pump power; normalized rate is invariant") {
    PairRateInputs scaled = in;
    scaled.pump_power_mw = 2.0 * in.pump_power_mw;
    const PairRateResult result = pair_rate(scaled);
    CHECK(result.raw_rate_per_s == 2.0 * base.raw_rate_per_s);
    CHECK(result.rate_per_s_mw_mm == base.rate_per_s_mw_mm);
  }
  SUBCASE("raw rate picks up L^2; the report normalizes one power away") {
    PairRateInputs scaled = in;
    scaled.length_mm = 2.0 * in.length_mm;
    const PairRateResult result = pair_rate(scaled);
    // The sinc window narrows as L grows, so the spectral integral shrinks
    // below the pure L^2 growth.
    CHECK(result.raw_rate_per_s > base.raw_rate_per_s);
    CHECK(result.raw_rate_per_s < 4.0 * base.raw_rate_per_s);
  }
}

TEST_CASE("beam overlap favors tight collection and caps at 1/4") {
  std::mt19937 rng(113);
  std::uniform_real_distribution<double> waist(1.0, 300.0);
  PairRateInputs in;
  in.d_eff_pm_per_v = 1.0;
  in.lambda_pump_nm = 532.0;
  in.n_pump = in.n_signal = in.n_idler = 1.6;
  in.n_g_signal = in.n_g_idler = 1.65;
  in.kappa_fs2_per_mm = 200.0;
  in.detector_bandwidth_rad_s = 2e15;
  for (int trial = 0; trial < 25; ++trial) {
    in.pump_waist_um = waist(rng);
    in.collection_waist_um = waist(rng);
    const double rate = pair_rate(in).raw_rate_per_s;
    PairRateInputs tight = in;
    tight.collection_waist_um = 1e-6;  // sigma_1 -> 0 limit
    const double cap = pair_rate(tight).raw_rate_per_s;
    CHECK(rate <= cap * (1.0 + 1e-12));
    // rate / cap = (overlap / (1/2))^2 with overlap <= 1/2.
    const double sp2 = in.pump_waist_um * in.pump_waist_um;
    const double s12 = in.collection_waist_um * in.collection_waist_um;
    const double overlap = sp2 / (s12 + 2.0 * sp2);
    CHECK(rate / cap == doctest::Approx(4.0 * overlap * overlap).epsilon(1e-9));
  }
}

TEST_CASE("missing group indices violate the contract") {
  PairRateInputs in;
  in.d_eff_pm_per_v = 1.0;
  in.lambda_pump_nm = 532.0;
  in.n_g_signal = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(pair_rate(in), ContractError);
}

TEST_CASE("default detector bandwidth tracks the sinc first zero") {
  const double kappa = 300.0, length = 1.0;
  const double nu0 = sinc_first_zero_rad_per_s(kappa, length);
  // kappa nu^2 L / 4 = pi at the first zero.
  const double x = 0.25 * kappa * (nu0 * 1e-15) * (nu0 * 1e-15) * length;
  CHECK(x == doctest::Approx(3.14159265).epsilon(1e-9));
  CHECK_THROWS_AS(sinc_first_zero_rad_per_s(0.0, 1.0), NumericsError);
}
