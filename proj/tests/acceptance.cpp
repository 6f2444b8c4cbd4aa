// Acceptance suite. Runs every release criterion at its stated tolerance and
// prints one [PASS]/[FAIL]/[SKIP] line per criterion; exits nonzero when any
// criterion fails. Criteria that compare against the published reference
// dataset are skipped with a notice unless the record files are present under
// data/released (or the directory named by SPDC_RELEASED_DATA).
#include <Eigen/Geometry>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "spdc/constants.hpp"
#include "spdc/screening.hpp"

namespace {

namespace fs = std::filesystem;
using namespace spdc;

const fs::path kDataDir = SPDC_DATA_DIR;

struct Harness {
  int failures = 0;
  void pass(const std::string& name, const std::string& detail) {
    std::printf("[PASS] %s: %s\n", name.c_str(), detail.c_str());
  }
  void fail(const std::string& name, const std::string& detail) {
    std::printf("[FAIL] %s: %s\n", name.c_str(), detail.c_str());
    ++failures;
  }
  void skip(const std::string& name, const std::string& detail) {
    std::printf("[SKIP] %s: %s\n", name.c_str(), detail.c_str());
  }
  void check(const std::string& name, bool ok, const std::string& detail) {
    ok ? pass(name, detail) : fail(name, detail);
  }
  void run(const std::string& name, const std::function<void(const std::string&)>& body) {
    try {
      body(name);
    } catch (const std::exception& e) {
      fail(name, std::string("exception: ") + e.what());
    }
  }
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

RunConfig base_config() {
  RunConfig config;
  config.pump.pump_wavelength_nm = 532.0;
  return config;
}

fs::path released_dir() {
  if (const char* env = std::getenv("SPDC_RELEASED_DATA")) return env;
  return kDataDir / "released";
}

bool released_record_exists(const std::string& refcode) {
  return fs::exists(released_dir() / (refcode + ".spdc"));
}

const char* kReleasedNotice =
    "reference dataset not present (place the released record files under "
    "data/released or set SPDC_RELEASED_DATA)";

// --- always-runnable criteria -------------------------------------------

void gaussian_limit_g2(Harness& h, const std::string& name) {
  double worst = 0.0;
  for (double sigma = 1e12; sigma <= 1.001e15; sigma *= std::sqrt(10.0)) {
    const double fwhm = converged_correlation_time_fs(0.0, 1.0, sigma);
    const double expected =
        2.0 * std::sqrt(2.0 * std::log(2.0)) / (sigma * 1e-15);
    worst = std::max(worst, std::abs(fwhm / expected - 1.0));
  }
  h.check(name, worst < 5e-3,
          "max relative error " + fmt(worst) +
              " over sigma 1e12..1e15 rad/s (tolerance 5e-3)");
}

void sinc_half_max(Harness& h, const std::string& name) {
  const double x = sinc_sq_half_max_argument();
  const double err = std::abs(x - 1.391557);
  h.check(name, err < 1e-4,
          "root solve gives " + fmt(x) + ", |delta| = " + fmt(err) +
              " (tolerance 1e-4)");
}

void chi2_scaling(Harness& h, const std::string& name) {
  const CrystalRecord record = load_crystal(kDataDir / "crystals" / "BBO.spdc");
  CrystalRecord scaled = record;
  for (Chi2Entry& entry : scaled.chi2) {
    entry.tensor = entry.tensor.scaled(2.0);
  }
  const ScreeningRow base = screen_one(record, base_config());
  const ScreeningRow doubled = screen_one(scaled, base_config());
  if (base.status != RowStatus::ok || doubled.status != RowStatus::ok) {
    h.fail(name, "screening did not complete");
    return;
  }
  const double rel =
      std::abs(doubled.rate_per_s_mw_mm / base.rate_per_s_mw_mm - 4.0) / 4.0;
  h.check(name, rel < 1e-12,
          "chi2 x2 changes the rate by " +
              fmt(doubled.rate_per_s_mw_mm / base.rate_per_s_mw_mm) +
              ", relative error vs 4 = " + fmt(rel) + " (tolerance 1e-12)");
}

void kleinman_422_null(Harness& h, const std::string& name) {
  const CrystalRecord record =
      load_crystal(kDataDir / "crystals" / "SYN422K.spdc");
  const RunConfig config = base_config();  // Kleinman on by default
  const PreparedCrystal prepared = prepare_crystal(record, config);
  const DeffMap map =
      deff_map(prepared.chi2_xyz, prepared.indices_pump,
               prepared.indices_signal, prepared.optic, 361, 91);
  const double worst = map.values.cwiseAbs().maxCoeff();
  h.check(name, worst < 1e-12,
          "max |d_eff| over the 361x91 grid = " + fmt(worst) +
              " pm/V (tolerance 1e-12)");
}

void rotation_covariance(Harness& h, const std::string& name) {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  Chi2Tensor chi;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = j; k < 3; ++k) {
        const double v = dist(rng);
        chi(i, j, k) = v;
        chi(i, k, j) = v;
      }
    }
  }
  const double angle = 1.234;
  const Eigen::Vector3d axis = Eigen::Vector3d(1.0, -2.0, 0.5).normalized();
  const Eigen::Matrix3d rot =
      Eigen::AngleAxisd(angle, axis).toRotationMatrix();
  const Chi2Tensor chi_rot = rotate(chi, rot);

  const PrincipalIndices np{1.61, 1.71, 1.81, 532.0};
  const PrincipalIndices ns{1.55, 1.65, 1.75, 1064.0};
  const OpticClass bi{OpticKind::biaxial, OpticSign::positive};
  const DeffMap map = deff_map(chi, np, ns, bi, 91, 46);
  double worst_map = 0.0;
  for (std::size_t i = 0; i < map.theta_deg.size(); ++i) {
    for (std::size_t j = 0; j < map.phi_deg.size(); ++j) {
      const PolarizationBasis bp =
          polarization_basis(np, map.theta_deg[i], map.phi_deg[j], bi);
      const PolarizationBasis bs =
          polarization_basis(ns, map.theta_deg[i], map.phi_deg[j], bi);
      const double rotated =
          d_eff(chi_rot, rot * bp.e_fast, rot * bs.e_slow, rot * bs.e_slow);
      worst_map = std::max(worst_map, std::abs(rotated - map.values(i, j)));
    }
  }

  const Eigen::Matrix3d rot2 =
      Eigen::AngleAxisd(-0.721, Eigen::Vector3d(0.2, 0.9, -1.4).normalized())
          .toRotationMatrix();
  const Chi2Tensor two_step = rotate(rotate(chi, rot), rot2);
  const Chi2Tensor one_step = rotate(chi, rot2 * rot);
  double worst_comp = 0.0;
  for (int i = 0; i < 27; ++i) {
    worst_comp = std::max(worst_comp,
                          std::abs(two_step.components()[i] -
                                   one_step.components()[i]));
  }
  h.check(name, worst_map < 1e-10 && worst_comp < 1e-12,
          "map covariance defect " + fmt(worst_map) +
              " (tol 1e-10); composition defect " + fmt(worst_comp) +
              " (tol 1e-12)");
}

void solver_vs_dense_scan(Harness& h, const std::string& name) {
  std::mt19937 rng(4242);
  std::uniform_real_distribution<double> a_dist(1.8, 3.2);
  std::uniform_real_distribution<double> b_dist(0.5, 1.3);
  std::uniform_real_distribution<double> c_dist(0.015, 0.06);
  std::uniform_real_distribution<double> d_dist(0.003, 0.015);
  int matched = 0, missed = 0, bad_residual = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const WavelengthRange range{400.0, 1300.0};
    std::array<DispersionModel, 3> models;
    const SellmeierCoefficients o{a_dist(rng), {b_dist(rng)}, {c_dist(rng)},
                                  d_dist(rng)};
    const SellmeierCoefficients e{a_dist(rng), {b_dist(rng)}, {c_dist(rng)},
                                  d_dist(rng)};
    models[0] = DispersionModel::sellmeier(o, range);
    models[1] = DispersionModel::sellmeier(o, range);
    models[2] = DispersionModel::sellmeier(e, range);
    const PrincipalDispersion dispersion{&models[0], &models[1], &models[2]};
    const PhaseMatchSolution pm = solve_uniaxial_pm(dispersion, 532.0);
    for (double r : pm.residuals) {
      if (!(r < 1e-10)) ++bad_residual;
    }
    const PrincipalIndices at_pump = dispersion.at(532.0);
    const PrincipalIndices at_signal = dispersion.at(1064.0);
    double prev = pm_mismatch(at_pump, at_signal, 0.0, 0.0);
    for (double theta = 0.01; theta <= 90.0; theta += 0.01) {
      const double value = pm_mismatch(at_pump, at_signal, theta, 0.0);
      if (prev * value < 0.0) {
        bool found = false;
        for (const Direction& d : pm.directions) {
          if (std::abs(d.theta_deg - theta) < 0.02) found = true;
        }
        found ? ++matched : ++missed;
      }
      prev = value;
    }
  }
  h.check(name, missed == 0 && bad_residual == 0,
          fmt(matched) + " oracle crossings matched, " + fmt(missed) +
              " missed, " + fmt(bad_residual) +
              " residuals above 1e-10, over 50 randomized crystals");
}

void bbo_benchmark(Harness& h, const std::string& name) {
  const CrystalRecord record = load_crystal(kDataDir / "crystals" / "BBO.spdc");
  const PreparedCrystal prepared = prepare_crystal(record, base_config());
  const PhaseMatchSolution pm = solve_phase_matching(prepared, base_config());
  if (!pm.phase_matchable()) {
    h.fail(name, "no matching angle found");
    return;
  }
  // Independent oracle: dense 0.01 deg scan of the mismatch.
  const PrincipalDispersion dispersion = prepared.principal();
  const PrincipalIndices at_pump = dispersion.at(532.0);
  const PrincipalIndices at_signal = dispersion.at(1064.0);
  double oracle = -1.0;
  double prev = pm_mismatch(at_pump, at_signal, 0.0, 0.0);
  for (double theta = 0.01; theta <= 90.0; theta += 0.01) {
    const double value = pm_mismatch(at_pump, at_signal, theta, 0.0);
    if (prev * value <= 0.0) {
      oracle = theta;
      break;
    }
    prev = value;
  }
  const double solver = pm.directions[0].theta_deg;
  const bool ok = std::abs(solver - 22.8) <= 0.3 && oracle > 0.0 &&
                  std::abs(solver - oracle) < 0.02;
  h.check(name, ok,
          "solver theta_m = " + fmt(solver) + " deg, dense-scan oracle = " +
              fmt(oracle) + " deg, target 22.8 +/- 0.3");
}

void derivative_cross_check(Harness& h, const std::string& name) {
  double worst = 0.0;
  int models_checked = 0;
  for (const auto& entry : fs::directory_iterator(kDataDir / "crystals")) {
    if (entry.path().extension() != ".spdc") continue;
    const CrystalRecord record = load_crystal(entry.path());
    for (const DispersionModel& model : record.axis_models) {
      if (model.form() != DispersionModel::Form::sellmeier) continue;
      ++models_checked;
      const WavelengthRange& r = model.range();
      for (int i = 1; i <= 5; ++i) {
        const double lambda = r.min_nm + (r.max_nm - r.min_nm) * i / 6.0;
        // h large enough that finite-difference roundoff sits far below the
        // 1e-6 gate even where d2n/dlambda2 crosses zero (truncation stays
        // negligible for these smooth closed forms).
        const double hh = lambda * 2e-3;
        const auto f = [&](double x) { return model.index_at(x); };
        const double fd1 = (-f(lambda + 2 * hh) + 8 * f(lambda + hh) -
                            8 * f(lambda - hh) + f(lambda - 2 * hh)) /
                           (12 * hh);
        const double fd2 = (-f(lambda + 2 * hh) + 16 * f(lambda + hh) -
                            30 * f(lambda) + 16 * f(lambda - hh) -
                            f(lambda - 2 * hh)) /
                           (12 * hh * hh);
        worst = std::max(worst, std::abs(model.dn_dlambda(lambda) - fd1) /
                                    std::max(std::abs(fd1), 1e-10));
        worst = std::max(worst, std::abs(model.d2n_dlambda2(lambda) - fd2) /
                                    std::max(std::abs(fd2), 1e-10));
      }
    }
  }
  h.check(name, worst < 1e-6 && models_checked > 0,
          "worst relative disagreement " + fmt(worst) + " over " +
              fmt(models_checked) + " shipped Sellmeier models (tol 1e-6)");
}

void batch_determinism(Harness& h, const std::string& name) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(kDataDir / "crystals")) {
    if (entry.path().extension() == ".spdc") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<CrystalRecord> records;
  for (const auto& f : files) records.push_back(load_crystal(f));
  const std::set<std::string> whitelist =
      load_whitelist(kDataDir / "whitelist.txt");
  std::string reference;
  bool identical = true;
  for (int jobs : {1, 4, 16}) {
    RunConfig config = base_config();
    config.jobs = jobs;
    const std::string csv = report_csv(screen_batch(records, config, whitelist));
    if (reference.empty()) reference = csv;
    if (csv != reference) identical = false;
  }
  h.check(name, identical,
          std::string("report bytes ") +
              (identical ? "identical" : "differ") +
              " across parallelism degrees 1, 4, 16 (" +
              fmt(records.size()) + " records)");
}

// --- reference-dataset criteria (skipped without the released files) ------

void reference_sweep(Harness& h, const std::string& name) {
  if (!released_record_exists("MOFTIL")) {
    h.skip(name, kReleasedNotice);
    return;
  }
  const CrystalRecord record =
      load_crystal(released_dir() / "MOFTIL.spdc");
  const std::vector<double> lambdas = {909.0, 1064.0, 1100.0, 1546.0};
  const std::vector<double> expect_deff = {6.24, 4.88, 4.70, 3.61};
  const std::vector<double> expect_gvm = {2615.67, 1410.07, 1269.64, 480.95};
  const std::vector<double> expect_tau = {26.63, 23.66, 23.11, 18.61};
  const auto start = std::chrono::steady_clock::now();
  const auto rows = wavelength_sweep(record, lambdas, base_config());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  bool ok = seconds < 10.0;
  std::string detail = "runtime " + fmt(seconds) + " s;";
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (rows[i].status != RowStatus::ok) {
      ok = false;
      detail += " row " + fmt(lambdas[i]) + " not ok;";
      continue;
    }
    const double deff = std::abs(rows[i].d_eff_pm_per_v);
    const double gvm = std::abs(rows[i].gvm_fs_per_mm);
    ok = ok && std::abs(deff / expect_deff[i] - 1.0) < 0.10;
    ok = ok && std::abs(gvm / expect_gvm[i] - 1.0) < 0.10;
    ok = ok && std::abs(rows[i].tau_c_fs / expect_tau[i] - 1.0) < 0.15;
  }
  for (std::size_t i = 1; i < rows.size() && ok; ++i) {
    ok = ok && std::abs(rows[i].d_eff_pm_per_v) < std::abs(rows[i - 1].d_eff_pm_per_v);
    ok = ok && rows[i].rate_per_s_mw_mm < rows[i - 1].rate_per_s_mw_mm;
    ok = ok && rows[i].tau_c_fs < rows[i - 1].tau_c_fs;
    ok = ok && std::abs(rows[i].gvm_fs_per_mm) < std::abs(rows[i - 1].gvm_fs_per_mm);
  }
  h.check(name, ok, detail + " tolerances 10%/10%/15% + exact ordering");
}

void reference_birefringence(Harness& h, const std::string& name) {
  if (!released_record_exists("MOFTIL")) {
    h.skip(name, kReleasedNotice);
    return;
  }
  const CrystalRecord record = load_crystal(released_dir() / "MOFTIL.spdc");
  const PreparedCrystal prepared = prepare_crystal(record, base_config());
  const double rel = std::abs(prepared.delta_n / 0.42 - 1.0);
  h.check(name, rel < 0.05,
          "delta_n(1064) = " + fmt(prepared.delta_n) +
              ", expected 0.42 within 5%");
}

void reference_pm_windows(Harness& h, const std::string& name) {
  if (!released_record_exists("QAMFUF01") || !released_record_exists("BEKVOD")) {
    h.skip(name, kReleasedNotice);
    return;
  }
  bool ok = true;
  std::string detail;
  const std::pair<const char*, double> cases[] = {{"QAMFUF01", 1600.0},
                                                  {"BEKVOD", 2200.0}};
  for (const auto& [refcode, lambda_open] : cases) {
    const CrystalRecord record =
        load_crystal(released_dir() / (std::string(refcode) + ".spdc"));
    RunConfig at_1064 = base_config();
    const ScreeningRow short_row = screen_one(record, at_1064);
    RunConfig at_open = base_config();
    at_open.pump.pump_wavelength_nm = 0.5 * lambda_open;
    const ScreeningRow open_row = screen_one(record, at_open);
    const bool this_ok =
        short_row.status == RowStatus::not_phase_matchable &&
        open_row.status == RowStatus::ok;
    ok = ok && this_ok;
    detail += std::string(refcode) + ": 1064 " +
              to_string(short_row.status) + ", " + fmt(lambda_open) + " " +
              to_string(open_row.status) + "; ";
  }
  h.check(name, ok, detail + "(expect no match at 1064, match at the window)");
}

void reference_batch(Harness& h, const std::string& name) {
  if (!fs::is_directory(released_dir())) {
    h.skip(name, kReleasedNotice);
    return;
  }
  const auto start = std::chrono::steady_clock::now();
  const ScreeningReport report =
      screen_directory(released_dir(), base_config());
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  h.check(name, seconds < 300.0 && report.counts.error == 0,
          fmt(report.rows.size()) + " records in " + fmt(seconds) +
              " s, error rows = " + fmt(report.counts.error) +
              " (limits: < 300 s, zero errors)");
}

}  // namespace

int main() {
  Harness h;
  h.run("gaussian-limit-g2-fwhm", [&](const std::string& n) { gaussian_limit_g2(h, n); });
  h.run("sinc2-half-max-argument", [&](const std::string& n) { sinc_half_max(h, n); });
  h.run("chi2-scaling-rate-quadratic", [&](const std::string& n) { chi2_scaling(h, n); });
  h.run("kleinman-422-null-map", [&](const std::string& n) { kleinman_422_null(h, n); });
  h.run("deff-rotation-covariance", [&](const std::string& n) { rotation_covariance(h, n); });
  h.run("uniaxial-solver-vs-dense-scan", [&](const std::string& n) { solver_vs_dense_scan(h, n); });
  h.run("bbo-angle-benchmark", [&](const std::string& n) { bbo_benchmark(h, n); });
  h.run("dispersion-derivative-cross-check", [&](const std::string& n) { derivative_cross_check(h, n); });
  h.run("batch-determinism", [&](const std::string& n) { batch_determinism(h, n); });
  h.run("reference-wavelength-sweep", [&](const std::string& n) { reference_sweep(h, n); });
  h.run("reference-birefringence", [&](const std::string& n) { reference_birefringence(h, n); });
  h.run("reference-pm-windows", [&](const std::string& n) { reference_pm_windows(h, n); });
  h.run("reference-batch", [&](const std::string& n) { reference_batch(h, n); });
  if (h.failures > 0) {
    std::printf("%d criterion(s) failed\n", h.failures);
    return 1;
  }
  std::printf("all runnable criteria passed\n");
  return 0;
}
