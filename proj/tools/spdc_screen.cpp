// spdc-screen: type-I collinear degenerate SPDC figures of merit for
// birefringent crystals, from per-crystal record files.
//
//   spdc-screen compute --crystal FILE --pump-nm 532 --length-mm 1
//   spdc-screen batch   --dir DIR --pump-nm 532 --out report.csv
//   spdc-screen map     --crystal FILE --pump-nm 532 --grid 361x91 --out map.csv
//   spdc-screen sweep   --crystal FILE --signal-nm 900:1600:25 --out sweep.csv
//   spdc-screen g2      --crystal FILE --pump-nm 532 --detector-bw 2e15 --out g2.csv
//
// Exit codes: 0 success, 1 usage, 2 input validation, 3 numerical failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "spdc/screening.hpp"

namespace {

namespace fs = std::filesystem;
using namespace spdc;

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << content;
}

std::vector<double> parse_range_spec(const std::string& spec) {
  double start = 0, stop = 0, step = 0;
  const int got =
      std::sscanf(spec.c_str(), "%lf:%lf:%lf", &start, &stop, &step);
  if (got != 3 || step <= 0 || stop < start) {
    throw ValidationError("bad range spec '" + spec +
                          "' (expected START:STOP:STEP, STEP > 0)");
  }
  std::vector<double> values;
  for (double v = start; v <= stop + 1e-9 * step; v += step)
    values.push_back(v);
  return values;
}

void parse_grid_spec(const std::string& spec, int& n_theta, int& n_phi) {
  const int got = std::sscanf(spec.c_str(), "%dx%d", &n_theta, &n_phi);
  if (got != 2 || n_theta < 2 || n_phi < 2) {
    throw ValidationError("bad grid spec '" + spec +
                          "' (expected THETAxPHI, both >= 2)");
  }
}

int jobs_from_env(int cli_jobs) {
  if (const char* env = std::getenv("SPDC_SCREEN_JOBS")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return cli_jobs;
}

void print_row(const ScreeningRow& row) {
  std::printf("refcode              %s\n", row.refcode.c_str());
  std::printf("crystal class        %s\n", row.crystal_class.c_str());
  std::printf("status               %s\n", to_string(row.status).c_str());
  if (!row.detail.empty()) std::printf("detail               %s\n", row.detail.c_str());
  std::printf("optic                %s (%s)\n", row.optic_kind.c_str(),
              row.optic_sign.c_str());
  std::printf("lambda p -> s        %.6g -> %.6g nm\n", row.lambda_pump_nm,
              row.lambda_signal_nm);
  std::printf("birefringence        %.6g\n", row.delta_n);
  if (row.status == RowStatus::ok) {
    std::printf("theta_m / phi_m      %.4f / %.4f deg\n", row.theta_m_deg,
                row.phi_m_deg);
    std::printf("d_eff                %.6g pm/V\n", row.d_eff_pm_per_v);
    std::printf("GVM                  %.6g fs/mm\n", row.gvm_fs_per_mm);
    std::printf("GVD kappa            %.6g fs^2/mm\n", row.gvd_fs2_per_mm);
    std::printf("acceptance FWHM      %.6g nm\n", row.acceptance_bw_nm);
    std::printf("tau_c                %.6g fs\n", row.tau_c_fs);
    std::printf("pair rate            %.6g /s/mW/mm (raw %.6g /s)\n",
                row.rate_per_s_mw_mm, row.raw_rate_per_s);
    std::printf("detector sigma       %.6g rad/s\n",
                row.detector_bandwidth_rad_s);
  }
}

struct CommonOptions {
  std::string crystal_path;
  RunConfig config;

  void attach_pump(CLI::App* cmd, bool pump_required = true) {
    auto* opt = cmd->add_option("--pump-nm", config.pump.pump_wavelength_nm,
                                "Pump wavelength in nm");
    if (pump_required) opt->required();
    cmd->add_option("--pump-power-mw", config.pump.pump_power_mw,
                    "Pump power in mW");
    cmd->add_option("--pump-waist-um", config.pump.pump_waist_um,
                    "Pump transverse width in um");
    cmd->add_option("--collection-waist-um", config.pump.collection_waist_um,
                    "Signal/idler collection width in um");
    cmd->add_option("--detector-bw", config.pump.detector_bandwidth_rad_s,
                    "Detector bandwidth sigma in rad/s (default: 5x the sinc "
                    "first zero per crystal)");
    cmd->add_option("--length-mm", config.length_mm,
                    "Crystal length in mm (default: the record's own)");
    cmd->add_flag_callback(
        "--no-kleinman", [this] { config.kleinman = false; },
        "Skip Kleinman symmetrization of chi2");
    cmd->add_option("--index-tol", config.index_tolerance,
                    "Relative index-equality tolerance");
    cmd->add_option("--scan-step-deg", config.pm.scan_step_deg,
                    "Bracketing scan step for the matching solve");
    cmd->add_option("--phi-step-deg", config.phi_step_deg,
                    "Azimuth grid step for biaxial loci");
  }
};

int run(int argc, char** argv) {
  CLI::App app{"Type-I SPDC screening of birefringent crystal records"};
  app.require_subcommand(1);

  // compute
  CommonOptions compute;
  std::string compute_out;
  std::string compute_plots = "locus,g2,curve";
  auto* compute_cmd =
      app.add_subcommand("compute", "Screen one crystal record");
  compute_cmd->add_option("--crystal", compute.crystal_path, "Record file")
      ->required();
  compute.attach_pump(compute_cmd);
  compute_cmd->add_option("--out", compute_out,
                          "Directory for the row and plot-data files");
  compute_cmd->add_option(
      "--plots", compute_plots,
      "Comma list of plot-data kinds: locus,g2,curve,map,all");

  // batch
  CommonOptions batch;
  std::string batch_dir, batch_out, batch_whitelist;
  bool batch_json = false;
  int batch_jobs = 0;
  auto* batch_cmd = app.add_subcommand("batch", "Screen a record directory");
  batch_cmd->add_option("--dir", batch_dir, "Directory of *.spdc records")
      ->required();
  batch.attach_pump(batch_cmd);
  batch_cmd->add_option("--out", batch_out, "Report path")->required();
  batch_cmd->add_flag("--json", batch_json, "Emit JSON instead of CSV");
  batch_cmd->add_option("--jobs", batch_jobs,
                        "Worker threads (SPDC_SCREEN_JOBS overrides)");
  batch_cmd->add_option("--whitelist", batch_whitelist,
                        "Refcode whitelist file for the band-gap filter");
  std::string batch_sort = "rate";
  batch_cmd->add_option("--sort-by", batch_sort,
                        "Row order: rate, d_eff, tau_c, gvm, band_gap, "
                        "delta_n, refcode");

  // map
  CommonOptions map_opts;
  std::string map_out, map_grid = "361x91";
  auto* map_cmd =
      app.add_subcommand("map", "d_eff over the angular octant plus the locus");
  map_cmd->add_option("--crystal", map_opts.crystal_path, "Record file")
      ->required();
  map_opts.attach_pump(map_cmd);
  map_cmd->add_option("--grid", map_grid, "THETAxPHI grid resolution");
  map_cmd->add_option("--out", map_out, "Map CSV path")->required();

  // sweep
  CommonOptions sweep_opts;
  std::string sweep_out, sweep_spec;
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Figures of merit vs signal wavelength");
  sweep_cmd->add_option("--crystal", sweep_opts.crystal_path, "Record file")
      ->required();
  sweep_cmd->add_option("--signal-nm", sweep_spec,
                        "Signal wavelengths START:STOP:STEP in nm")
      ->required();
  sweep_opts.attach_pump(sweep_cmd, /*pump_required=*/false);
  sweep_cmd->add_option("--out", sweep_out, "Sweep CSV path")->required();

  // g2
  CommonOptions g2_opts;
  std::string g2_out;
  auto* g2_cmd =
      app.add_subcommand("g2", "Two-photon correlation profile G2(tau)");
  g2_cmd->add_option("--crystal", g2_opts.crystal_path, "Record file")
      ->required();
  g2_opts.attach_pump(g2_cmd);
  g2_cmd->get_option("--detector-bw")->required();
  g2_cmd->add_option("--out", g2_out, "Profile CSV path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help
    app.exit(e);
    return 1;
  }

  if (compute_cmd->parsed()) {
    const CrystalRecord record = load_crystal(compute.crystal_path);
    const ScreeningRow row = screen_one(record, compute.config);
    print_row(row);
    if (!compute_out.empty()) {
      const fs::path dir = compute_out;
      write_file(dir / (row.refcode + "_row.csv"), rows_csv({row}));
      if (row.status == RowStatus::ok ||
          row.status == RowStatus::not_phase_matchable) {
        const PreparedCrystal prepared = prepare_crystal(record, compute.config);
        const PhaseMatchSolution pm = solve_phase_matching(prepared, compute.config);
        const bool all = compute_plots.find("all") != std::string::npos;
        if (all || compute_plots.find("locus") != std::string::npos) {
          write_file(dir / (row.refcode + "_locus.csv"), locus_csv(pm));
        }
        if (all || compute_plots.find("curve") != std::string::npos) {
          std::vector<double> lambdas;
          const double ls = prepared.lambda_signal_nm;
          for (double v = 0.85 * ls; v <= 1.15 * ls; v += 5.0)
            lambdas.push_back(v);
          write_file(dir / (row.refcode + "_pm_curve.csv"),
                     pm_curve_csv(pm_curve_vs_wavelength(
                         prepared.principal(), lambdas, 0.0, compute.config.pm)));
        }
        if ((all || compute_plots.find("g2") != std::string::npos) &&
            row.status == RowStatus::ok) {
          const double width = 2.0 * row.tau_c_fs;
          std::vector<double> taus;
          for (int i = 0; i <= 512; ++i)
            taus.push_back(-width + 2.0 * width * i / 512.0);
          write_file(dir / (row.refcode + "_g2.csv"),
                     g2_csv(g2_profile(row.gvd_fs2_per_mm, prepared.length_mm,
                                       row.detector_bandwidth_rad_s, taus)));
        }
        if ((all || compute_plots.find("map") != std::string::npos)) {
          write_file(dir / (row.refcode + "_deff_map.csv"),
                     deff_map_csv(deff_map(
                         prepared.chi2_xyz, prepared.indices_pump,
                         prepared.indices_signal, prepared.optic,
                         compute.config.map_theta_points,
                         compute.config.map_phi_points)));
        }
      }
    }
    return 0;
  }

  if (batch_cmd->parsed()) {
    batch.config.jobs = jobs_from_env(batch_jobs);
    std::set<std::string> whitelist;
    if (!batch_whitelist.empty()) whitelist = load_whitelist(batch_whitelist);
    ScreeningReport report =
        screen_directory(batch_dir, batch.config, whitelist);
    sort_rows_by(report.rows, batch_sort);
    write_file(batch_out,
               batch_json ? report_json(report) : report_csv(report));
    std::printf("%zu rows: ok=%d not-phase-matchable=%d filtered=%d error=%d\n",
                report.rows.size(), report.counts.ok,
                report.counts.not_phase_matchable, report.counts.filtered,
                report.counts.error);
    std::printf("wrote %s\n", batch_out.c_str());
    return 0;
  }

  if (map_cmd->parsed()) {
    int n_theta = 361, n_phi = 91;
    parse_grid_spec(map_grid, n_theta, n_phi);
    const CrystalRecord record = load_crystal(map_opts.crystal_path);
    const PreparedCrystal prepared = prepare_crystal(record, map_opts.config);
    const DeffMap map =
        deff_map(prepared.chi2_xyz, prepared.indices_pump,
                 prepared.indices_signal, prepared.optic, n_theta, n_phi);
    write_file(map_out, deff_map_csv(map));
    const PhaseMatchSolution pm = solve_phase_matching(prepared, map_opts.config);
    fs::path locus_path = map_out;
    locus_path.replace_extension();
    locus_path += "_locus.csv";
    write_file(locus_path, locus_csv(pm));
    std::printf("wrote %s and %s (%zu locus points)\n", map_out.c_str(),
                locus_path.c_str(), pm.directions.size());
    return 0;
  }

  if (sweep_cmd->parsed()) {
    const CrystalRecord record = load_crystal(sweep_opts.crystal_path);
    const std::vector<double> lambdas = parse_range_spec(sweep_spec);
    const auto rows = wavelength_sweep(record, lambdas, sweep_opts.config);
    write_file(sweep_out, rows_csv(rows));
    std::printf("wrote %s (%zu wavelengths)\n", sweep_out.c_str(), rows.size());
    return 0;
  }

  if (g2_cmd->parsed()) {
    const CrystalRecord record = load_crystal(g2_opts.crystal_path);
    const ScreeningRow row = screen_one(record, g2_opts.config);
    if (row.status != RowStatus::ok) {
      throw NumericsError("G2 unavailable: " + to_string(row.status) +
                          (row.detail.empty() ? "" : " (" + row.detail + ")"));
    }
    const double width = 2.0 * row.tau_c_fs;
    std::vector<double> taus;
    for (int i = 0; i <= 512; ++i)
      taus.push_back(-width + 2.0 * width * i / 512.0);
    const G2Profile profile =
        g2_profile(row.gvd_fs2_per_mm,
                   g2_opts.config.length_mm > 0 ? g2_opts.config.length_mm
                                                : record.length_mm,
                   row.detector_bandwidth_rad_s, taus);
    write_file(g2_out, g2_csv(profile));
    std::printf("tau_c = %.6g fs; wrote %s\n", row.tau_c_fs, g2_out.c_str());
    return 0;
  }

  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 3;
  }
}
