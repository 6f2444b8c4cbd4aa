#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "spdc/crystal.hpp"
#include "spdc/nonlinearity.hpp"
#include "spdc/pair_properties.hpp"
#include "spdc/phase_matching.hpp"

namespace spdc {

struct RunConfig {
  PumpConfig pump;
  double length_mm = 0.0;  // 0 = each record's own length
  bool kleinman = true;
  double index_tolerance = 1e-4;  // uniaxial/biaxial discrimination
  IndexRule index_rule = IndexRule::eigen_decomposition;
  PmSolverOptions pm;
  double phi_step_deg = 1.0;  // biaxial locus grid
  int map_theta_points = 361;
  int map_phi_points = 91;
  int jobs = 0;  // 0 = hardware concurrency; never serialized into reports

  /// Canonical serialization of everything that affects computed numbers
  /// (parallelism excluded: reports are byte-identical across job counts).
  std::string canonical_string() const;
  /// FNV-1a 64-bit digest of canonical_string(), hex.
  std::string hash_hex() const;
};

/// A record made computation-ready for one pump configuration: dispersion
/// windows resolved, crystallophysical frame assigned, per-axis models
/// permuted into that frame, chi2 rotated (and Kleinman-symmetrized when
/// configured).
struct PreparedCrystal {
  CrystalRecord record;
  double lambda_pump_nm = 0.0;
  double lambda_signal_nm = 0.0;
  OpticClass optic;
  FrameAssignment frame;
  std::array<DispersionModel, 3> models_xyz;
  PrincipalIndices indices_pump;
  PrincipalIndices indices_signal;
  Chi2Tensor chi2_xyz;
  double chi2_reference_nm = 0.0;
  double delta_n = 0.0;  // birefringence at the signal wavelength
  double length_mm = 0.0;

  PrincipalDispersion principal() const {
    return {&models_xyz[0], &models_xyz[1], &models_xyz[2]};
  }
};

PreparedCrystal prepare_crystal(const CrystalRecord& record,
                                const RunConfig& config);

/// Type-I phase matching for the prepared crystal: uniaxial single-angle
/// solve or biaxial locus, by the numeric optic classification.
PhaseMatchSolution solve_phase_matching(const PreparedCrystal& prepared,
                                        const RunConfig& config);

enum class RowStatus { ok, not_phase_matchable, filtered, error };
std::string to_string(RowStatus status);

struct ScreeningRow {
  std::string refcode;
  std::string source;  // input file the record came from
  std::string crystal_class;
  double band_gap_ev;
  std::string optic_kind;
  std::string optic_sign;
  double lambda_pump_nm;
  double lambda_signal_nm;
  double delta_n;
  double theta_m_deg;
  double phi_m_deg;
  double pm_residual;
  double d_eff_pm_per_v;
  double gvm_fs_per_mm;
  double gvd_fs2_per_mm;
  double acceptance_bw_nm;
  double tau_c_fs;
  double rate_per_s_mw_mm;
  double raw_rate_per_s;
  double detector_bandwidth_rad_s;
  RowStatus status = RowStatus::error;
  std::string detail;

  ScreeningRow();  // numeric fields start as NaN
};

/// Full per-crystal computation. Stage failures never propagate: they
/// downgrade the row status (not-phase-matchable is an outcome, not an
/// error).
ScreeningRow screen_one(const CrystalRecord& record, const RunConfig& config);

struct StatusCounts {
  int ok = 0;
  int not_phase_matchable = 0;
  int filtered = 0;
  int error = 0;
};

struct ScreeningReport {
  std::vector<ScreeningRow> rows;  // rate descending, refcode tie-break
  RunConfig config;
  StatusCounts counts;
  /// Spearman rank correlation of band gap against selected columns over
  /// status=ok rows (report annotation, not a gate).
  std::vector<std::pair<std::string, double>> spearman_vs_band_gap;
};

/// Parallel map of screen_one over the candidate filter's accepted records;
/// rejected records yield status=filtered rows. Output is deterministic and
/// independent of the parallelism degree.
ScreeningReport screen_batch(const std::vector<CrystalRecord>& records,
                             const RunConfig& config,
                             const std::set<std::string>& whitelist = {});

/// Loads every *.spdc record under `dir` (sorted by filename) and screens
/// the batch; unloadable files become status=error rows.
ScreeningReport screen_directory(const std::filesystem::path& dir,
                                 const RunConfig& config,
                                 const std::set<std::string>& whitelist = {});

/// One row per signal wavelength for a single record (pump = lambda_s / 2).
std::vector<ScreeningRow> wavelength_sweep(const CrystalRecord& record,
                                           const std::vector<double>& lambda_s_nm,
                                           const RunConfig& config);

double spearman_rank_correlation(const std::vector<double>& a,
                                 const std::vector<double>& b);

/// Conventions baked into every report: contraction, sinc arguments,
/// detuning origin, and the branch carrying the reported GVD.
std::string report_conventions();

/// Re-sorts rows by an alternative key: "rate" (default), "d_eff", "tau_c",
/// "gvm", "band_gap", "delta_n", or "refcode". Numeric keys sort descending
/// by magnitude with refcode tie-breaks; unknown keys throw.
void sort_rows_by(std::vector<ScreeningRow>& rows, const std::string& key);

std::string report_csv(const ScreeningReport& report);
std::string report_json(const ScreeningReport& report);
std::vector<ScreeningRow> parse_report_csv(const std::string& text);
std::string rows_csv(const std::vector<ScreeningRow>& rows);

// Plot-data exports (plain CSV, one header line each).
std::string g2_csv(const G2Profile& profile);
std::string locus_csv(const PhaseMatchSolution& solution);
std::string pm_curve_csv(const std::vector<PmCurvePoint>& curve);
std::string deff_map_csv(const DeffMap& map);
std::string delta_n_vs_gap_csv(const ScreeningReport& report);

}  // namespace spdc
