#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spdc/chi2.hpp"
#include "spdc/dispersion.hpp"
#include "spdc/frames.hpp"

namespace spdc {

/// chi2 tensor valid around one intended pump wavelength. Records may carry
/// several; the pipeline selects the entry nearest the requested pump.
struct Chi2Entry {
  double wavelength_nm = 0.0;
  Chi2Tensor tensor;
};

/// One crystal's optical description as loaded from a record file. Units are
/// fixed at ingestion: nm, eV, pm/V, mm. Immutable after construction and
/// safe to share read-only across workers.
struct CrystalRecord {
  int version = 1;
  /// Where the record came from (file name); informational, never serialized.
  std::string source_name;
  std::string refcode;
  std::string crystal_class;  // Hermann-Mauguin point-group label
  double band_gap_ev = 0.0;
  double length_mm = 1.0;
  bool axes_are_xyz = false;  // per-axis models already in X,Y,Z
  std::string chi2_frame;     // "crystallographic" or "crystallophysical"
  std::array<DispersionModel, 3> axis_models;  // keyed a, b, c
  std::vector<Chi2Entry> chi2;

  // [overrides]
  std::optional<double> index_tolerance;
  std::optional<IndexRule> index_rule;

  /// Copy with unresolved dispersion windows defaulted to
  /// [0.8 lambda_p, 1.2 lambda_s].
  CrystalRecord with_default_ranges(double lambda_pump_nm) const;
};

/// Known non-centrosymmetric point groups (the only classes with nonzero
/// chi2); loading any other label fails validation.
bool is_noncentrosymmetric_class(const std::string& crystal_class);
bool is_cubic_class(const std::string& crystal_class);
/// True for trigonal/tetragonal/hexagonal classes (one optic axis).
bool is_uniaxial_class(const std::string& crystal_class);

CrystalRecord parse_crystal(const std::string& text,
                            const std::string& source_name);
CrystalRecord load_crystal(const std::filesystem::path& path);
std::string serialize_crystal(const CrystalRecord& record);
void save_crystal(const CrystalRecord& record,
                  const std::filesystem::path& path);

/// The chi2 entry whose reference wavelength is nearest the requested pump.
const Chi2Entry& select_chi2(const CrystalRecord& record, double pump_nm);

/// Pump laser and collection configuration. All values strictly positive;
/// the degenerate signal wavelength is 2x the pump by construction.
struct PumpConfig {
  double pump_wavelength_nm = 532.0;
  double pump_power_mw = 1.0;
  double pump_waist_um = 10.0;
  double collection_waist_um = 10.0;
  double detector_bandwidth_rad_s = 0.0;  // 0 = resolve per crystal
  double signal_wavelength_nm() const { return 2.0 * pump_wavelength_nm; }
  void validate() const;
};

/// Photon energy in eV for a vacuum wavelength in nm.
double photon_energy_ev(double lambda_nm);

struct FilterDecision {
  std::size_t index = 0;     // position in the input list
  std::string refcode;
  std::string reason;        // machine-readable code
};

/// Disjoint partition of the input into accepted and rejected lists.
/// Accepts non-cubic records whose band gap lies strictly above the pump
/// photon energy; whitelisted refcodes pass the gap check regardless.
struct FilterResult {
  std::vector<FilterDecision> accepted;
  std::vector<FilterDecision> rejected;
};

FilterResult filter_candidates(const std::vector<CrystalRecord>& records,
                               const PumpConfig& pump,
                               const std::set<std::string>& whitelist = {});

/// One refcode per line; '#' starts a comment.
std::set<std::string> load_whitelist(const std::filesystem::path& path);

}  // namespace spdc
