#include "spdc/screening.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

int resolve_jobs(int requested) {
  if (requested > 0) return requested;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

}  // namespace

std::string RunConfig::canonical_string() const {
  std::ostringstream s;
  s << "pump_nm=" << fmt17(pump.pump_wavelength_nm)
    << ";pump_power_mw=" << fmt17(pump.pump_power_mw)
    << ";pump_waist_um=" << fmt17(pump.pump_waist_um)
    << ";collection_waist_um=" << fmt17(pump.collection_waist_um)
    << ";detector_bw_rad_s=" << fmt17(pump.detector_bandwidth_rad_s)
    << ";length_mm=" << fmt17(length_mm)
    << ";kleinman=" << (kleinman ? "true" : "false")
    << ";index_tolerance=" << fmt17(index_tolerance) << ";index_rule="
    << (index_rule == IndexRule::eigen_decomposition ? "eigen" : "diagonal")
    << ";scan_step_deg=" << fmt17(pm.scan_step_deg)
    << ";pm_tolerance=" << fmt17(pm.index_tolerance)
    << ";phi_step_deg=" << fmt17(phi_step_deg) << ";map=" << map_theta_points
    << "x" << map_phi_points;
  return s.str();
}

std::string RunConfig::hash_hex() const {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_string())));
  return buf;
}

PreparedCrystal prepare_crystal(const CrystalRecord& record,
                                const RunConfig& config) {
  PreparedCrystal prepared;
  prepared.lambda_pump_nm = config.pump.pump_wavelength_nm;
  prepared.lambda_signal_nm = config.pump.signal_wavelength_nm();
  prepared.record = record.with_default_ranges(prepared.lambda_pump_nm);
  prepared.length_mm =
      config.length_mm > 0.0 ? config.length_mm : record.length_mm;

  const double tol = record.index_tolerance.value_or(config.index_tolerance);
  const std::array<double, 3> axis_indices = {
      prepared.record.axis_models[0].index_at(prepared.lambda_signal_nm),
      prepared.record.axis_models[1].index_at(prepared.lambda_signal_nm),
      prepared.record.axis_models[2].index_at(prepared.lambda_signal_nm)};
  const PrincipalIndices probe{axis_indices[0], axis_indices[1],
                               axis_indices[2], prepared.lambda_signal_nm};
  prepared.optic = classify_optic(probe, tol);

  switch (prepared.optic.kind) {
    case OpticKind::uniaxial:
      prepared.frame = assign_uniaxial_frame(axis_indices, tol);
      break;
    case OpticKind::biaxial:
      prepared.frame = assign_biaxial_frame(axis_indices, tol);
      break;
    case OpticKind::isotropic:
      prepared.frame.rule = "isotropic-identity";
      break;
  }
  prepared.models_xyz = permute_axes(prepared.frame, prepared.record.axis_models);
  prepared.indices_pump = prepared.principal().at(prepared.lambda_pump_nm);
  prepared.indices_signal = prepared.principal().at(prepared.lambda_signal_nm);
  prepared.delta_n = birefringence(prepared.indices_signal);

  const Chi2Entry& entry = select_chi2(record, prepared.lambda_pump_nm);
  prepared.chi2_reference_nm = entry.wavelength_nm;
  prepared.chi2_xyz = entry.tensor;
  if (record.chi2_frame == "crystallographic") {
    prepared.chi2_xyz = rotate(prepared.chi2_xyz, prepared.frame.rotation);
  }
  if (config.kleinman) {
    prepared.chi2_xyz = kleinman_symmetrize(prepared.chi2_xyz);
  }
  return prepared;
}

PhaseMatchSolution solve_phase_matching(const PreparedCrystal& prepared,
                                        const RunConfig& config) {
  const PrincipalDispersion dispersion = prepared.principal();
  if (prepared.optic.kind == OpticKind::biaxial) {
    return solve_biaxial_pm_locus(dispersion, prepared.lambda_pump_nm,
                                  config.phi_step_deg, config.pm);
  }
  return solve_uniaxial_pm(dispersion, prepared.lambda_pump_nm, config.pm);
}

std::string to_string(RowStatus status) {
  switch (status) {
    case RowStatus::ok: return "ok";
    case RowStatus::not_phase_matchable: return "not-phase-matchable";
    case RowStatus::filtered: return "filtered";
    case RowStatus::error: return "error";
  }
  return "?";
}

ScreeningRow::ScreeningRow()
    : band_gap_ev(kNaN),
      lambda_pump_nm(kNaN),
      lambda_signal_nm(kNaN),
      delta_n(kNaN),
      theta_m_deg(kNaN),
      phi_m_deg(kNaN),
      pm_residual(kNaN),
      d_eff_pm_per_v(kNaN),
      gvm_fs_per_mm(kNaN),
      gvd_fs2_per_mm(kNaN),
      acceptance_bw_nm(kNaN),
      tau_c_fs(kNaN),
      rate_per_s_mw_mm(kNaN),
      raw_rate_per_s(kNaN),
      detector_bandwidth_rad_s(kNaN) {}

ScreeningRow screen_one(const CrystalRecord& record, const RunConfig& config) {
  ScreeningRow row;
  row.refcode = record.refcode;
  row.source = record.source_name;
  row.crystal_class = record.crystal_class;
  row.band_gap_ev = record.band_gap_ev;
  row.lambda_pump_nm = config.pump.pump_wavelength_nm;
  row.lambda_signal_nm = config.pump.signal_wavelength_nm();
  try {
    const PreparedCrystal prepared = prepare_crystal(record, config);
    row.optic_kind = to_string(prepared.optic.kind);
    row.optic_sign = to_string(prepared.optic.sign);
    row.delta_n = prepared.delta_n;

    if (prepared.optic.kind == OpticKind::isotropic) {
      row.status = RowStatus::not_phase_matchable;
      row.detail = "isotropic at tolerance: no birefringence to phase match";
      return row;
    }

    const PhaseMatchSolution pm = solve_phase_matching(prepared, config);
    if (!pm.phase_matchable()) {
      row.status = RowStatus::not_phase_matchable;
      row.detail = "no type-I direction at lambda_s = " +
                   fmt17(pm.lambda_signal_nm) + " nm";
      return row;
    }

    const PrincipalDispersion dispersion = prepared.principal();
    const DeffResult best = max_deff_on_locus(prepared.chi2_xyz, dispersion, pm,
                                              prepared.optic, config.pm);
    row.theta_m_deg = best.direction.theta_deg;
    row.phi_m_deg = best.direction.phi_deg;
    row.pm_residual = std::abs(
        pm_mismatch(prepared.indices_pump, prepared.indices_signal,
                    best.direction.theta_deg, best.direction.phi_deg));
    row.d_eff_pm_per_v = best.value_pm_per_v;

    const double theta = best.direction.theta_deg;
    const double phi = best.direction.phi_deg;
    const IndexCurve slow_curve = [dispersion, theta, phi](double lam) {
      return direction_indices(dispersion.at(lam), theta, phi).n_slow;
    };
    const IndexCurve fast_curve = [dispersion, theta, phi](double lam) {
      return direction_indices(dispersion.at(lam), theta, phi).n_fast;
    };
    const GroupQuantities signal_group =
        group_quantities_of(slow_curve, prepared.lambda_signal_nm);
    const GroupQuantities pump_group =
        group_quantities_of(fast_curve, prepared.lambda_pump_nm);
    row.gvm_fs_per_mm = gvm_fs_per_mm(signal_group, pump_group);
    row.gvd_fs2_per_mm = signal_group.kappa_fs2_per_mm;

    try {
      row.acceptance_bw_nm = acceptance_bandwidth_fwhm_nm(
          row.gvd_fs2_per_mm, prepared.length_mm, prepared.lambda_signal_nm);
    } catch (const NumericsError& e) {
      row.acceptance_bw_nm = kNaN;  // flagged, not silently infinite
      row.detail = e.what();
    }

    double sigma = config.pump.detector_bandwidth_rad_s;
    if (!(sigma > 0.0)) {
      sigma = 5.0 * sinc_first_zero_rad_per_s(row.gvd_fs2_per_mm,
                                              prepared.length_mm);
    }
    row.detector_bandwidth_rad_s = sigma;

    row.tau_c_fs = converged_correlation_time_fs(row.gvd_fs2_per_mm,
                                                 prepared.length_mm, sigma);

    PairRateInputs rate_in;
    rate_in.d_eff_pm_per_v = row.d_eff_pm_per_v;
    rate_in.lambda_pump_nm = prepared.lambda_pump_nm;
    rate_in.n_pump = pump_group.n;
    rate_in.n_signal = signal_group.n;
    rate_in.n_idler = signal_group.n;
    rate_in.n_g_signal = signal_group.n_g;
    rate_in.n_g_idler = signal_group.n_g;
    rate_in.kappa_fs2_per_mm = row.gvd_fs2_per_mm;
    rate_in.length_mm = prepared.length_mm;
    rate_in.pump_power_mw = config.pump.pump_power_mw;
    rate_in.pump_waist_um = config.pump.pump_waist_um;
    rate_in.collection_waist_um = config.pump.collection_waist_um;
    rate_in.detector_bandwidth_rad_s = sigma;
    const PairRateResult rate = pair_rate(rate_in);
    row.rate_per_s_mw_mm = rate.rate_per_s_mw_mm;
    row.raw_rate_per_s = rate.raw_rate_per_s;

    row.status = RowStatus::ok;
  } catch (const Error& e) {
    row.status = RowStatus::error;
    row.detail = e.what();
  }
  return row;
}

namespace {

void sort_rows(std::vector<ScreeningRow>& rows) {
  auto rate_key = [](const ScreeningRow& r) {
    return std::isnan(r.rate_per_s_mw_mm)
               ? -std::numeric_limits<double>::infinity()
               : r.rate_per_s_mw_mm;
  };
  std::sort(rows.begin(), rows.end(),
            [&](const ScreeningRow& l, const ScreeningRow& r) {
              const double kl = rate_key(l), kr = rate_key(r);
              if (kl != kr) return kl > kr;
              return l.refcode < r.refcode;
            });
}

StatusCounts count_statuses(const std::vector<ScreeningRow>& rows) {
  StatusCounts counts;
  for (const ScreeningRow& row : rows) {
    switch (row.status) {
      case RowStatus::ok: ++counts.ok; break;
      case RowStatus::not_phase_matchable: ++counts.not_phase_matchable; break;
      case RowStatus::filtered: ++counts.filtered; break;
      case RowStatus::error: ++counts.error; break;
    }
  }
  return counts;
}

void annotate_spearman(ScreeningReport& report) {
  std::vector<double> gap, dn, deff, gvd, tau;
  for (const ScreeningRow& row : report.rows) {
    if (row.status != RowStatus::ok) continue;
    gap.push_back(row.band_gap_ev);
    dn.push_back(row.delta_n);
    deff.push_back(std::abs(row.d_eff_pm_per_v));
    gvd.push_back(row.gvd_fs2_per_mm);
    tau.push_back(row.tau_c_fs);
  }
  report.spearman_vs_band_gap = {
      {"delta_n", spearman_rank_correlation(gap, dn)},
      {"d_eff", spearman_rank_correlation(gap, deff)},
      {"gvd", spearman_rank_correlation(gap, gvd)},
      {"tau_c", spearman_rank_correlation(gap, tau)},
  };
}

}  // namespace

ScreeningReport screen_batch(const std::vector<CrystalRecord>& records,
                             const RunConfig& config,
                             const std::set<std::string>& whitelist) {
  const FilterResult filter = filter_candidates(records, config.pump, whitelist);

  std::vector<ScreeningRow> rows(records.size());
  for (const FilterDecision& d : filter.rejected) {
    ScreeningRow& row = rows[d.index];
    const CrystalRecord& r = records[d.index];
    row.refcode = r.refcode;
    row.source = r.source_name;
    row.crystal_class = r.crystal_class;
    row.band_gap_ev = r.band_gap_ev;
    row.lambda_pump_nm = config.pump.pump_wavelength_nm;
    row.lambda_signal_nm = config.pump.signal_wavelength_nm();
    row.status = RowStatus::filtered;
    row.detail = d.reason;
  }

  // Deterministic parallel map: each worker writes only its own indices and
  // the merge below is a fixed-order pass, so the report bytes cannot depend
  // on the job count.
  std::vector<std::size_t> work;
  for (const FilterDecision& d : filter.accepted) work.push_back(d.index);
  const int jobs =
      std::max(1, std::min<int>(resolve_jobs(config.jobs),
                                static_cast<int>(std::max<std::size_t>(work.size(), 1))));
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    while (true) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= work.size()) break;
      rows[work[i]] = screen_one(records[work[i]], config);
    }
  };
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const FilterDecision& d : filter.accepted) {
    if (d.reason != "ok" && rows[d.index].detail.empty()) {
      rows[d.index].detail = d.reason;
    }
  }

  ScreeningReport report;
  report.rows = std::move(rows);
  report.config = config;
  sort_rows(report.rows);
  report.counts = count_statuses(report.rows);
  annotate_spearman(report);
  return report;
}

ScreeningReport screen_directory(const std::filesystem::path& dir,
                                 const RunConfig& config,
                                 const std::set<std::string>& whitelist) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(dir)) {
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".spdc") {
        files.push_back(entry.path());
      }
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) {
    throw ValidationError("no *.spdc records under '" + dir.string() + "'");
  }

  std::vector<CrystalRecord> records;
  std::vector<ScreeningRow> broken;
  for (const auto& file : files) {
    try {
      records.push_back(load_crystal(file));
    } catch (const Error& e) {
      ScreeningRow row;
      row.refcode = file.stem().string();
      row.source = file.filename().string();
      row.status = RowStatus::error;
      row.detail = e.what();
      broken.push_back(std::move(row));
    }
  }
  ScreeningReport report = screen_batch(records, config, whitelist);
  for (ScreeningRow& row : broken) report.rows.push_back(std::move(row));
  sort_rows(report.rows);
  report.counts = count_statuses(report.rows);
  annotate_spearman(report);
  return report;
}

std::vector<ScreeningRow> wavelength_sweep(const CrystalRecord& record,
                                           const std::vector<double>& lambda_s_nm,
                                           const RunConfig& config) {
  std::vector<ScreeningRow> rows;
  rows.reserve(lambda_s_nm.size());
  for (double lambda_s : lambda_s_nm) {
    RunConfig point_config = config;
    point_config.pump.pump_wavelength_nm = 0.5 * lambda_s;
    rows.push_back(screen_one(record, point_config));
  }
  return rows;
}

double spearman_rank_correlation(const std::vector<double>& a,
                                 const std::vector<double>& b) {
  const std::size_t n = a.size();
  if (n != b.size() || n < 2) return kNaN;
  auto ranks = [](const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t l, std::size_t r) { return v[l] < v[r]; });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
      const double mean_rank = 0.5 * (i + j) + 1.0;  // ties share mean rank
      for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mean_rank;
      i = j + 1;
    }
    return rank;
  };
  const std::vector<double> ra = ranks(a), rb = ranks(b);
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double cov = 0, va = 0, vb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    cov += (ra[i] - ma) * (rb[i] - mb);
    va += (ra[i] - ma) * (ra[i] - ma);
    vb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return kNaN;
  return cov / std::sqrt(va * vb);
}

namespace {

const char* kCsvHeader =
    "refcode,source,crystal_class,band_gap_ev,optic_kind,optic_sign,"
    "lambda_pump_nm,lambda_signal_nm,delta_n,theta_m_deg,phi_m_deg,"
    "pm_residual,d_eff_pm_per_v,gvm_fs_per_mm,gvd_fs2_per_mm,"
    "acceptance_bw_nm,tau_c_fs,rate_per_s_mw_mm,raw_rate_per_s,"
    "detector_bandwidth_rad_s,status,detail";

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(current);
      current.clear();
    } else {
      current += c;
    }
  }
  fields.push_back(current);
  return fields;
}

void append_row_csv(std::ostream& out, const ScreeningRow& r) {
  out << csv_escape(r.refcode) << ',' << csv_escape(r.source) << ','
      << csv_escape(r.crystal_class) << ','
      << fmt17(r.band_gap_ev) << ',' << r.optic_kind << ',' << r.optic_sign
      << ',' << fmt17(r.lambda_pump_nm) << ',' << fmt17(r.lambda_signal_nm)
      << ',' << fmt17(r.delta_n) << ',' << fmt17(r.theta_m_deg) << ','
      << fmt17(r.phi_m_deg) << ',' << fmt17(r.pm_residual) << ','
      << fmt17(r.d_eff_pm_per_v) << ',' << fmt17(r.gvm_fs_per_mm) << ','
      << fmt17(r.gvd_fs2_per_mm) << ',' << fmt17(r.acceptance_bw_nm) << ','
      << fmt17(r.tau_c_fs) << ',' << fmt17(r.rate_per_s_mw_mm) << ','
      << fmt17(r.raw_rate_per_s) << ',' << fmt17(r.detector_bandwidth_rad_s)
      << ',' << to_string(r.status) << ',' << csv_escape(r.detail) << '\n';
}

RowStatus status_from_string(const std::string& s) {
  if (s == "ok") return RowStatus::ok;
  if (s == "not-phase-matchable") return RowStatus::not_phase_matchable;
  if (s == "filtered") return RowStatus::filtered;
  if (s == "error") return RowStatus::error;
  throw ParseError("unknown row status '" + s + "'");
}

double parse_csv_number(const std::string& s) {
  if (s == "nan") return kNaN;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw ParseError("bad number in report: '" + s + "'");
  return v;
}

}  // namespace

std::string rows_csv(const std::vector<ScreeningRow>& rows) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const ScreeningRow& row : rows) append_row_csv(out, row);
  return out.str();
}

std::string report_conventions() {
  return "d_eff = (1/2) chi2 contraction (SHG d convention); "
         "detuning nu = omega_1 - omega_p/2; "
         "g2 integrand sinc(kappa nu^2 L/4) exp(-nu^2/sigma^2); "
         "rate/bandwidth mismatch dk = kappa nu^2 with sinc^2(dk L/2); "
         "reported GVD kappa: signal slow branch at degeneracy; "
         "GVM = 1/u_signal - 1/u_pump";
}

std::string report_csv(const ScreeningReport& report) {
  std::ostringstream out;
  out << "# spdc-screen report\n";
  out << "# version = 1\n";
  out << "# config_hash = " << report.config.hash_hex() << '\n';
  out << "# config = " << report.config.canonical_string() << '\n';
  out << "# conventions = " << report_conventions() << '\n';
  out << "# constants = c_m_per_s=" << fmt17(constants::c_m_per_s)
      << ";eps0_f_per_m=" << fmt17(constants::eps0_f_per_m)
      << ";hc_ev_nm=" << fmt17(constants::hc_ev_nm) << '\n';
  out << "# status_counts = ok=" << report.counts.ok
      << ";not_phase_matchable=" << report.counts.not_phase_matchable
      << ";filtered=" << report.counts.filtered
      << ";error=" << report.counts.error << '\n';
  out << "# spearman_vs_band_gap =";
  for (const auto& [name, value] : report.spearman_vs_band_gap) {
    out << ' ' << name << '=' << fmt17(value);
  }
  out << '\n';
  out << rows_csv(report.rows);
  return out.str();
}

std::vector<ScreeningRow> parse_report_csv(const std::string& text) {
  std::istringstream stream(text);
  std::string line;
  bool header_seen = false;
  std::vector<ScreeningRow> rows;
  while (std::getline(stream, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != kCsvHeader) {
        throw ParseError("unexpected report header: '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    const std::vector<std::string> f = csv_split(line);
    if (f.size() != 22) {
      throw ParseError("report row has " + std::to_string(f.size()) +
                       " fields, expected 22");
    }
    ScreeningRow row;
    row.refcode = f[0];
    row.source = f[1];
    row.crystal_class = f[2];
    row.band_gap_ev = parse_csv_number(f[3]);
    row.optic_kind = f[4];
    row.optic_sign = f[5];
    row.lambda_pump_nm = parse_csv_number(f[6]);
    row.lambda_signal_nm = parse_csv_number(f[7]);
    row.delta_n = parse_csv_number(f[8]);
    row.theta_m_deg = parse_csv_number(f[9]);
    row.phi_m_deg = parse_csv_number(f[10]);
    row.pm_residual = parse_csv_number(f[11]);
    row.d_eff_pm_per_v = parse_csv_number(f[12]);
    row.gvm_fs_per_mm = parse_csv_number(f[13]);
    row.gvd_fs2_per_mm = parse_csv_number(f[14]);
    row.acceptance_bw_nm = parse_csv_number(f[15]);
    row.tau_c_fs = parse_csv_number(f[16]);
    row.rate_per_s_mw_mm = parse_csv_number(f[17]);
    row.raw_rate_per_s = parse_csv_number(f[18]);
    row.detector_bandwidth_rad_s = parse_csv_number(f[19]);
    row.status = status_from_string(f[20]);
    row.detail = f[21];
    rows.push_back(std::move(row));
  }
  if (!header_seen) throw ParseError("report has no header row");
  return rows;
}

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

}  // namespace

std::string report_json(const ScreeningReport& report) {
  nlohmann::json j;
  j["format"] = "spdc-screen-report";
  j["version"] = 1;
  j["config_hash"] = report.config.hash_hex();
  j["config"] = {
      {"pump_wavelength_nm", report.config.pump.pump_wavelength_nm},
      {"pump_power_mw", report.config.pump.pump_power_mw},
      {"pump_waist_um", report.config.pump.pump_waist_um},
      {"collection_waist_um", report.config.pump.collection_waist_um},
      {"detector_bandwidth_rad_s", report.config.pump.detector_bandwidth_rad_s},
      {"length_mm", report.config.length_mm},
      {"kleinman", report.config.kleinman},
      {"index_tolerance", report.config.index_tolerance},
      {"index_rule", report.config.index_rule == IndexRule::eigen_decomposition
                         ? "eigen"
                         : "diagonal"},
      {"scan_step_deg", report.config.pm.scan_step_deg},
      {"pm_tolerance", report.config.pm.index_tolerance},
      {"phi_step_deg", report.config.phi_step_deg},
  };
  j["constants"] = {
      {"c_m_per_s", constants::c_m_per_s},
      {"eps0_f_per_m", constants::eps0_f_per_m},
      {"hc_ev_nm", constants::hc_ev_nm},
  };
  j["conventions"] = report_conventions();
  j["status_counts"] = {
      {"ok", report.counts.ok},
      {"not_phase_matchable", report.counts.not_phase_matchable},
      {"filtered", report.counts.filtered},
      {"error", report.counts.error},
  };
  nlohmann::json spearman = nlohmann::json::object();
  for (const auto& [name, value] : report.spearman_vs_band_gap) {
    spearman[name] = number_or_null(value);
  }
  j["spearman_vs_band_gap"] = spearman;
  j["rows"] = nlohmann::json::array();
  for (const ScreeningRow& r : report.rows) {
    j["rows"].push_back({
        {"refcode", r.refcode},
        {"source", r.source},
        {"crystal_class", r.crystal_class},
        {"band_gap_ev", number_or_null(r.band_gap_ev)},
        {"optic_kind", r.optic_kind},
        {"optic_sign", r.optic_sign},
        {"lambda_pump_nm", number_or_null(r.lambda_pump_nm)},
        {"lambda_signal_nm", number_or_null(r.lambda_signal_nm)},
        {"delta_n", number_or_null(r.delta_n)},
        {"theta_m_deg", number_or_null(r.theta_m_deg)},
        {"phi_m_deg", number_or_null(r.phi_m_deg)},
        {"pm_residual", number_or_null(r.pm_residual)},
        {"d_eff_pm_per_v", number_or_null(r.d_eff_pm_per_v)},
        {"gvm_fs_per_mm", number_or_null(r.gvm_fs_per_mm)},
        {"gvd_fs2_per_mm", number_or_null(r.gvd_fs2_per_mm)},
        {"acceptance_bw_nm", number_or_null(r.acceptance_bw_nm)},
        {"tau_c_fs", number_or_null(r.tau_c_fs)},
        {"rate_per_s_mw_mm", number_or_null(r.rate_per_s_mw_mm)},
        {"raw_rate_per_s", number_or_null(r.raw_rate_per_s)},
        {"detector_bandwidth_rad_s", number_or_null(r.detector_bandwidth_rad_s)},
        {"status", to_string(r.status)},
        {"detail", r.detail},
    });
  }
  return j.dump(2) + "\n";
}

void sort_rows_by(std::vector<ScreeningRow>& rows, const std::string& key) {
  auto numeric = [&](auto getter) {
    std::sort(rows.begin(), rows.end(),
              [&](const ScreeningRow& l, const ScreeningRow& r) {
                const double kl = std::isnan(getter(l))
                                      ? -std::numeric_limits<double>::infinity()
                                      : std::abs(getter(l));
                const double kr = std::isnan(getter(r))
                                      ? -std::numeric_limits<double>::infinity()
                                      : std::abs(getter(r));
                if (kl != kr) return kl > kr;
                return l.refcode < r.refcode;
              });
  };
  if (key == "rate") {
    sort_rows(rows);
  } else if (key == "d_eff") {
    numeric([](const ScreeningRow& r) { return r.d_eff_pm_per_v; });
  } else if (key == "tau_c") {
    numeric([](const ScreeningRow& r) { return r.tau_c_fs; });
  } else if (key == "gvm") {
    numeric([](const ScreeningRow& r) { return r.gvm_fs_per_mm; });
  } else if (key == "band_gap") {
    numeric([](const ScreeningRow& r) { return r.band_gap_ev; });
  } else if (key == "delta_n") {
    numeric([](const ScreeningRow& r) { return r.delta_n; });
  } else if (key == "refcode") {
    std::sort(rows.begin(), rows.end(),
              [](const ScreeningRow& l, const ScreeningRow& r) {
                return l.refcode < r.refcode;
              });
  } else {
    throw ValidationError("unknown sort key '" + key + "'");
  }
}

std::string g2_csv(const G2Profile& profile) {
  std::ostringstream out;
  out << "tau_fs,g2_normalized\n";
  for (std::size_t i = 0; i < profile.tau_fs.size(); ++i) {
    out << fmt17(profile.tau_fs[i]) << ',' << fmt17(profile.values[i]) << '\n';
  }
  return out.str();
}

std::string locus_csv(const PhaseMatchSolution& solution) {
  std::ostringstream out;
  out << "lambda_p_nm,lambda_s_nm,theta_m_deg,phi_m_deg,residual,branch_config\n";
  for (std::size_t i = 0; i < solution.directions.size(); ++i) {
    out << fmt17(solution.lambda_pump_nm) << ','
        << fmt17(solution.lambda_signal_nm) << ','
        << fmt17(solution.directions[i].theta_deg) << ','
        << fmt17(solution.directions[i].phi_deg) << ','
        << fmt17(solution.residuals[i]) << ',' << solution.branch_config
        << '\n';
  }
  return out.str();
}

std::string pm_curve_csv(const std::vector<PmCurvePoint>& curve) {
  std::ostringstream out;
  out << "lambda_p_nm,lambda_s_nm,theta_m_deg,phi_m_deg,residual,branch_config\n";
  for (const PmCurvePoint& p : curve) {
    out << fmt17(0.5 * p.lambda_s_nm) << ',' << fmt17(p.lambda_s_nm) << ',';
    if (p.direction) {
      out << fmt17(p.direction->theta_deg) << ',' << fmt17(p.direction->phi_deg)
          << ',' << fmt17(p.residual) << ",pump-fast/signal-slow\n";
    } else {
      out << "nan,nan,nan,no-solution\n";
    }
  }
  return out.str();
}

std::string deff_map_csv(const DeffMap& map) {
  std::ostringstream out;
  out << "theta_deg,phi_deg,d_eff_pm_per_v\n";
  for (std::size_t i = 0; i < map.theta_deg.size(); ++i) {
    for (std::size_t j = 0; j < map.phi_deg.size(); ++j) {
      out << fmt17(map.theta_deg[i]) << ',' << fmt17(map.phi_deg[j]) << ','
          << fmt17(map.values(i, j)) << '\n';
    }
  }
  return out.str();
}

std::string delta_n_vs_gap_csv(const ScreeningReport& report) {
  std::ostringstream out;
  out << "refcode,band_gap_ev,delta_n\n";
  for (const ScreeningRow& r : report.rows) {
    if (r.status != RowStatus::ok &&
        r.status != RowStatus::not_phase_matchable)
      continue;
    if (std::isnan(r.delta_n)) continue;
    out << csv_escape(r.refcode) << ',' << fmt17(r.band_gap_ev) << ','
        << fmt17(r.delta_n) << '\n';
  }
  return out.str();
}

}  // namespace spdc
