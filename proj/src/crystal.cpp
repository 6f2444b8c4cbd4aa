// Crystal record files are UTF-8 key/value documents:
//
//   version = 1
//   [meta]
//   refcode = BBO
//   crystal_class = 3m
//   band_gap_ev = 6.2
//   length_mm = 1.0
//   axes = abc | xyz                  (default abc)
//   chi2_frame = crystallographic | crystallophysical
//
//   [dispersion.a]                    ([dispersion.b], [dispersion.c] too)
//   model = sellmeier | table
//   A = 1.71...                       n^2 = A + sum B_i l^2/(l^2-C_i) - D l^2
//   B = 1.02...                       (l in micrometres; B/C repeatable,
//   C = 0.0179                         appended pairwise; C in um^2)
//   D = 0.0155
//   range_nm = 200 3500               (optional validity window)
//   point = 400 1.6042                (table form: repeated, increasing)
//
//   [chi2]                            (repeatable, one per reference pump)
//   wavelength_nm = 532
//   form = tensor | dmatrix           (default tensor)
//   row_x = c_xxx c_xxy ... c_xzz     (9 values, jk row-major, pm/V)
//   row_y = ... / row_z = ...         (dmatrix form: drow_x = 6 Voigt values)
//   kleinman_assumed = false
//
//   [overrides]                       (optional)
//   index_tolerance = 1e-4
//   index_rule = eigen | diagonal
//
// '#' starts a full-line comment. Numbers round-trip bit-exactly through
// serialize_crystal (17 significant digits).

#include "spdc/crystal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

const std::set<std::string>& noncentrosymmetric_classes() {
  static const std::set<std::string> classes = {
      "1",  "2",   "m",   "222", "mm2", "4",   "-4",
      "422", "4mm", "-42m", "3",   "32",  "3m",  "6",
      "-6",  "622", "6mm", "-6m2", "23",  "432", "-43m"};
  return classes;
}

const std::set<std::string>& cubic_classes() {
  static const std::set<std::string> classes = {"23", "432", "-43m"};
  return classes;
}

const std::set<std::string>& uniaxial_classes() {
  static const std::set<std::string> classes = {
      "4", "-4", "422", "4mm", "-42m", "3", "32", "3m",
      "6", "-6", "622", "6mm", "-6m2"};
  return classes;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct KeyValue {
  std::string key;
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  std::vector<KeyValue> entries;
  int line = 0;

  const std::string* find(const std::string& key) const {
    for (const auto& kv : entries) {
      if (kv.key == key) return &kv.value;
    }
    return nullptr;
  }
  std::vector<std::string> find_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& kv : entries) {
      if (kv.key == key) out.push_back(kv.value);
    }
    return out;
  }
};

struct Document {
  std::string source;
  std::vector<KeyValue> preamble;  // keys before the first section
  std::vector<Section> sections;
};

Document tokenize(const std::string& text, const std::string& source_name) {
  Document doc;
  doc.source = source_name;
  std::istringstream stream(text);
  std::string raw;
  int line_no = 0;
  Section* current = nullptr;
  while (std::getline(stream, raw)) {
    ++line_no;
    const std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ParseError(source_name + ":" + std::to_string(line_no) +
                         ": unterminated section header");
      }
      doc.sections.push_back({trim(line.substr(1, line.size() - 2)), {}, line_no});
      current = &doc.sections.back();
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(source_name + ":" + std::to_string(line_no) +
                       ": expected 'key = value'");
    }
    KeyValue kv{trim(line.substr(0, eq)), trim(line.substr(eq + 1)), line_no};
    if (kv.key.empty()) {
      throw ParseError(source_name + ":" + std::to_string(line_no) + ": empty key");
    }
    if (current)
      current->entries.push_back(std::move(kv));
    else
      doc.preamble.push_back(std::move(kv));
  }
  return doc;
}

double parse_number(const std::string& value, const std::string& context) {
  const char* begin = value.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || trim(end).size() != 0) {
    throw ParseError(context + ": cannot parse number from '" + value + "'");
  }
  return v;
}

std::vector<double> parse_numbers(const std::string& value,
                                  const std::string& context) {
  std::vector<double> out;
  std::istringstream stream(value);
  std::string token;
  while (stream >> token) out.push_back(parse_number(token, context));
  if (out.empty()) throw ParseError(context + ": expected numbers");
  return out;
}

bool parse_bool(const std::string& value, const std::string& context) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ParseError(context + ": expected true or false, got '" + value + "'");
}

DispersionModel parse_dispersion_section(const Section& section,
                                         const std::string& context) {
  const std::string* model = section.find("model");
  if (!model) throw ValidationError(context + ": missing 'model'");

  std::optional<WavelengthRange> range;
  if (const std::string* r = section.find("range_nm")) {
    const auto vals = parse_numbers(*r, context + ".range_nm");
    if (vals.size() != 2) {
      throw ValidationError(context + ".range_nm: expected two values");
    }
    range = WavelengthRange{vals[0], vals[1]};
  }

  DispersionModel out = [&] {
    if (*model == "sellmeier") {
      SellmeierCoefficients coeffs;
      if (const std::string* a = section.find("A"))
        coeffs.a = parse_number(*a, context + ".A");
      else
        throw ValidationError(context + ": Sellmeier form requires 'A'");
      for (const std::string& b : section.find_all("B")) {
        for (double v : parse_numbers(b, context + ".B")) coeffs.b.push_back(v);
      }
      for (const std::string& c : section.find_all("C")) {
        for (double v : parse_numbers(c, context + ".C")) coeffs.c.push_back(v);
      }
      if (const std::string* d = section.find("D"))
        coeffs.d = parse_number(*d, context + ".D");
      if (coeffs.b.size() != coeffs.c.size()) {
        throw ValidationError(context + ": B and C lists differ in length");
      }
      return DispersionModel::sellmeier(std::move(coeffs), range);
    }
    if (*model == "table") {
      TableData data;
      for (const std::string& p : section.find_all("point")) {
        const auto vals = parse_numbers(p, context + ".point");
        if (vals.size() != 2) {
          throw ValidationError(context + ".point: expected 'wavelength_nm index'");
        }
        data.wavelength_nm.push_back(vals[0]);
        data.index.push_back(vals[1]);
      }
      return DispersionModel::table(std::move(data), range);
    }
    throw ValidationError(context + ": unknown model '" + *model + "'");
  }();

  if (const std::string* p = section.find("provenance")) out.provenance = *p;
  if (const std::string* r = section.find("fit_residual"))
    out.fit_residual = parse_number(*r, context + ".fit_residual");
  return out;
}

Chi2Entry parse_chi2_section(const Section& section, const std::string& context) {
  Chi2Entry entry;
  const std::string* wl = section.find("wavelength_nm");
  if (!wl) throw ValidationError(context + ": missing 'wavelength_nm'");
  entry.wavelength_nm = parse_number(*wl, context + ".wavelength_nm");
  if (!(entry.wavelength_nm > 0.0)) {
    throw ValidationError(context + ".wavelength_nm: must be positive");
  }
  bool kleinman = false;
  if (const std::string* k = section.find("kleinman_assumed"))
    kleinman = parse_bool(*k, context + ".kleinman_assumed");

  std::string form = "tensor";
  if (const std::string* f = section.find("form")) form = *f;

  if (form == "tensor") {
    std::array<double, 27> c;
    const char* rows[3] = {"row_x", "row_y", "row_z"};
    for (int i = 0; i < 3; ++i) {
      const std::string* row = section.find(rows[i]);
      if (!row) throw ValidationError(context + ": missing '" + rows[i] + "'");
      const auto vals = parse_numbers(*row, context + "." + rows[i]);
      if (vals.size() != 9) {
        throw ValidationError(context + "." + rows[i] + ": expected 9 values, got " +
                              std::to_string(vals.size()));
      }
      std::copy(vals.begin(), vals.end(), c.begin() + 9 * i);
    }
    entry.tensor = Chi2Tensor::from_components(c, kleinman);
    try {
      entry.tensor.validate_intrinsic_symmetry();
    } catch (const ValidationError& e) {
      throw ValidationError(context + ": " + e.what());
    }
  } else if (form == "dmatrix") {
    Eigen::Matrix<double, 3, 6> d;
    const char* rows[3] = {"drow_x", "drow_y", "drow_z"};
    for (int i = 0; i < 3; ++i) {
      const std::string* row = section.find(rows[i]);
      if (!row) throw ValidationError(context + ": missing '" + rows[i] + "'");
      const auto vals = parse_numbers(*row, context + "." + rows[i]);
      if (vals.size() != 6) {
        throw ValidationError(context + "." + rows[i] + ": expected 6 values, got " +
                              std::to_string(vals.size()));
      }
      for (int l = 0; l < 6; ++l) d(i, l) = vals[l];
    }
    entry.tensor = Chi2Tensor::from_d_matrix(d, kleinman);
  } else {
    throw ValidationError(context + ": unknown form '" + form + "'");
  }
  return entry;
}

}  // namespace

bool is_noncentrosymmetric_class(const std::string& crystal_class) {
  return noncentrosymmetric_classes().count(crystal_class) > 0;
}

bool is_cubic_class(const std::string& crystal_class) {
  return cubic_classes().count(crystal_class) > 0;
}

bool is_uniaxial_class(const std::string& crystal_class) {
  return uniaxial_classes().count(crystal_class) > 0;
}

CrystalRecord parse_crystal(const std::string& text,
                            const std::string& source_name) {
  const Document doc = tokenize(text, source_name);
  CrystalRecord record;
  record.source_name = source_name;

  bool have_version = false;
  for (const KeyValue& kv : doc.preamble) {
    if (kv.key == "version") {
      record.version = static_cast<int>(parse_number(kv.value, source_name + ": version"));
      have_version = true;
    }
  }
  if (!have_version) {
    throw ValidationError(source_name + ": missing mandatory 'version' field");
  }
  if (record.version != 1) {
    throw ValidationError(source_name + ": unsupported record version " +
                          std::to_string(record.version));
  }

  const Section* meta = nullptr;
  std::map<std::string, const Section*> dispersion;
  std::vector<const Section*> chi2_sections;
  const Section* overrides = nullptr;
  for (const Section& s : doc.sections) {
    if (s.name == "meta") meta = &s;
    else if (s.name.rfind("dispersion.", 0) == 0) dispersion[s.name] = &s;
    else if (s.name == "chi2") chi2_sections.push_back(&s);
    else if (s.name == "overrides") overrides = &s;
    else throw ValidationError(source_name + ": unknown section [" + s.name + "]");
  }
  if (!meta) throw ValidationError(source_name + ": missing [meta] section");

  auto meta_value = [&](const char* key) -> const std::string& {
    const std::string* v = meta->find(key);
    if (!v) {
      throw ValidationError(source_name + ": [meta] missing '" + std::string(key) + "'");
    }
    return *v;
  };
  record.refcode = meta_value("refcode");
  record.crystal_class = meta_value("crystal_class");
  if (!is_noncentrosymmetric_class(record.crystal_class)) {
    throw ValidationError(source_name + ": crystal_class '" + record.crystal_class +
                          "' is not a known non-centrosymmetric point group");
  }
  record.band_gap_ev = parse_number(meta_value("band_gap_ev"), source_name + ": band_gap_ev");
  if (!(record.band_gap_ev > 0.0)) {
    throw ValidationError(source_name + ": band_gap_ev must be positive");
  }
  if (const std::string* l = meta->find("length_mm")) {
    record.length_mm = parse_number(*l, source_name + ": length_mm");
  }
  if (!(record.length_mm > 0.0)) {
    throw ValidationError(source_name + ": length_mm must be positive");
  }
  if (const std::string* axes = meta->find("axes")) {
    if (*axes == "xyz") record.axes_are_xyz = true;
    else if (*axes == "abc") record.axes_are_xyz = false;
    else throw ValidationError(source_name + ": axes must be 'abc' or 'xyz'");
  }
  record.chi2_frame = meta_value("chi2_frame");
  if (record.chi2_frame != "crystallographic" &&
      record.chi2_frame != "crystallophysical") {
    throw ValidationError(source_name +
                          ": chi2_frame must be 'crystallographic' or 'crystallophysical'");
  }

  const char* axis_names[3] = {"dispersion.a", "dispersion.b", "dispersion.c"};
  for (int i = 0; i < 3; ++i) {
    const auto it = dispersion.find(axis_names[i]);
    if (it == dispersion.end()) {
      throw ValidationError(source_name + ": missing axis dispersion section [" +
                            axis_names[i] + "]");
    }
    record.axis_models[i] = parse_dispersion_section(
        *it->second, source_name + ": [" + axis_names[i] + "]");
  }

  if (chi2_sections.empty()) {
    throw ValidationError(source_name + ": missing [chi2] section");
  }
  for (const Section* s : chi2_sections) {
    record.chi2.push_back(parse_chi2_section(*s, source_name + ": [chi2]"));
  }

  if (overrides) {
    if (const std::string* t = overrides->find("index_tolerance")) {
      record.index_tolerance = parse_number(*t, source_name + ": index_tolerance");
    }
    if (const std::string* r = overrides->find("index_rule")) {
      if (*r == "eigen") record.index_rule = IndexRule::eigen_decomposition;
      else if (*r == "diagonal") record.index_rule = IndexRule::diagonal_entries;
      else throw ValidationError(source_name + ": index_rule must be 'eigen' or 'diagonal'");
    }
  }
  return record;
}

CrystalRecord load_crystal(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open crystal record '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_crystal(buffer.str(), path.filename().string());
}

namespace {

void serialize_model(std::ostream& out, const DispersionModel& model) {
  if (model.form() == DispersionModel::Form::sellmeier) {
    const SellmeierCoefficients& c = model.coefficients();
    out << "model = sellmeier\n";
    out << "A = " << fmt17(c.a) << "\n";
    if (!c.b.empty()) {
      out << "B =";
      for (double v : c.b) out << " " << fmt17(v);
      out << "\nC =";
      for (double v : c.c) out << " " << fmt17(v);
      out << "\n";
    }
    out << "D = " << fmt17(c.d) << "\n";
  } else {
    const TableData& t = model.table_data();
    out << "model = table\n";
    for (std::size_t i = 0; i < t.wavelength_nm.size(); ++i) {
      out << "point = " << fmt17(t.wavelength_nm[i]) << " " << fmt17(t.index[i])
          << "\n";
    }
  }
  if (model.has_range()) {
    out << "range_nm = " << fmt17(model.range().min_nm) << " "
        << fmt17(model.range().max_nm) << "\n";
  }
  if (!model.provenance.empty()) out << "provenance = " << model.provenance << "\n";
  if (model.fit_residual) out << "fit_residual = " << fmt17(*model.fit_residual) << "\n";
}

}  // namespace

std::string serialize_crystal(const CrystalRecord& record) {
  std::ostringstream out;
  out << "version = " << record.version << "\n\n";
  out << "[meta]\n";
  out << "refcode = " << record.refcode << "\n";
  out << "crystal_class = " << record.crystal_class << "\n";
  out << "band_gap_ev = " << fmt17(record.band_gap_ev) << "\n";
  out << "length_mm = " << fmt17(record.length_mm) << "\n";
  out << "axes = " << (record.axes_are_xyz ? "xyz" : "abc") << "\n";
  out << "chi2_frame = " << record.chi2_frame << "\n";
  const char* axis_names[3] = {"a", "b", "c"};
  for (int i = 0; i < 3; ++i) {
    out << "\n[dispersion." << axis_names[i] << "]\n";
    serialize_model(out, record.axis_models[i]);
  }
  for (const Chi2Entry& entry : record.chi2) {
    out << "\n[chi2]\n";
    out << "wavelength_nm = " << fmt17(entry.wavelength_nm) << "\n";
    out << "form = tensor\n";
    const char* rows[3] = {"row_x", "row_y", "row_z"};
    for (int i = 0; i < 3; ++i) {
      out << rows[i] << " =";
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) out << " " << fmt17(entry.tensor(i, j, k));
      out << "\n";
    }
    out << "kleinman_assumed = "
        << (entry.tensor.kleinman_assumed() ? "true" : "false") << "\n";
  }
  if (record.index_tolerance || record.index_rule) {
    out << "\n[overrides]\n";
    if (record.index_tolerance)
      out << "index_tolerance = " << fmt17(*record.index_tolerance) << "\n";
    if (record.index_rule) {
      out << "index_rule = "
          << (*record.index_rule == IndexRule::eigen_decomposition ? "eigen"
                                                                   : "diagonal")
          << "\n";
    }
  }
  return out.str();
}

void save_crystal(const CrystalRecord& record,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write crystal record '" + path.string() + "'");
  out << serialize_crystal(record);
}

CrystalRecord CrystalRecord::with_default_ranges(double lambda_pump_nm) const {
  CrystalRecord copy = *this;
  const WavelengthRange fallback{0.8 * lambda_pump_nm,
                                 1.2 * (2.0 * lambda_pump_nm)};
  for (DispersionModel& model : copy.axis_models) {
    if (!model.has_range()) model = model.with_range(fallback);
  }
  return copy;
}

const Chi2Entry& select_chi2(const CrystalRecord& record, double pump_nm) {
  if (record.chi2.empty()) {
    throw ContractError(record.refcode + ": record carries no chi2 entry");
  }
  const Chi2Entry* best = &record.chi2.front();
  for (const Chi2Entry& entry : record.chi2) {
    if (std::abs(entry.wavelength_nm - pump_nm) <
        std::abs(best->wavelength_nm - pump_nm)) {
      best = &entry;
    }
  }
  return *best;
}

void PumpConfig::validate() const {
  if (!(pump_wavelength_nm > 0.0) || !(pump_power_mw > 0.0) ||
      !(pump_waist_um > 0.0) || !(collection_waist_um > 0.0) ||
      detector_bandwidth_rad_s < 0.0) {
    throw ValidationError("pump configuration values must be strictly positive");
  }
}

double photon_energy_ev(double lambda_nm) {
  return constants::hc_ev_nm / lambda_nm;
}

FilterResult filter_candidates(const std::vector<CrystalRecord>& records,
                               const PumpConfig& pump,
                               const std::set<std::string>& whitelist) {
  FilterResult result;
  const double pump_energy_ev = photon_energy_ev(pump.pump_wavelength_nm);
  for (std::size_t i = 0; i < records.size(); ++i) {
    const CrystalRecord& r = records[i];
    if (is_cubic_class(r.crystal_class)) {
      result.rejected.push_back({i, r.refcode, "cubic-class-not-phase-matchable"});
    } else if (r.band_gap_ev > pump_energy_ev) {
      result.accepted.push_back({i, r.refcode, "ok"});
    } else if (whitelist.count(r.refcode) > 0) {
      result.accepted.push_back({i, r.refcode, "whitelisted"});
    } else {
      result.rejected.push_back({i, r.refcode, "gap-below-pump-photon-energy"});
    }
  }
  return result;
}

std::set<std::string> load_whitelist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open whitelist '" + path.string() + "'");
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) out.insert(line);
  }
  return out;
}

}  // namespace spdc
