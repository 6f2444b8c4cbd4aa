#include "spdc/dispersion.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

#include "spdc/constants.hpp"
#include "spdc/quadrature.hpp"

namespace spdc {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// d(n^2)/dlambda and d^2(n^2)/dlambda^2 of the closed form, per um.
void sellmeier_n2_derivs(const SellmeierCoefficients& s, double lambda_um,
                         double& d1, double& d2) {
  const double l = lambda_um;
  const double l2 = l * l;
  d1 = -2.0 * s.d * l;
  d2 = -2.0 * s.d;
  for (std::size_t i = 0; i < s.b.size(); ++i) {
    const double den = l2 - s.c[i];
    d1 += -2.0 * s.b[i] * s.c[i] * l / (den * den);
    d2 += 2.0 * s.b[i] * s.c[i] * (3.0 * l2 + s.c[i]) / (den * den * den);
  }
}

// Fritsch-Carlson tangents for a monotonicity-preserving cubic Hermite
// interpolant through (x_i, y_i).
std::vector<double> monotone_cubic_tangents(const std::vector<double>& x,
                                            const std::vector<double>& y) {
  const std::size_t n = x.size();
  std::vector<double> h(n - 1), delta(n - 1), m(n);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x[i + 1] - x[i];
    delta[i] = (y[i + 1] - y[i]) / h[i];
  }
  m[0] = delta[0];
  m[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    m[i] = (delta[i - 1] * delta[i] <= 0.0) ? 0.0
                                            : 0.5 * (delta[i - 1] + delta[i]);
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (delta[i] == 0.0) {
      m[i] = 0.0;
      m[i + 1] = 0.0;
      continue;
    }
    const double alpha = m[i] / delta[i];
    const double beta = m[i + 1] / delta[i];
    const double s = alpha * alpha + beta * beta;
    if (s > 9.0) {
      const double tau = 3.0 / std::sqrt(s);
      m[i] = tau * alpha * delta[i];
      m[i + 1] = tau * beta * delta[i];
    }
  }
  return m;
}

double hermite_eval(const std::vector<double>& x, const std::vector<double>& y,
                    const std::vector<double>& m, double xq) {
  const auto it = std::upper_bound(x.begin(), x.end(), xq);
  std::size_t i = (it == x.begin()) ? 0 : (it - x.begin()) - 1;
  if (i + 1 >= x.size()) i = x.size() - 2;
  const double h = x[i + 1] - x[i];
  const double t = (xq - x[i]) / h;
  const double t2 = t * t;
  const double t3 = t2 * t;
  const double h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
  const double h10 = t3 - 2.0 * t2 + t;
  const double h01 = -2.0 * t3 + 3.0 * t2;
  const double h11 = t3 - t2;
  return h00 * y[i] + h10 * h * m[i] + h01 * y[i + 1] + h11 * h * m[i + 1];
}

}  // namespace

DispersionModel DispersionModel::sellmeier(SellmeierCoefficients coeffs,
                                           std::optional<WavelengthRange> range) {
  if (coeffs.b.size() != coeffs.c.size()) {
    throw ValidationError("dispersion: B and C coefficient lists differ in length");
  }
  DispersionModel model;
  model.form_ = Form::sellmeier;
  model.coeffs_ = std::move(coeffs);
  if (range) return model.with_range(*range);
  return model;
}

DispersionModel DispersionModel::table(TableData data,
                                       std::optional<WavelengthRange> range) {
  if (data.wavelength_nm.size() != data.index.size()) {
    throw ValidationError("dispersion table: wavelength/index column lengths differ");
  }
  if (data.wavelength_nm.size() < 2) {
    throw ValidationError("dispersion table: needs at least two points");
  }
  for (std::size_t i = 0; i + 1 < data.wavelength_nm.size(); ++i) {
    if (data.wavelength_nm[i + 1] <= data.wavelength_nm[i]) {
      throw ValidationError("dispersion table: wavelengths must be strictly increasing (offending row " +
                            std::to_string(i + 1) + ")");
    }
  }
  DispersionModel model;
  model.form_ = Form::table;
  model.table_ = std::move(data);
  model.tangents_ =
      monotone_cubic_tangents(model.table_.wavelength_nm, model.table_.index);
  const WavelengthRange full{model.table_.wavelength_nm.front(),
                             model.table_.wavelength_nm.back()};
  return model.with_range(range.value_or(full));
}

const WavelengthRange& DispersionModel::range() const {
  if (!range_) throw ContractError("dispersion model has no validity window resolved yet");
  return *range_;
}

DispersionModel DispersionModel::with_range(const WavelengthRange& range) const {
  if (!(range.min_nm > 0.0) || !(range.max_nm > range.min_nm)) {
    throw ValidationError("dispersion: invalid validity window [" +
                          fmt(range.min_nm) + ", " + fmt(range.max_nm) + "] nm");
  }
  DispersionModel model = *this;
  if (form_ == Form::sellmeier) {
    for (double c : coeffs_.c) {
      if (c <= 0.0) continue;
      const double pole_nm = std::sqrt(c) * 1000.0;
      if (range.contains(pole_nm)) {
        throw ValidationError("dispersion: Sellmeier pole at " + fmt(pole_nm) +
                              " nm lies inside the validity window");
      }
    }
  } else {
    if (range.min_nm < table_.wavelength_nm.front() ||
        range.max_nm > table_.wavelength_nm.back()) {
      throw ValidationError("dispersion table: validity window exceeds tabulated span");
    }
  }
  model.range_ = range;
  return model;
}

void DispersionModel::check_range(double lambda_nm) const {
  const WavelengthRange& r = range();
  if (!r.contains(lambda_nm)) {
    throw RangeError("wavelength " + fmt(lambda_nm) +
                     " nm outside validity window [" + fmt(r.min_nm) + ", " +
                     fmt(r.max_nm) + "] nm");
  }
}

void DispersionModel::check_stencil(double lambda_nm, double h_nm) const {
  const WavelengthRange& r = range();
  if (lambda_nm - 2.0 * h_nm < r.min_nm || lambda_nm + 2.0 * h_nm > r.max_nm) {
    throw RangeError("derivative stencil at " + fmt(lambda_nm) +
                     " nm leaves validity window [" + fmt(r.min_nm) + ", " +
                     fmt(r.max_nm) + "] nm");
  }
}

double DispersionModel::index_at(double lambda_nm) const {
  check_range(lambda_nm);
  if (form_ == Form::sellmeier) {
    const double n2 = sellmeier_n2(coeffs_, lambda_nm * 1e-3);
    if (!(n2 > 0.0)) {
      throw NumericsError("non-physical refractive index: n^2 = " + fmt(n2) +
                          " at " + fmt(lambda_nm) + " nm");
    }
    return std::sqrt(n2);
  }
  return hermite_eval(table_.wavelength_nm, table_.index, tangents_, lambda_nm);
}

double DispersionModel::dn_dlambda(double lambda_nm) const {
  if (form_ == Form::sellmeier) {
    check_range(lambda_nm);
    const double lam_um = lambda_nm * 1e-3;
    const double n = index_at(lambda_nm);
    double d1, d2;
    sellmeier_n2_derivs(coeffs_, lam_um, d1, d2);
    return (d1 / (2.0 * n)) * 1e-3;  // um^-1 -> nm^-1
  }
  const double h = lambda_nm * 1e-4;
  check_stencil(lambda_nm, h);
  const auto f = [&](double x) { return index_at(x); };
  return (-f(lambda_nm + 2 * h) + 8 * f(lambda_nm + h) - 8 * f(lambda_nm - h) +
          f(lambda_nm - 2 * h)) /
         (12.0 * h);
}

double DispersionModel::d2n_dlambda2(double lambda_nm) const {
  if (form_ == Form::sellmeier) {
    check_range(lambda_nm);
    const double lam_um = lambda_nm * 1e-3;
    const double n = index_at(lambda_nm);
    double d1, d2;
    sellmeier_n2_derivs(coeffs_, lam_um, d1, d2);
    // n = sqrt(f): n'' = f''/(2n) - f'^2/(4 n^3), then um^-2 -> nm^-2.
    return (d2 / (2.0 * n) - d1 * d1 / (4.0 * n * n * n)) * 1e-6;
  }
  const double h = lambda_nm * 1e-4;
  check_stencil(lambda_nm, h);
  const auto f = [&](double x) { return index_at(x); };
  return (-f(lambda_nm + 2 * h) + 16 * f(lambda_nm + h) - 30 * f(lambda_nm) +
          16 * f(lambda_nm - h) - f(lambda_nm - 2 * h)) /
         (12.0 * h * h);
}

const SellmeierCoefficients& DispersionModel::coefficients() const {
  if (form_ != Form::sellmeier) throw ContractError("model is not in Sellmeier form");
  return coeffs_;
}

const TableData& DispersionModel::table_data() const {
  if (form_ != Form::table) throw ContractError("model is not in table form");
  return table_;
}

double eval_index(const DispersionModel& model, double lambda_nm) {
  return model.index_at(lambda_nm);
}

namespace {

GroupQuantities group_from_derivs(double lambda_nm, double n, double d1_nm,
                                  double d2_nm) {
  GroupQuantities g;
  g.n = n;
  g.n_g = n - lambda_nm * d1_nm;
  g.u_mm_per_fs = constants::c_mm_per_fs / g.n_g;
  // kappa = d^2k/domega^2 = lambda^3/(2 pi c^2) d^2n/dlambda^2, in fs^2/mm.
  const double lambda_mm = lambda_nm * 1e-6;
  const double d2_mm = d2_nm * 1e12;
  g.kappa_fs2_per_mm = lambda_mm * lambda_mm * lambda_mm * d2_mm /
                       (2.0 * constants::pi * constants::c_mm_per_fs *
                        constants::c_mm_per_fs);
  return g;
}

}  // namespace

GroupQuantities group_quantities(const DispersionModel& model,
                                 double lambda_nm) {
  return group_from_derivs(lambda_nm, model.index_at(lambda_nm),
                           model.dn_dlambda(lambda_nm),
                           model.d2n_dlambda2(lambda_nm));
}

GroupQuantities group_quantities_of(const IndexCurve& curve, double lambda_nm,
                                    double rel_step) {
  const double h = lambda_nm * rel_step;
  const double fm2 = curve(lambda_nm - 2 * h);
  const double fm1 = curve(lambda_nm - h);
  const double f0 = curve(lambda_nm);
  const double fp1 = curve(lambda_nm + h);
  const double fp2 = curve(lambda_nm + 2 * h);
  const double d1 = (-fp2 + 8 * fp1 - 8 * fm1 + fm2) / (12.0 * h);
  const double d2 = (-fp2 + 16 * fp1 - 30 * f0 + 16 * fm1 - fm2) / (12.0 * h * h);
  return group_from_derivs(lambda_nm, f0, d1, d2);
}

double gvm_fs_per_mm(const GroupQuantities& first,
                     const GroupQuantities& second) {
  return 1.0 / first.u_mm_per_fs - 1.0 / second.u_mm_per_fs;
}

double sinc_sq_half_max_argument() {
  static const double cached = [] {
    // sinc^2 falls monotonically from 1 on [0, pi]; bisect sinc^2(x) = 1/2.
    double lo = 1.0, hi = 2.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double s = sinc(mid);
      if (s * s > 0.5)
        lo = mid;
      else
        hi = mid;
    }
    return 0.5 * (lo + hi);
  }();
  return cached;
}

double acceptance_bandwidth_fwhm_nm(double kappa_fs2_per_mm, double length_mm,
                                    double lambda_s_nm) {
  if (kappa_fs2_per_mm == 0.0) {
    throw NumericsError(
        "acceptance bandwidth unbounded: GVD kappa vanishes at the "
        "phase-matched point (quadratic mismatch model)");
  }
  const double kl = std::abs(kappa_fs2_per_mm) * length_mm;  // fs^2
  const double nu_half = std::sqrt(2.0 * sinc_sq_half_max_argument() / kl);
  const double omega = 2.0 * constants::pi * constants::c_nm_per_fs / lambda_s_nm;
  if (nu_half >= omega) {
    throw NumericsError("acceptance bandwidth exceeds the physical band");
  }
  const double lam_lo = 2.0 * constants::pi * constants::c_nm_per_fs / (omega + nu_half);
  const double lam_hi = 2.0 * constants::pi * constants::c_nm_per_fs / (omega - nu_half);
  return lam_hi - lam_lo;
}

namespace {

struct LinearFit {
  Eigen::VectorXd coeffs;  // A, B_0..B_{t-1}, D
  double sum_sq = 0.0;
};

// For fixed poles, the remaining coefficients enter n^2 linearly.
LinearFit solve_linear(const std::vector<EpsilonSample>& samples,
                       const Eigen::VectorXd& poles) {
  const int t = static_cast<int>(poles.size());
  const int m = static_cast<int>(samples.size());
  Eigen::MatrixXd design(m, t + 2);
  Eigen::VectorXd rhs(m);
  for (int r = 0; r < m; ++r) {
    const double l2 = std::pow(samples[r].wavelength_nm * 1e-3, 2);
    design(r, 0) = 1.0;
    for (int j = 0; j < t; ++j) design(r, 1 + j) = l2 / (l2 - poles[j]);
    design(r, t + 1) = -l2;
    rhs(r) = samples[r].epsilon;
  }
  LinearFit fit;
  fit.coeffs = design.colPivHouseholderQr().solve(rhs);
  fit.sum_sq = (design * fit.coeffs - rhs).squaredNorm();
  return fit;
}

bool poles_admissible(const Eigen::VectorXd& poles, double l2_min,
                      double l2_max) {
  for (int j = 0; j < poles.size(); ++j) {
    if (poles[j] > l2_min && poles[j] < l2_max) return false;
    for (int k = 0; k < j; ++k) {
      if (std::abs(poles[j] - poles[k]) < 1e-12 * (1.0 + std::abs(poles[j])))
        return false;
    }
  }
  return true;
}

}  // namespace

SellmeierFitResult fit_sellmeier(const std::vector<EpsilonSample>& samples,
                                 int n_terms,
                                 std::optional<WavelengthRange> range,
                                 double residual_threshold) {
  if (n_terms < 0) throw ValidationError("fit_sellmeier: negative term count");
  const int n_coeffs = 2 + 2 * n_terms;
  if (static_cast<int>(samples.size()) < n_coeffs + 2) {
    throw ValidationError("fit_sellmeier: underdetermined (" +
                          std::to_string(samples.size()) + " samples for " +
                          std::to_string(n_coeffs) + " coefficients; need >= " +
                          std::to_string(n_coeffs + 2) + ")");
  }
  double lmin = samples.front().wavelength_nm, lmax = lmin;
  for (const auto& s : samples) {
    lmin = std::min(lmin, s.wavelength_nm);
    lmax = std::max(lmax, s.wavelength_nm);
  }
  const double l2_min = std::pow(lmin * 1e-3, 2);
  const double l2_max = std::pow(lmax * 1e-3, 2);

  // Degenerate inputs (constant or pole-free epsilon) are fit exactly by the
  // A/D sub-model; resonance strengths then stay identically zero.
  if (n_terms > 0) {
    const LinearFit plain = solve_linear(samples, Eigen::VectorXd(0));
    double plain_worst = 0.0;
    for (const auto& s : samples) {
      const double n_fit = std::sqrt(std::max(
          plain.coeffs[0] - plain.coeffs[1] * std::pow(s.wavelength_nm * 1e-3, 2),
          1e-300));
      plain_worst = std::max(
          plain_worst, std::abs(n_fit - std::sqrt(s.epsilon)) / std::sqrt(s.epsilon));
    }
    if (plain_worst < 1e-12) {
      SellmeierCoefficients coeffs;
      coeffs.a = plain.coeffs[0];
      coeffs.d = plain.coeffs[1];
      for (int j = 0; j < n_terms; ++j) {
        coeffs.b.push_back(0.0);
        coeffs.c.push_back(0.5 * l2_min / std::pow(4.0, j));
      }
      WavelengthRange window = range.value_or(WavelengthRange{lmin, lmax});
      SellmeierFitResult out{DispersionModel::sellmeier(coeffs, window),
                             plain_worst};
      out.model.provenance = "fit_sellmeier over " +
                             std::to_string(samples.size()) +
                             " samples, pole-free sub-model";
      out.model.fit_residual = plain_worst;
      return out;
    }
  }

  // Coarse deterministic pole search first: log-spaced candidates below and
  // above the sampled span, every admissible combination solved linearly.
  std::vector<double> candidates;
  for (int i = 0; i < 12; ++i) {
    candidates.push_back(1e-4 *
                         std::pow(0.9 * l2_min / 1e-4, i / 11.0));  // UV side
  }
  for (int i = 0; i < 12; ++i) {
    candidates.push_back(1.15 * l2_max *
                         std::pow(4000.0 / (1.15 * l2_max), i / 11.0));
  }
  Eigen::VectorXd poles = Eigen::VectorXd::Zero(n_terms);
  struct GridSeed {
    double objective;
    Eigen::VectorXd poles;
    int ir_count;  // poles above the sampled span
  };
  std::vector<GridSeed> combos;
  auto ir_count_of = [&](const Eigen::VectorXd& p) {
    int n = 0;
    for (int j = 0; j < p.size(); ++j) n += p[j] > l2_max ? 1 : 0;
    return n;
  };
  {
    Eigen::VectorXd fallback(n_terms);
    for (int j = 0; j < n_terms; ++j) {
      fallback[j] = j == 0 ? 0.5 * l2_min : 4.0 * l2_max * std::pow(4.0, j - 2);
    }
    combos.push_back({solve_linear(samples, fallback).sum_sq, fallback,
                      ir_count_of(fallback)});
  }
  if (n_terms == 1) {
    for (double c : candidates) {
      Eigen::VectorXd trial(1);
      trial[0] = c;
      combos.push_back({solve_linear(samples, trial).sum_sq, trial,
                        ir_count_of(trial)});
    }
  } else if (n_terms == 2) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < candidates.size(); ++j) {
        Eigen::VectorXd trial(2);
        trial[0] = candidates[i];
        trial[1] = candidates[j];
        if (!poles_admissible(trial, l2_min, l2_max)) continue;
        combos.push_back({solve_linear(samples, trial).sum_sq, trial,
                          ir_count_of(trial)});
      }
    }
  }
  std::stable_sort(combos.begin(), combos.end(),
                   [](const GridSeed& l, const GridSeed& r) {
                     return l.objective < r.objective;
                   });
  // A weak IR pole is nearly degenerate with a second UV pole at grid
  // resolution, so objective rank alone routinely misses the right basin.
  // Polish the top seeds, the best seed of every UV/IR composition, and the
  // best seed anchored at each individual IR candidate.
  std::vector<Eigen::VectorXd> seeds;
  std::vector<bool> kind_seen(n_terms + 1, false);
  std::set<double> ir_anchor_seen;
  for (const GridSeed& combo : combos) {
    double ir_anchor = 0.0;
    for (int j = 0; j < combo.poles.size(); ++j) {
      if (combo.poles[j] > l2_max) ir_anchor = std::max(ir_anchor, combo.poles[j]);
    }
    const bool top = seeds.size() < 4;
    const bool new_kind = !kind_seen[combo.ir_count];
    const bool new_anchor =
        combo.ir_count > 0 && ir_anchor_seen.count(ir_anchor) == 0;
    if (top || new_kind || new_anchor) {
      seeds.push_back(combo.poles);
      kind_seen[combo.ir_count] = true;
      ir_anchor_seen.insert(ir_anchor);
    }
  }

  // Levenberg-Marquardt on the log pole positions with the linear
  // coefficients solved exactly at every step (variable projection). The log
  // parameterization keeps the Jacobian conditioned across the decades
  // separating UV and IR poles.
  const int m = static_cast<int>(samples.size());
  auto poles_of = [&](const Eigen::VectorXd& logp) {
    return logp.array().exp().matrix().eval();
  };
  auto objective = [&](const Eigen::VectorXd& logp) {
    const Eigen::VectorXd p = poles_of(logp);
    if (!poles_admissible(p, l2_min, l2_max)) return 1e300;
    return solve_linear(samples, p).sum_sq;
  };
  // Residuals of the reduced problem: linear coefficients re-solved at the
  // probed poles. Differentiating this (rather than holding the linear part
  // fixed) is what makes the Gauss-Newton direction trustworthy when the
  // pole and polynomial terms are strongly correlated.
  auto reduced_residuals = [&](const Eigen::VectorXd& p) {
    const LinearFit fit = solve_linear(samples, p);
    Eigen::VectorXd res(m);
    for (int r = 0; r < m; ++r) {
      const double l2 = std::pow(samples[r].wavelength_nm * 1e-3, 2);
      double v = fit.coeffs[0] - fit.coeffs[n_terms + 1] * l2;
      for (int j = 0; j < n_terms; ++j)
        v += fit.coeffs[1 + j] * l2 / (l2 - p[j]);
      res(r) = v - samples[r].epsilon;
    }
    return res;
  };
  auto lm_polish = [&](Eigen::VectorXd logp) {
    double mu = 1e-3;
    double current = objective(logp);
    for (int iter = 0; iter < 200; ++iter) {
      const Eigen::VectorXd res = reduced_residuals(poles_of(logp));
      Eigen::MatrixXd jac(m, n_terms);
      const double h = 1e-6;
      for (int j = 0; j < n_terms; ++j) {
        Eigen::VectorXd perturbed = logp;
        perturbed[j] += h;
        jac.col(j) = (reduced_residuals(poles_of(perturbed)) - res) / h;
      }
      const Eigen::MatrixXd jtj = jac.transpose() * jac;
      const Eigen::VectorXd jtr = jac.transpose() * res;
      bool advanced = false;
      for (int tries = 0; tries < 30; ++tries) {
        Eigen::MatrixXd damped = jtj;
        damped.diagonal() += mu * jtj.diagonal().cwiseMax(1e-30);
        const Eigen::VectorXd step = damped.ldlt().solve(-jtr);
        const Eigen::VectorXd trial = logp + step;
        const double trial_obj = objective(trial);
        if (trial_obj < current) {
          logp = trial;
          current = trial_obj;
          mu = std::max(mu * 0.3, 1e-14);
          advanced = true;
          break;
        }
        mu *= 4.0;
      }
      if (!advanced) break;
    }
    return std::pair<double, Eigen::VectorXd>{current, logp};
  };
  if (n_terms > 0) {
    double best_obj = 1e300;
    for (const Eigen::VectorXd& seed : seeds) {
      const auto [obj, logp] = lm_polish(seed.array().log().matrix());
      if (obj < best_obj) {
        best_obj = obj;
        poles = poles_of(logp);
      }
    }
  }

  const LinearFit final_fit = solve_linear(samples, poles);
  SellmeierCoefficients coeffs;
  coeffs.a = final_fit.coeffs[0];
  coeffs.d = final_fit.coeffs[n_terms + 1];
  for (int j = 0; j < n_terms; ++j) {
    coeffs.b.push_back(final_fit.coeffs[1 + j]);
    coeffs.c.push_back(poles[j]);
  }

  double max_rel = 0.0;
  for (const auto& s : samples) {
    const double n_fit = std::sqrt(
        std::max(sellmeier_n2(coeffs, s.wavelength_nm * 1e-3), 1e-300));
    const double n_ref = std::sqrt(std::max(s.epsilon, 1e-300));
    max_rel = std::max(max_rel, std::abs(n_fit - n_ref) / n_ref);
  }
  if (max_rel > residual_threshold) {
    throw NumericsError("fit_sellmeier: max relative residual " + fmt(max_rel) +
                        " exceeds threshold " + fmt(residual_threshold));
  }
  WavelengthRange window = range.value_or(WavelengthRange{lmin, lmax});
  SellmeierFitResult out{DispersionModel::sellmeier(coeffs, window), max_rel};
  out.model.provenance = "fit_sellmeier over " + std::to_string(samples.size()) +
                         " samples, " + std::to_string(n_terms) + " terms";
  out.model.fit_residual = max_rel;
  return out;
}

}  // namespace spdc
