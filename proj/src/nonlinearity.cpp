#include "spdc/nonlinearity.hpp"

#include <algorithm>
#include <cmath>

#include "spdc/constants.hpp"
#include "spdc/errors.hpp"

namespace spdc {

namespace {

constexpr double kDegToRad = constants::pi / 180.0;

void spherical_frame(double theta_deg, double phi_deg, Eigen::Vector3d& k_hat,
                     Eigen::Vector3d& theta_hat, Eigen::Vector3d& phi_hat) {
  const double theta = theta_deg * kDegToRad;
  const double phi = phi_deg * kDegToRad;
  const double st = std::sin(theta), ct = std::cos(theta);
  const double sp = std::sin(phi), cp = std::cos(phi);
  k_hat = {st * cp, st * sp, ct};
  theta_hat = {ct * cp, ct * sp, -st};
  phi_hat = {-sp, cp, 0.0};
}

// Deterministic sign: the eigenvector component of largest magnitude in the
// (theta_hat, phi_hat) plane is made positive.
Eigen::Vector2d fix_sign(Eigen::Vector2d v) {
  const int lead = std::abs(v[0]) >= std::abs(v[1]) ? 0 : 1;
  if (v[lead] < 0.0) v = -v;
  return v;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  return out;
}

}  // namespace

PolarizationBasis polarization_basis(const PrincipalIndices& indices,
                                     double theta_deg, double phi_deg,
                                     const OpticClass& optic) {
  Eigen::Vector3d k_hat, theta_hat, phi_hat;
  spherical_frame(theta_deg, phi_deg, k_hat, theta_hat, phi_hat);

  PolarizationBasis basis;
  const BranchIndices roots = direction_indices(indices, theta_deg, phi_deg);
  basis.n_slow = roots.n_slow;
  basis.n_fast = roots.n_fast;
  basis.degenerate =
      (roots.n_slow - roots.n_fast) <= 1e-9 * roots.n_slow;

  if (optic.kind != OpticKind::biaxial) {
    // Ordinary/extraordinary closed forms (optic axis on Z). For isotropic
    // media every transverse pair works; the same conventional pair is kept.
    const Eigen::Vector3d e_o = -phi_hat;  // (sin phi, -cos phi, 0)
    const Eigen::Vector3d e_e = theta_hat;
    if (optic.sign == OpticSign::positive) {
      basis.e_fast = e_o;
      basis.e_slow = e_e;
    } else {
      basis.e_fast = e_e;
      basis.e_slow = e_o;
    }
    return basis;
  }

  // Impermeability tensor projected onto the transverse plane; its
  // eigenvectors are the D-field directions of the two branches.
  const Eigen::Vector3d b_diag(1.0 / (indices.n_x * indices.n_x),
                               1.0 / (indices.n_y * indices.n_y),
                               1.0 / (indices.n_z * indices.n_z));
  const Eigen::Matrix3d b_tensor = b_diag.asDiagonal();
  const double m00 = theta_hat.dot(b_tensor * theta_hat);
  const double m01 = theta_hat.dot(b_tensor * phi_hat);
  const double m11 = phi_hat.dot(b_tensor * phi_hat);

  const double mean = 0.5 * (m00 + m11);
  const double radius = std::sqrt(0.25 * (m00 - m11) * (m00 - m11) + m01 * m01);
  const double mu_fast = mean + radius;  // larger eigenvalue -> smaller index
  const double mu_slow = mean - radius;

  if (radius <= 1e-14 * mean) {
    basis.degenerate = true;
    basis.e_fast = theta_hat;
    basis.e_slow = -phi_hat;
    return basis;
  }

  // Eigenvector from the better-conditioned row of (M - mu I).
  auto eigenvector = [&](double mu) {
    Eigen::Vector2d v;
    if (std::abs(mu - m00) >= std::abs(mu - m11)) {
      v = {m01, mu - m00};
    } else {
      v = {mu - m11, m01};
    }
    if (v.norm() == 0.0) v = {1.0, 0.0};
    return fix_sign(v.normalized());
  };
  const Eigen::Vector2d vf = eigenvector(mu_fast);
  const Eigen::Vector2d vs = eigenvector(mu_slow);
  basis.e_fast = (vf[0] * theta_hat + vf[1] * phi_hat).normalized();
  basis.e_slow = (vs[0] * theta_hat + vs[1] * phi_hat).normalized();
  return basis;
}

double d_eff(const Chi2Tensor& chi2_xyz, const Eigen::Vector3d& e_pump,
             const Eigen::Vector3d& e_signal, const Eigen::Vector3d& e_idler) {
  double acc = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        acc += e_pump[i] * chi2_xyz(i, j, k) * e_signal[j] * e_idler[k];
      }
    }
  }
  return 0.5 * acc;  // d = chi2 / 2 (SHG convention)
}

DeffResult d_eff_type1(const Chi2Tensor& chi2_xyz,
                       const PrincipalIndices& at_pump,
                       const PrincipalIndices& at_signal,
                       const OpticClass& optic, double theta_deg,
                       double phi_deg) {
  const PolarizationBasis pump = polarization_basis(at_pump, theta_deg, phi_deg, optic);
  const PolarizationBasis signal = polarization_basis(at_signal, theta_deg, phi_deg, optic);
  DeffResult result;
  result.value_pm_per_v = d_eff(chi2_xyz, pump.e_fast, signal.e_slow, signal.e_slow);
  result.direction = {theta_deg, phi_deg};
  result.kleinman = chi2_xyz.kleinman_assumed();
  return result;
}

DeffMap deff_map(const Chi2Tensor& chi2_xyz, const PrincipalIndices& at_pump,
                 const PrincipalIndices& at_signal, const OpticClass& optic,
                 int n_theta, int n_phi) {
  if (n_theta < 2 || n_phi < 2) throw ContractError("deff_map: grid needs >= 2 points per axis");
  DeffMap map;
  map.theta_deg = linspace(0.0, 90.0, n_theta);
  map.phi_deg = linspace(0.0, 90.0, n_phi);
  map.values.resize(n_theta, n_phi);
  for (int i = 0; i < n_theta; ++i) {
    for (int j = 0; j < n_phi; ++j) {
      map.values(i, j) =
          d_eff_type1(chi2_xyz, at_pump, at_signal, optic, map.theta_deg[i],
                      map.phi_deg[j])
              .value_pm_per_v;
    }
  }
  return map;
}

namespace {

struct LocusProbe {
  double theta_deg = 0.0;
  double phi_deg = 0.0;
  double value = 0.0;  // signed d_eff
};

// Golden-section maximization of |value(phi)|; every probe is recorded so
// the final answer can never fall below the best sample seen.
template <typename Eval>
void golden_refine(double phi_lo, double phi_hi, const Eval& eval,
                   std::vector<LocusProbe>& probes) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = phi_lo, b = phi_hi;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  auto probe = [&](double phi) -> double {
    const auto p = eval(phi);
    if (!p) return -1.0;
    probes.push_back(*p);
    return std::abs(p->value);
  };
  double f1 = probe(x1);
  double f2 = probe(x2);
  for (int i = 0; i < 80 && (b - a) > 1e-10; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = probe(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = probe(x1);
    }
  }
}

}  // namespace

DeffResult max_deff_on_locus(const Chi2Tensor& chi2_xyz,
                             const PrincipalDispersion& dispersion,
                             const PhaseMatchSolution& locus,
                             const OpticClass& optic,
                             const PmSolverOptions& options) {
  if (locus.directions.empty()) {
    throw ContractError("max_deff_on_locus: not phase-matchable at this wavelength");
  }
  const PrincipalIndices at_pump = dispersion.at(locus.lambda_pump_nm);
  const PrincipalIndices at_signal = dispersion.at(locus.lambda_signal_nm);
  auto value_at = [&](double theta, double phi) {
    return d_eff_type1(chi2_xyz, at_pump, at_signal, optic, theta, phi)
        .value_pm_per_v;
  };

  std::vector<LocusProbe> probes;
  if (optic.kind == OpticKind::uniaxial) {
    // Phase matching fixes theta only; the azimuth stays free. Sample each
    // matched polar angle over phi and refine around the best cells.
    for (const Direction& dir : locus.directions) {
      const auto phis = linspace(0.0, 90.0, 91);
      int best_j = 0;
      double best_v = -1.0;
      for (int j = 0; j < static_cast<int>(phis.size()); ++j) {
        const double v = value_at(dir.theta_deg, phis[j]);
        probes.push_back({dir.theta_deg, phis[j], v});
        if (std::abs(v) > best_v) {
          best_v = std::abs(v);
          best_j = j;
        }
      }
      const double lo = phis[std::max(0, best_j - 1)];
      const double hi = phis[std::min<int>(phis.size() - 1, best_j + 1)];
      golden_refine(lo, hi,
                    [&](double phi) -> std::optional<LocusProbe> {
                      return LocusProbe{dir.theta_deg, phi,
                                        value_at(dir.theta_deg, phi)};
                    },
                    probes);
    }
  } else {
    for (const Direction& dir : locus.directions) {
      probes.push_back({dir.theta_deg, dir.phi_deg,
                        value_at(dir.theta_deg, dir.phi_deg)});
    }
    // Refine in azimuth around the best sampled point, re-solving the
    // matched polar angle at every probe so the search stays on the locus.
    std::size_t best = 0;
    for (std::size_t i = 1; i < probes.size(); ++i) {
      if (std::abs(probes[i].value) > std::abs(probes[best].value)) best = i;
    }
    // Refinement stays between the sampled neighbors of the best point; a
    // single-point locus has nothing to refine against.
    const double phi_ref = probes[best].phi_deg;
    const double theta_ref = probes[best].theta_deg;
    double phi_lo = phi_ref, phi_hi = phi_ref;
    for (const Direction& dir : locus.directions) {
      if (dir.phi_deg < phi_ref)
        phi_lo = phi_lo == phi_ref ? dir.phi_deg : std::max(phi_lo, dir.phi_deg);
      if (dir.phi_deg > phi_ref)
        phi_hi = phi_hi == phi_ref ? dir.phi_deg : std::min(phi_hi, dir.phi_deg);
    }
    if (phi_hi > phi_lo) {
      golden_refine(
          phi_lo, phi_hi,
          [&](double phi) -> std::optional<LocusProbe> {
            const auto thetas =
                solve_theta_roots(at_pump, at_signal, phi, options);
            if (thetas.empty()) return std::nullopt;
            const double theta = *std::min_element(
                thetas.begin(), thetas.end(), [&](double l, double r) {
                  return std::abs(l - theta_ref) < std::abs(r - theta_ref);
                });
            return LocusProbe{theta, phi, value_at(theta, phi)};
          },
          probes);
    }
  }

  // Deterministic selection: larger |d_eff| beyond a 1e-12 relative margin
  // wins; ties (flat maxima, roundoff jitter) keep the earlier point in
  // (theta, phi) lexicographic order.
  std::stable_sort(probes.begin(), probes.end(),
                   [](const LocusProbe& l, const LocusProbe& r) {
                     if (l.theta_deg != r.theta_deg)
                       return l.theta_deg < r.theta_deg;
                     return l.phi_deg < r.phi_deg;
                   });
  std::size_t best = 0;
  for (std::size_t i = 1; i < probes.size(); ++i) {
    if (std::abs(probes[i].value) >
        std::abs(probes[best].value) * (1.0 + 1e-12)) {
      best = i;
    }
  }
  DeffResult result;
  result.value_pm_per_v = probes[best].value;
  result.direction = {probes[best].theta_deg, probes[best].phi_deg};
  result.kleinman = chi2_xyz.kleinman_assumed();
  return result;
}

}  // namespace spdc
