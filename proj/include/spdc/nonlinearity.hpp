#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "spdc/chi2.hpp"
#include "spdc/frames.hpp"
#include "spdc/phase_matching.hpp"

namespace spdc {

/// Unit polarization (D-field) vectors of the two branches transverse to
/// the propagation direction. Walk-off is neglected throughout: these are
/// wave-normal transverse eigenvectors.
struct PolarizationBasis {
  Eigen::Vector3d e_fast = Eigen::Vector3d::Zero();
  Eigen::Vector3d e_slow = Eigen::Vector3d::Zero();
  double n_fast = 0.0;
  double n_slow = 0.0;
  bool degenerate = false;  // direction lies on an optic axis
};

/// Uniaxial crystals use the closed-form ordinary/extraordinary vectors
///   e_o = (sin phi, -cos phi, 0)
///   e_e = (cos theta cos phi, cos theta sin phi, -sin theta);
/// biaxial crystals use the eigenvectors of the impermeability tensor
/// projected into the plane transverse to the propagation direction.
PolarizationBasis polarization_basis(const PrincipalIndices& indices,
                                     double theta_deg, double phi_deg,
                                     const OpticClass& optic);

/// Effective nonlinearity d_eff = sum_ijk e_p[i] d_ijk e_s[j] e_i[k] with
/// the SHG convention d = chi2 / 2. Signed; pm/V.
double d_eff(const Chi2Tensor& chi2_xyz, const Eigen::Vector3d& e_pump,
             const Eigen::Vector3d& e_signal, const Eigen::Vector3d& e_idler);

struct DeffResult {
  double value_pm_per_v = 0.0;
  Direction direction;
  std::string config = "pump-fast/signal-slow";
  bool kleinman = false;
};

/// Type-I contraction at one direction: pump on the fast branch at the pump
/// indices, degenerate signal/idler on the slow branch at the signal indices.
DeffResult d_eff_type1(const Chi2Tensor& chi2_xyz,
                       const PrincipalIndices& at_pump,
                       const PrincipalIndices& at_signal,
                       const OpticClass& optic, double theta_deg,
                       double phi_deg);

/// d_eff sampled over the fundamental octant; theta runs over rows, phi over
/// columns, both inclusive of 0 and 90 deg.
struct DeffMap {
  std::vector<double> theta_deg;
  std::vector<double> phi_deg;
  Eigen::MatrixXd values;  // theta index x phi index, pm/V
};

DeffMap deff_map(const Chi2Tensor& chi2_xyz, const PrincipalIndices& at_pump,
                 const PrincipalIndices& at_signal, const OpticClass& optic,
                 int n_theta = 361, int n_phi = 91);

/// |d_eff| maximum over a phase-matching locus, refined by golden-section
/// search along the locus azimuth (uniaxial loci are refined in azimuth at
/// each matched polar angle, since phase matching leaves phi free there).
/// Ties resolve to the smallest theta, then smallest phi. Throws
/// ContractError on an empty locus.
DeffResult max_deff_on_locus(const Chi2Tensor& chi2_xyz,
                             const PrincipalDispersion& dispersion,
                             const PhaseMatchSolution& locus,
                             const OpticClass& optic,
                             const PmSolverOptions& options = {});

}  // namespace spdc
