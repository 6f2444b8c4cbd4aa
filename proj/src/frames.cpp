#include "spdc/frames.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "spdc/errors.hpp"

namespace spdc {

namespace {

constexpr const char* kAxisNames[3] = {"a", "b", "c"};

bool nearly_equal(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

// Signed permutation from a desired source-axis order, determinant kept +1
// by flipping the new X axis when the permutation is odd.
FrameAssignment signed_permutation(const std::array<int, 3>& order) {
  FrameAssignment frame;
  frame.permutation = order;
  Eigen::Matrix3d perm = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i) perm(i, order[i]) = 1.0;
  if (perm.determinant() < 0.0) frame.sign_flips[0] = -1;
  frame.rotation = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    frame.rotation(i, order[i]) = static_cast<double>(frame.sign_flips[i]);
  return frame;
}

// Ascending stable sort of the three axis values; ties keep original order.
std::array<int, 3> ascending_order(const std::array<double, 3>& values) {
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int l, int r) { return values[l] < values[r]; });
  return order;
}

}  // namespace

std::string to_string(OpticKind kind) {
  switch (kind) {
    case OpticKind::isotropic: return "isotropic";
    case OpticKind::uniaxial: return "uniaxial";
    case OpticKind::biaxial: return "biaxial";
  }
  return "?";
}

std::string to_string(OpticSign sign) {
  switch (sign) {
    case OpticSign::positive: return "positive";
    case OpticSign::negative: return "negative";
    case OpticSign::not_applicable: return "n/a";
  }
  return "?";
}

std::pair<PrincipalIndices, FrameAssignment> principal_refractive_indices(
    const Eigen::Matrix3d& epsilon, double wavelength_nm, IndexRule rule) {
  const double scale = epsilon.cwiseAbs().maxCoeff();
  if (scale <= 0.0) throw NumericsError("non-physical dielectric tensor: zero");
  const double asym = (epsilon - epsilon.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9 * scale) {
    throw ContractError("dielectric tensor asymmetric beyond 1e-9 relative");
  }
  const Eigen::Matrix3d sym = 0.5 * (epsilon + epsilon.transpose());

  std::array<double, 3> eigvals;
  FrameAssignment frame;

  const double offdiag = std::max({std::abs(sym(0, 1)), std::abs(sym(0, 2)),
                                   std::abs(sym(1, 2))});
  const bool effectively_diagonal = offdiag <= 1e-13 * scale;

  if (rule == IndexRule::diagonal_entries || effectively_diagonal) {
    const std::array<double, 3> diag = {sym(0, 0), sym(1, 1), sym(2, 2)};
    frame = signed_permutation(ascending_order(diag));
    for (int i = 0; i < 3; ++i) eigvals[i] = diag[frame.permutation[i]];
    frame.rule = (rule == IndexRule::diagonal_entries) ? "diagonal-entries"
                                                       : "eigen-decomposition";
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(sym);
    if (solver.info() != Eigen::Success) {
      throw NumericsError("dielectric tensor eigen-decomposition failed");
    }
    for (int i = 0; i < 3; ++i) eigvals[i] = solver.eigenvalues()[i];
    frame.rotation = solver.eigenvectors().transpose();
    if (frame.rotation.determinant() < 0.0) frame.rotation.row(0) *= -1.0;
    // Nearest signed permutation, recorded for provenance only; the full
    // rotation is the authoritative frame.
    for (int i = 0; i < 3; ++i) {
      int best = 0;
      for (int j = 1; j < 3; ++j) {
        if (std::abs(frame.rotation(i, j)) > std::abs(frame.rotation(i, best)))
          best = j;
      }
      frame.permutation[i] = best;
      frame.sign_flips[i] = frame.rotation(i, best) >= 0.0 ? 1 : -1;
    }
    frame.rule = "eigen-decomposition";
  }

  for (double v : eigvals) {
    if (!(v > 0.0)) {
      throw NumericsError("non-physical dielectric tensor: eigenvalue " +
                          std::to_string(v));
    }
  }
  PrincipalIndices indices;
  indices.n_x = std::sqrt(eigvals[0]);
  indices.n_y = std::sqrt(eigvals[1]);
  indices.n_z = std::sqrt(eigvals[2]);
  indices.wavelength_nm = wavelength_nm;
  return {indices, frame};
}

OpticClass classify_optic(const PrincipalIndices& indices, double rel_tol) {
  const double n[3] = {indices.n_x, indices.n_y, indices.n_z};
  const bool eq_xy = nearly_equal(n[0], n[1], rel_tol);
  const bool eq_yz = nearly_equal(n[1], n[2], rel_tol);
  const bool eq_xz = nearly_equal(n[0], n[2], rel_tol);
  const int pairs = int(eq_xy) + int(eq_yz) + int(eq_xz);

  OpticClass result;
  if (pairs >= 2) {
    // Three pairs -> isotropic; two pairs only happens in the intransitive
    // boundary band where all three are within ~2 tol, treated as isotropic.
    result.kind = OpticKind::isotropic;
    result.sign = OpticSign::not_applicable;
    return result;
  }
  if (pairs == 1) {
    result.kind = OpticKind::uniaxial;
    double n_o, n_e;
    if (eq_xy) {
      n_o = 0.5 * (n[0] + n[1]);
      n_e = n[2];
    } else if (eq_yz) {
      n_o = 0.5 * (n[1] + n[2]);
      n_e = n[0];
    } else {
      n_o = 0.5 * (n[0] + n[2]);
      n_e = n[1];
    }
    result.sign = n_e > n_o ? OpticSign::positive : OpticSign::negative;
    return result;
  }
  result.kind = OpticKind::biaxial;
  double sorted[3] = {n[0], n[1], n[2]};
  std::sort(sorted, sorted + 3);
  result.sign = (sorted[1] - sorted[0]) < (sorted[2] - sorted[1])
                    ? OpticSign::positive
                    : OpticSign::negative;
  return result;
}

FrameAssignment assign_biaxial_frame(const std::array<double, 3>& axis_indices,
                                     double rel_tol) {
  const PrincipalIndices probe{axis_indices[0], axis_indices[1],
                               axis_indices[2], 0.0};
  if (classify_optic(probe, rel_tol).kind != OpticKind::biaxial) {
    throw ContractError("assign_biaxial_frame: index triple is not biaxial");
  }
  FrameAssignment frame = signed_permutation(ascending_order(axis_indices));
  frame.rule = "biaxial-sort-ascending";
  return frame;
}

FrameAssignment assign_uniaxial_frame(const std::array<double, 3>& axis_indices,
                                      double rel_tol) {
  const PrincipalIndices probe{axis_indices[0], axis_indices[1],
                               axis_indices[2], 0.0};
  if (classify_optic(probe, rel_tol).kind != OpticKind::uniaxial) {
    throw ContractError("assign_uniaxial_frame: index triple is not uniaxial");
  }
  // The distinct axis is the one farthest from the closest pair.
  const std::array<std::array<int, 3>, 3> splits = {{
      {2, 0, 1},  // pair (a,b), distinct c
      {1, 0, 2},  // pair (a,c), distinct b
      {0, 1, 2},  // pair (b,c), distinct a
  }};
  double best_gap = -1.0;
  std::array<int, 3> order = {0, 1, 2};
  for (const auto& s : splits) {
    const double pair_gap =
        std::abs(axis_indices[s[1]] - axis_indices[s[2]]);
    const double mean = 0.5 * (axis_indices[s[1]] + axis_indices[s[2]]);
    const double distinct_gap = std::abs(axis_indices[s[0]] - mean);
    if (distinct_gap - pair_gap > best_gap) {
      best_gap = distinct_gap - pair_gap;
      order = {s[1], s[2], s[0]};  // X, Y from the pair (original order), Z distinct
    }
  }
  FrameAssignment frame = signed_permutation(order);
  frame.rule = "uniaxial-optic-axis-z";
  return frame;
}

double birefringence(const PrincipalIndices& indices) {
  const double hi = std::max({indices.n_x, indices.n_y, indices.n_z});
  const double lo = std::min({indices.n_x, indices.n_y, indices.n_z});
  return hi - lo;
}

}  // namespace spdc
