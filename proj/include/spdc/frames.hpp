#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <utility>

namespace spdc {

/// Principal refractive indices in the crystallophysical frame at one
/// wavelength. Ordering depends on the frame rule that produced them
/// (ascending for biaxial frames, optic axis on Z for uniaxial frames).
struct PrincipalIndices {
  double n_x = 0.0;
  double n_y = 0.0;
  double n_z = 0.0;
  double wavelength_nm = 0.0;
};

enum class OpticKind { isotropic, uniaxial, biaxial };
enum class OpticSign { positive, negative, not_applicable };

struct OpticClass {
  OpticKind kind = OpticKind::isotropic;
  OpticSign sign = OpticSign::not_applicable;
};

std::string to_string(OpticKind kind);
std::string to_string(OpticSign sign);

/// Proper rotation carrying the crystallographic axes (a,b,c) onto the
/// crystallophysical axes (X,Y,Z): rows of `rotation` are the new axes in
/// the old basis, so R eps R^T is diagonal.
struct FrameAssignment {
  std::array<int, 3> permutation = {0, 1, 2};  // permutation[X] = source axis
  std::array<int, 3> sign_flips = {1, 1, 1};   // per new axis, det kept +1
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  std::string rule;  // which prescription produced this frame
};

/// How to extract principal indices from a dielectric tensor. The
/// `diagonal_entries` mode ignores off-diagonal elements (the alternative
/// prescription sometimes quoted for classes 1, 2, m).
enum class IndexRule { eigen_decomposition, diagonal_entries };

/// Diagonalizes the (symmetrized) dielectric tensor and returns the index
/// triple sorted ascending plus the frame that achieves it. epsilon must be
/// symmetric within 1e-9 relative and positive-definite.
std::pair<PrincipalIndices, FrameAssignment> principal_refractive_indices(
    const Eigen::Matrix3d& epsilon, double wavelength_nm,
    IndexRule rule = IndexRule::eigen_decomposition);

/// isotropic / uniaxial / biaxial by relative index equality within rel_tol.
/// Uniaxial sign: positive iff the distinct index (n_e) exceeds the repeated
/// one (n_o). Biaxial sign: positive iff n_y is closer to n_x than to n_z.
OpticClass classify_optic(const PrincipalIndices& indices,
                          double rel_tol = 1e-4);

/// Signed axis permutation putting the per-axis indices (a,b,c) into the
/// biaxial convention n_Z > n_Y > n_X. Throws ContractError when the triple
/// is not biaxial at rel_tol.
FrameAssignment assign_biaxial_frame(const std::array<double, 3>& axis_indices,
                                     double rel_tol = 1e-4);

/// Signed axis permutation putting the distinct (extraordinary) index onto
/// Z, the uniaxial optic-axis convention. Throws ContractError when the
/// triple is not uniaxial at rel_tol.
FrameAssignment assign_uniaxial_frame(const std::array<double, 3>& axis_indices,
                                      double rel_tol = 1e-4);

/// Non-negative spread max index - min index.
double birefringence(const PrincipalIndices& indices);

/// Applies a frame to a per-axis value triple (e.g. picking the dispersion
/// model for each crystallophysical axis).
template <typename T>
std::array<T, 3> permute_axes(const FrameAssignment& frame,
                              const std::array<T, 3>& abc) {
  return {abc[frame.permutation[0]], abc[frame.permutation[1]],
          abc[frame.permutation[2]]};
}

}  // namespace spdc
