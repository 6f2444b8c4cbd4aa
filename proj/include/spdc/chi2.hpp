#pragma once

#include <Eigen/Core>
#include <array>

namespace spdc {

/// Second-order susceptibility tensor chi2_ijk in pm/V, stored dense in
/// row-major (i,j,k) order. Physical tensors are symmetric in the last two
/// indices (intrinsic permutation symmetry for degenerate frequencies).
class Chi2Tensor {
 public:
  Chi2Tensor() { values_.fill(0.0); }

  static Chi2Tensor from_components(const std::array<double, 27>& c,
                                    bool kleinman_assumed = false);

  /// Builds chi2 = 2*d from the 3x6 contracted d-matrix (Voigt columns
  /// XX, YY, ZZ, YZ, XZ, XY). Exact by construction in both directions.
  static Chi2Tensor from_d_matrix(const Eigen::Matrix<double, 3, 6>& d,
                                  bool kleinman_assumed = false);

  double operator()(int i, int j, int k) const {
    return values_[9 * i + 3 * j + k];
  }
  double& operator()(int i, int j, int k) { return values_[9 * i + 3 * j + k]; }

  const std::array<double, 27>& components() const { return values_; }

  /// Contracted d-matrix d_il = chi2_ijk / 2. Requires last-two-index
  /// symmetry; round-trips bit-exactly with from_d_matrix.
  Eigen::Matrix<double, 3, 6> d_matrix() const;

  double max_abs() const;

  struct Asymmetry {
    double relative = 0.0;  // worst |c_ijk - c_ikj| / max_abs
    int i = 0, j = 0, k = 0;
  };
  Asymmetry last_two_asymmetry() const;

  /// Throws ValidationError citing the worst component pair when the
  /// last-two-index symmetry is violated beyond rel_tol.
  void validate_intrinsic_symmetry(double rel_tol = 1e-12) const;

  Chi2Tensor scaled(double s) const;

  /// True when the stored values were produced under Kleinman symmetry
  /// (exactness flag for the contracted form).
  bool kleinman_assumed() const { return kleinman_assumed_; }
  void set_kleinman_assumed(bool v) { kleinman_assumed_ = v; }

 private:
  std::array<double, 27> values_;
  bool kleinman_assumed_ = false;
};

/// chi2'_ijk = R_ip R_jq R_kr chi2_pqr. R must be orthogonal within
/// `orthogonality_tol` (properness is not required, so parity tests with
/// improper matrices are possible).
Chi2Tensor rotate(const Chi2Tensor& chi2, const Eigen::Matrix3d& rotation,
                  double orthogonality_tol = 1e-10);

/// Average over all six index permutations; idempotent, and the fixed point
/// of every fully symmetric tensor.
Chi2Tensor kleinman_symmetrize(const Chi2Tensor& chi2);

}  // namespace spdc
