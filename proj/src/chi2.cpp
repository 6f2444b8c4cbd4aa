#include "spdc/chi2.hpp"

#include <cmath>
#include <string>

#include "spdc/errors.hpp"

namespace spdc {

namespace {

constexpr int kVoigtPairs[6][2] = {{0, 0}, {1, 1}, {2, 2},
                                   {1, 2}, {0, 2}, {0, 1}};

std::string axis_name(int i) {
  static const char* names[3] = {"x", "y", "z"};
  return names[i];
}

}  // namespace

Chi2Tensor Chi2Tensor::from_components(const std::array<double, 27>& c,
                                       bool kleinman_assumed) {
  Chi2Tensor t;
  t.values_ = c;
  t.kleinman_assumed_ = kleinman_assumed;
  return t;
}

Chi2Tensor Chi2Tensor::from_d_matrix(const Eigen::Matrix<double, 3, 6>& d,
                                     bool kleinman_assumed) {
  Chi2Tensor t;
  t.kleinman_assumed_ = kleinman_assumed;
  for (int i = 0; i < 3; ++i) {
    for (int l = 0; l < 6; ++l) {
      const int j = kVoigtPairs[l][0];
      const int k = kVoigtPairs[l][1];
      const double chi = 2.0 * d(i, l);
      t(i, j, k) = chi;
      t(i, k, j) = chi;
    }
  }
  return t;
}

Eigen::Matrix<double, 3, 6> Chi2Tensor::d_matrix() const {
  validate_intrinsic_symmetry();
  Eigen::Matrix<double, 3, 6> d;
  for (int i = 0; i < 3; ++i) {
    for (int l = 0; l < 6; ++l) {
      const int j = kVoigtPairs[l][0];
      const int k = kVoigtPairs[l][1];
      d(i, l) = (*this)(i, j, k) / 2.0;
    }
  }
  return d;
}

double Chi2Tensor::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Chi2Tensor::Asymmetry Chi2Tensor::last_two_asymmetry() const {
  Asymmetry worst;
  const double scale = max_abs();
  if (scale == 0.0) return worst;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = j + 1; k < 3; ++k) {
        const double rel = std::abs((*this)(i, j, k) - (*this)(i, k, j)) / scale;
        if (rel > worst.relative) worst = {rel, i, j, k};
      }
    }
  }
  return worst;
}

void Chi2Tensor::validate_intrinsic_symmetry(double rel_tol) const {
  const Asymmetry a = last_two_asymmetry();
  if (a.relative > rel_tol) {
    throw ValidationError(
        "chi2 violates last-two-index symmetry: components (" +
        axis_name(a.i) + "," + axis_name(a.j) + "," + axis_name(a.k) +
        ") vs (" + axis_name(a.i) + "," + axis_name(a.k) + "," +
        axis_name(a.j) + ") differ by " + std::to_string(a.relative) +
        " relative (tolerance " + std::to_string(rel_tol) + ")");
  }
}

Chi2Tensor Chi2Tensor::scaled(double s) const {
  Chi2Tensor t = *this;
  for (double& v : t.values_) v *= s;
  return t;
}

Chi2Tensor rotate(const Chi2Tensor& chi2, const Eigen::Matrix3d& rotation,
                  double orthogonality_tol) {
  const double defect =
      (rotation * rotation.transpose() - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  if (defect > orthogonality_tol) {
    throw ValidationError("chi2 rotation matrix is not orthogonal (defect " +
                          std::to_string(defect) + ")");
  }
  Chi2Tensor out;
  out.set_kleinman_assumed(chi2.kleinman_assumed());
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        double acc = 0.0;
        for (int p = 0; p < 3; ++p) {
          for (int q = 0; q < 3; ++q) {
            for (int r = 0; r < 3; ++r) {
              acc += rotation(i, p) * rotation(j, q) * rotation(k, r) *
                     chi2(p, q, r);
            }
          }
        }
        out(i, j, k) = acc;
      }
    }
  }
  return out;
}

Chi2Tensor kleinman_symmetrize(const Chi2Tensor& chi2) {
  static constexpr int kPerm[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                      {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  Chi2Tensor out;
  out.set_kleinman_assumed(true);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        const int idx[3] = {i, j, k};
        double acc = 0.0;
        for (const auto& p : kPerm) {
          acc += chi2(idx[p[0]], idx[p[1]], idx[p[2]]);
        }
        out(i, j, k) = acc / 6.0;
      }
    }
  }
  return out;
}

}  // namespace spdc
