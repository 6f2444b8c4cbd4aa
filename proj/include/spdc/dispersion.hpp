#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spdc/errors.hpp"

namespace spdc {

struct WavelengthRange {
  double min_nm = 0.0;
  double max_nm = 0.0;
  bool contains(double lambda_nm) const {
    return lambda_nm >= min_nm && lambda_nm <= max_nm;
  }
};

/// Coefficients of n^2(lambda) = A + sum_i B_i lambda^2/(lambda^2 - C_i)
///                               - D lambda^2
/// with lambda in micrometres inside the closed form (the published
/// convention for Sellmeier tables); C_i in um^2, D in um^-2.
struct SellmeierCoefficients {
  double a = 1.0;
  std::vector<double> b;
  std::vector<double> c;
  double d = 0.0;
};

/// Closed-form evaluation, templated so tests can re-evaluate the same
/// expression at extended precision.
template <typename Scalar>
Scalar sellmeier_n2(const SellmeierCoefficients& s, Scalar lambda_um) {
  const Scalar l2 = lambda_um * lambda_um;
  Scalar n2 = static_cast<Scalar>(s.a) - static_cast<Scalar>(s.d) * l2;
  for (std::size_t i = 0; i < s.b.size(); ++i) {
    n2 += static_cast<Scalar>(s.b[i]) * l2 / (l2 - static_cast<Scalar>(s.c[i]));
  }
  return n2;
}

/// Strictly increasing wavelength grid with sampled indices.
struct TableData {
  std::vector<double> wavelength_nm;
  std::vector<double> index;
};

/// Refractive index versus wavelength for one principal axis. Evaluation
/// outside the validity window is an error, never an extrapolation.
class DispersionModel {
 public:
  enum class Form { sellmeier, table };

  /// Dispersionless placeholder (n = 1, no validity window).
  DispersionModel() = default;

  static DispersionModel sellmeier(SellmeierCoefficients coeffs,
                                   std::optional<WavelengthRange> range = {});
  static DispersionModel table(TableData data,
                               std::optional<WavelengthRange> range = {});

  Form form() const { return form_; }
  bool has_range() const { return range_.has_value(); }
  const WavelengthRange& range() const;

  /// Copy with the validity window replaced; validates that every Sellmeier
  /// pole stays outside the window and that a table covers it.
  DispersionModel with_range(const WavelengthRange& range) const;

  double index_at(double lambda_nm) const;
  double dn_dlambda(double lambda_nm) const;    // per nm
  double d2n_dlambda2(double lambda_nm) const;  // per nm^2

  const SellmeierCoefficients& coefficients() const;
  const TableData& table_data() const;

  /// Free-form origin note, serialized as provenance in record files.
  std::string provenance;
  std::optional<double> fit_residual;

 private:
  void check_range(double lambda_nm) const;
  void check_stencil(double lambda_nm, double h_nm) const;

  Form form_ = Form::sellmeier;
  SellmeierCoefficients coeffs_;
  TableData table_;
  std::vector<double> tangents_;  // monotone-cubic Hermite tangents
  std::optional<WavelengthRange> range_;
};

/// Spec'd entry point; identical to model.index_at.
double eval_index(const DispersionModel& model, double lambda_nm);

struct GroupQuantities {
  double n = 0.0;
  double n_g = 0.0;              // group index n - lambda dn/dlambda
  double u_mm_per_fs = 0.0;      // group velocity c / n_g
  double kappa_fs2_per_mm = 0.0; // GVD d^2k/domega^2
};

GroupQuantities group_quantities(const DispersionModel& model,
                                 double lambda_nm);

/// Any index-versus-wavelength curve (e.g. a branch-resolved effective index
/// along a fixed propagation direction).
using IndexCurve = std::function<double(double lambda_nm)>;

/// Group quantities of an arbitrary curve via 5-point centered differences
/// with step h = lambda * rel_step.
GroupQuantities group_quantities_of(const IndexCurve& curve, double lambda_nm,
                                    double rel_step = 1e-4);

/// Group-velocity mismatch 1/u_first - 1/u_second in fs/mm. Swapping the
/// two roles flips the sign exactly.
double gvm_fs_per_mm(const GroupQuantities& first,
                     const GroupQuantities& second);

/// Half-maximum argument of sinc^2: the root x* of sinc^2(x) = 1/2,
/// located by bisection (~1.3915573).
double sinc_sq_half_max_argument();

/// FWHM in signal wavelength of sinc^2(kappa nu^2 L / 2) about degeneracy,
/// where nu is the angular-frequency detuning from lambda_s. Throws
/// NumericsError when kappa == 0 (bandwidth unbounded under the quadratic
/// mismatch model).
double acceptance_bandwidth_fwhm_nm(double kappa_fs2_per_mm, double length_mm,
                                    double lambda_s_nm);

struct EpsilonSample {
  double wavelength_nm = 0.0;
  double epsilon = 0.0;  // n^2
};

struct SellmeierFitResult {
  DispersionModel model;
  double max_rel_residual = 0.0;  // on n, over the input samples
};

/// Least-squares Sellmeier fit in n^2: linear solve for (A, B_i, D) nested
/// inside a Levenberg-Marquardt refinement of the pole positions C_i.
/// Throws ValidationError when underdetermined, NumericsError when the
/// residual stays above `residual_threshold`.
SellmeierFitResult fit_sellmeier(const std::vector<EpsilonSample>& samples,
                                 int n_terms = 2,
                                 std::optional<WavelengthRange> range = {},
                                 double residual_threshold = 1e-3);

}  // namespace spdc
