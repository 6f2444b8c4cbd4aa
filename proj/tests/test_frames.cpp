#include <doctest.h>

#include <Eigen/Geometry>
#include <random>

#include "spdc/errors.hpp"
#include "spdc/frames.hpp"

using namespace spdc;

TEST_CASE("isotropic diagonal tensor gives equal indices and identity frame") {
  const auto [indices, frame] = principal_refractive_indices(
      Eigen::Vector3d(2.25, 2.25, 2.25).asDiagonal(), 1064.0);
  CHECK(indices.n_x == doctest::Approx(1.5));
  CHECK(indices.n_y == doctest::Approx(1.5));
  CHECK(indices.n_z == doctest::Approx(1.5));
  CHECK(frame.rotation.isApprox(Eigen::Matrix3d::Identity(), 1e-14));
}

TEST_CASE("diagonal tensor sorts into ascending indices with the permutation recorded") {
  const auto [indices, frame] = principal_refractive_indices(
      Eigen::Vector3d(2.89, 2.25, 4.0).asDiagonal(), 1064.0);
  CHECK(indices.n_x == doctest::Approx(1.5));
  CHECK(indices.n_y == doctest::Approx(1.7));
  CHECK(indices.n_z == doctest::Approx(2.0));
  CHECK(frame.permutation == std::array<int, 3>{1, 0, 2});
  CHECK(frame.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rotated tensor recovers the same index triple") {
  const Eigen::Matrix3d r =
      Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized())
          .toRotationMatrix();
  const Eigen::Matrix3d eps =
      r * Eigen::Vector3d(2.25, 2.89, 4.0).asDiagonal().toDenseMatrix() *
      r.transpose();
  const auto [indices, frame] = principal_refractive_indices(eps, 1064.0);
  CHECK(indices.n_x == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(indices.n_y == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(indices.n_z == doctest::Approx(2.0).epsilon(1e-12));
  // The returned frame diagonalizes eps with ascending entries.
  const Eigen::Matrix3d diag = frame.rotation * eps * frame.rotation.transpose();
  CHECK(std::abs(diag(0, 0) - 2.25) < 1e-12);
  CHECK(std::abs(diag(1, 1) - 2.89) < 1e-12);
  CHECK(std::abs(diag(2, 2) - 4.0) < 1e-12);
  const double off = std::max({std::abs(diag(0, 1)), std::abs(diag(0, 2)),
                               std::abs(diag(1, 2))});
  CHECK(off / eps.norm() < 1e-10);
  CHECK(frame.rotation.determinant() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eigen-decomposition residual stays below 1e-10 on random tensors") {
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> eig(1.2, 9.0);
  std::uniform_real_distribution<double> comp(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Vector3d axis =
        Eigen::Vector3d(comp(rng), comp(rng), comp(rng)).normalized();
    const Eigen::Matrix3d r =
        Eigen::AngleAxisd(comp(rng) * 3.0, axis).toRotationMatrix();
    const Eigen::Matrix3d eps =
        r * Eigen::Vector3d(eig(rng), eig(rng), eig(rng))
                .asDiagonal()
                .toDenseMatrix() *
        r.transpose();
    const auto [indices, frame] = principal_refractive_indices(eps, 1064.0);
    const Eigen::Matrix3d diag =
        frame.rotation * eps * frame.rotation.transpose();
    Eigen::Matrix3d off = diag;
    off.diagonal().setZero();
    CHECK(off.norm() / eps.norm() < 1e-10);
    CHECK(indices.n_x <= indices.n_y);
    CHECK(indices.n_y <= indices.n_z);
    // Twice-composed with its inverse: identity.
    const Eigen::Matrix3d round_trip =
        frame.rotation.transpose() * frame.rotation;
    CHECK(round_trip.isApprox(Eigen::Matrix3d::Identity(), 1e-12));
  }
}

TEST_CASE("non-positive dielectric eigenvalue is rejected as non-physical") {
  CHECK_THROWS_AS(principal_refractive_indices(
                      Eigen::Vector3d(2.25, -1.0, 4.0).asDiagonal(), 1064.0),
                  NumericsError);
}

TEST_CASE("diagonal-entries rule ignores off-diagonal elements") {
  Eigen::Matrix3d eps = Eigen::Vector3d(2.25, 2.89, 4.0).asDiagonal();
  eps(0, 1) = eps(1, 0) = 0.2;
  const auto [indices, frame] = principal_refractive_indices(
      eps, 1064.0, IndexRule::diagonal_entries);
  CHECK(indices.n_x == doctest::Approx(1.5));
  CHECK(frame.rule == "diagonal-entries");
  const auto [eig_indices, eig_frame] = principal_refractive_indices(eps, 1064.0);
  CHECK(eig_frame.rule == "eigen-decomposition");
  CHECK(eig_indices.n_x != doctest::Approx(1.5).epsilon(1e-6));
}

TEST_CASE("optic classification matches the documented examples") {
  CHECK(classify_optic({1.5, 1.5, 1.7, 0}).kind == OpticKind::uniaxial);
  CHECK(classify_optic({1.5, 1.5, 1.7, 0}).sign == OpticSign::positive);
  CHECK(classify_optic({1.5, 1.6, 1.7, 0}).kind == OpticKind::biaxial);
  CHECK(classify_optic({1.5, 1.5, 1.5, 0}).kind == OpticKind::isotropic);
  CHECK(classify_optic({1.5, 1.5, 1.5, 0}).sign == OpticSign::not_applicable);
  // Negative uniaxial: the distinct index is the smaller one.
  CHECK(classify_optic({1.4, 1.6, 1.6, 0}).sign == OpticSign::negative);
}

TEST_CASE("classification is stable under sub-tolerance perturbations") {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> base(1.3, 2.2);
  std::uniform_real_distribution<double> sign(-1.0, 1.0);
  const double tol = 1e-4;
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    // Generate triples away from the classification boundary: pairs are
    // either clearly equal (< 0.5 tol apart) or clearly distinct (> 4 tol).
    double n[3];
    n[0] = base(rng);
    for (int i = 1; i < 3; ++i) {
      if (sign(rng) > 0.0) {
        n[i] = n[i - 1] * (1.0 + 0.3 * tol * sign(rng));
      } else {
        n[i] = n[i - 1] * (1.0 + 8.0 * tol * (1.0 + std::abs(sign(rng))));
      }
    }
    bool boundary = false;
    for (int i = 0; i < 3; ++i) {
      for (int j = i + 1; j < 3; ++j) {
        const double gap = std::abs(n[i] - n[j]) / std::max(n[i], n[j]);
        if (gap > 0.6 * tol && gap < 3.0 * tol) boundary = true;
      }
    }
    if (boundary) continue;
    ++checked;
    const OpticClass reference = classify_optic({n[0], n[1], n[2], 0}, tol);
    for (int rep = 0; rep < 5; ++rep) {
      PrincipalIndices perturbed{n[0], n[1], n[2], 0};
      perturbed.n_x *= 1.0 + 0.1 * tol * sign(rng);
      perturbed.n_y *= 1.0 + 0.1 * tol * sign(rng);
      perturbed.n_z *= 1.0 + 0.1 * tol * sign(rng);
      CHECK(classify_optic(perturbed, tol).kind == reference.kind);
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("biaxial frame assignment sorts axes ascending") {
  SUBCASE("largest on a") {
    const FrameAssignment f = assign_biaxial_frame({1.7, 1.5, 1.6});
    CHECK(f.permutation == std::array<int, 3>{1, 2, 0});  // X<-b, Y<-c, Z<-a
    CHECK(f.rotation.determinant() == doctest::Approx(1.0));
  }
  SUBCASE("largest on b (X,Y,Z <- a,c,b)") {
    const FrameAssignment f = assign_biaxial_frame({1.5, 1.7, 1.6});
    CHECK(f.permutation == std::array<int, 3>{0, 2, 1});
    CHECK(f.rotation.determinant() == doctest::Approx(1.0));
  }
  SUBCASE("already sorted is the identity") {
    const FrameAssignment f = assign_biaxial_frame({1.5, 1.6, 1.7});
    CHECK(f.permutation == std::array<int, 3>{0, 1, 2});
    CHECK(f.rotation.isApprox(Eigen::Matrix3d::Identity(), 1e-15));
  }
  SUBCASE("frame applied to the dielectric diagonal is ascending") {
    const std::array<double, 3> n = {1.7, 1.5, 1.6};
    const FrameAssignment f = assign_biaxial_frame(n);
    const Eigen::Matrix3d eps =
        Eigen::Vector3d(n[0] * n[0], n[1] * n[1], n[2] * n[2]).asDiagonal();
    const Eigen::Matrix3d diag = f.rotation * eps * f.rotation.transpose();
    CHECK(diag(0, 0) <= diag(1, 1));
    CHECK(diag(1, 1) <= diag(2, 2));
  }
  SUBCASE("uniaxial input violates the contract") {
    CHECK_THROWS_AS(assign_biaxial_frame({1.5, 1.5, 1.7}), ContractError);
  }
}

TEST_CASE("uniaxial frame assignment puts the distinct index on Z") {
  SUBCASE("distinct already on c") {
    const FrameAssignment f = assign_uniaxial_frame({1.6, 1.6, 1.5});
    CHECK(f.permutation == std::array<int, 3>{0, 1, 2});
  }
  SUBCASE("distinct on a") {
    const FrameAssignment f = assign_uniaxial_frame({1.5, 1.6, 1.6});
    CHECK(f.permutation[2] == 0);
    CHECK(f.rotation.determinant() == doctest::Approx(1.0));
  }
  SUBCASE("biaxial input violates the contract") {
    CHECK_THROWS_AS(assign_uniaxial_frame({1.5, 1.6, 1.7}), ContractError);
  }
}

TEST_CASE("birefringence is the non-negative index spread") {
  CHECK(birefringence({1.4, 1.5, 1.6, 0}) == doctest::Approx(0.2));
  CHECK(birefringence({1.5, 1.5, 1.5, 0}) == 0.0);
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> dist(1.2, 2.4);
  for (int i = 0; i < 100; ++i) {
    const PrincipalIndices n{dist(rng), dist(rng), dist(rng), 0};
    CHECK(birefringence(n) >= 0.0);
  }
}
