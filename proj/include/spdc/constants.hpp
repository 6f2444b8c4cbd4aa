#pragma once

// Physical constants pinned to CODATA 2018 exact values so results are
// bit-reproducible across builds and platforms.
namespace spdc::constants {

inline constexpr double pi = 3.14159265358979323846;

inline constexpr double c_m_per_s = 299792458.0;
inline constexpr double eps0_f_per_m = 8.8541878128e-12;
inline constexpr double planck_j_s = 6.62607015e-34;
inline constexpr double elementary_charge_c = 1.602176634e-19;

// h*c expressed in eV*nm; photon energy E[eV] = hc_ev_nm / lambda[nm].
inline constexpr double hc_ev_nm =
    1e9 * planck_j_s * c_m_per_s / elementary_charge_c;

// Unit-system variants used by the dispersion / pair-property kernels.
inline constexpr double c_mm_per_fs = c_m_per_s * 1e-12;  // 2.99792458e-4
inline constexpr double c_nm_per_fs = c_m_per_s * 1e-6;   // 299.792458

}  // namespace spdc::constants
