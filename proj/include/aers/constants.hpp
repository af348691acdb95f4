#pragma once

#include <numbers>

namespace aers::si {

// CODATA 2018.
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double c = 299792458.0;                 // m/s
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double epsilon0 = 8.8541878128e-12;     // F/m
inline constexpr double mu0 = 1.25663706212e-6;          // N/A^2
inline constexpr double k_B = 1.380649e-23;              // J/K
inline constexpr double e_charge = 1.602176634e-19;      // C
inline constexpr double debye = 3.33564095198152e-30;    // C m

// Unit helpers used by the scenario layer and the reports.
inline constexpr double nm = 1e-9;
inline constexpr double um = 1e-6;
inline constexpr double uw_per_um2 = 1e-6 / 1e-12;       // W/m^2 per uW/um^2

inline constexpr double hz_to_rad(double hz) { return two_pi * hz; }
inline constexpr double rad_to_hz(double rad) { return rad / two_pi; }
inline constexpr double joule_to_ev(double j) { return j / e_charge; }

}  // namespace aers::si
