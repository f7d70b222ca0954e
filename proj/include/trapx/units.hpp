#pragma once
#include <cmath>

#include "trapx/constants.hpp"

namespace trapx {

// Nondimensionalization: hbar = m = 1, time in 1/omega_ref, length in
// sqrt(hbar/(m omega_ref)), energy in hbar*omega_ref.  Used for manifest
// reporting and round-trip checks; the solvers themselves form only
// dimensionless phase combinations, so they take SI directly.
struct TrapUnits {
  double omega_ref;  // rad/s
  double mass_kg;

  double length_m() const { return std::sqrt(kHbar / (mass_kg * omega_ref)); }
  double time_s() const { return 1.0 / omega_ref; }
  double energy_J() const { return kHbar * omega_ref; }

  double to_trap_length(double x_m) const { return x_m / length_m(); }
  double to_trap_time(double t_s) const { return t_s / time_s(); }
  double to_trap_energy(double e_J) const { return e_J / energy_J(); }
  double from_trap_length(double x) const { return x * length_m(); }
  double from_trap_time(double t) const { return t * time_s(); }
  double from_trap_energy(double e) const { return e * energy_J(); }
};

}  // namespace trapx
