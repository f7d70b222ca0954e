#pragma once
#include "trapx/constants.hpp"
#include "trapx/errors.hpp"

namespace trapx {

struct AtomSpecies {
  double mass_kg;
  static AtomSpecies make(double mass_kg);
};

// Focused Gaussian beam; rayleigh_zR is derived, paraxial is recorded (never
// rejected: the trap formulas stay evaluable outside the paraxial regime).
struct BeamGeometry {
  double waist_w0;          // m, 1/e^2 intensity radius at focus
  double wavelength_lambda; // m
  double rayleigh_zR;       // m, pi w0^2 / lambda
  bool paraxial;            // w0 > 2 lambda / pi

  static BeamGeometry make(double waist_w0, double wavelength_lambda);
  double beam_width_sq(double z) const {  // w^2(z)
    double u = z / rayleigh_zR;
    return waist_w0 * waist_w0 * (1.0 + u * u);
  }
};

// Two-level red/blue-detuned dipole drive.  saturation_Isat is derived from
// the transition wavelength and lifetime; the saturation validity ratio
// I0/Isat is recorded, not enforced.
struct LaserDrive {
  double transition_lambda;  // m, transition wavelength (sets Gamma, Isat)
  double lifetime_tau;       // s
  double linewidth_Gamma;    // rad/s, 1/tau
  double detuning_delta;     // rad/s, signed (red < 0)
  double peak_intensity_I0;  // W/m^2
  double saturation_Isat;    // W/m^2
  double saturation_ratio;   // I0/Isat, diagnostic only

  static LaserDrive make(double transition_lambda, double lifetime_tau,
                         double detuning_delta, double peak_intensity_I0);
};

// Trap at one instant: depth_V0 >= 0 is the attractive well depth; a negative
// value is a flagged repulsive-transient state, propagated only under opt-in.
struct TrapSnapshot {
  double depth_V0;  // J
  BeamGeometry geometry;
  int azimuthal_nu = 0;
};

struct SeriesCoefficients {
  double c_r2;    // J/m^2
  double c_z2;    // J/m^2
  double c_r4;    // J/m^4
  double c_z4;    // J/m^4
  double c_r2z2;  // J/m^4
};

struct PhysicalMargins {
  double paraxial_ratio;  // w0 / (2 lambda / pi), > 1 means paraxial holds
  double gravity_ratio;   // g / (w0 omega_R^2), sag relative to waist
};

double rayleigh_range(double waist_w0, double wavelength_lambda);
double saturation_intensity(double wavelength_lambda, double lifetime_tau);

// Well depth with sign normalized so V0 >= 0 means attractive (red detuning).
// Blue detuning returns a negative (flagged) depth.  Zero detuning is singular.
double depth_from_laser(const LaserDrive& drive);

// V(r,z) = V0 - V0 exp(-2 r^2 / w^2(z)) / (1 + z^2/zR^2), in [0, V0].
double potential(double r, double z, const TrapSnapshot& snap);

// potential + hbar^2 (nu^2 - 1/4) / (2 m r^2); r must be > 0.
double effective_potential(double r, double z, const TrapSnapshot& snap,
                           const AtomSpecies& atom);

// Harmonic-depth link V0 = m omega_z^2 zR^2 / 2 and its inverse.
double v0_from_omega_z(double omega_z, const BeamGeometry& geom,
                       const AtomSpecies& atom);
// Signed variant used by trajectory evaluators: omega_z^2 < 0 is a repulsive
// transient and requires opt-in.
double v0_from_omega_z_sq(double omega_z_sq, const BeamGeometry& geom,
                          const AtomSpecies& atom, bool allow_repulsive = false);
double omega_z_from_v0(double v0, const BeamGeometry& geom,
                       const AtomSpecies& atom);

// omega_R = sqrt(2) pi (w0/lambda) omega_z, exact geometric link.
double omega_r_from_omega_z(double omega_z, const BeamGeometry& geom);

// Quartic expansion of V about the origin (r^2, z^2, r^4, z^4, r^2 z^2).
SeriesCoefficients series_coefficients(const TrapSnapshot& snap);

PhysicalMargins physical_margins(const BeamGeometry& geom, double omega_R,
                                 double g = kGravity);

}  // namespace trapx
