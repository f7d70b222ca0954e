#include "trapx/trap_model.hpp"

#include <cmath>

namespace trapx {

AtomSpecies AtomSpecies::make(double mass_kg) {
  if (!(mass_kg > 0.0)) throw DomainError("atom mass must be positive");
  return {mass_kg};
}

BeamGeometry BeamGeometry::make(double waist_w0, double wavelength_lambda) {
  double zR = rayleigh_range(waist_w0, wavelength_lambda);
  bool paraxial = waist_w0 > 2.0 * wavelength_lambda / kPi;
  return {waist_w0, wavelength_lambda, zR, paraxial};
}

LaserDrive LaserDrive::make(double transition_lambda, double lifetime_tau,
                            double detuning_delta, double peak_intensity_I0) {
  if (!(transition_lambda > 0.0) || !(lifetime_tau > 0.0))
    throw DomainError("laser drive needs positive wavelength and lifetime");
  double Isat = saturation_intensity(transition_lambda, lifetime_tau);
  return {transition_lambda, lifetime_tau,       1.0 / lifetime_tau,
          detuning_delta,    peak_intensity_I0,  Isat,
          peak_intensity_I0 / Isat};
}

double rayleigh_range(double waist_w0, double wavelength_lambda) {
  if (!(waist_w0 > 0.0) || !(wavelength_lambda > 0.0))
    throw DomainError("rayleigh_range needs positive waist and wavelength");
  return kPi * waist_w0 * waist_w0 / wavelength_lambda;
}

double saturation_intensity(double wavelength_lambda, double lifetime_tau) {
  if (!(wavelength_lambda > 0.0) || !(lifetime_tau > 0.0))
    throw DomainError("saturation_intensity needs positive inputs");
  double l3 = wavelength_lambda * wavelength_lambda * wavelength_lambda;
  return kPi * kPlanck * kSpeedOfLight / (3.0 * l3 * lifetime_tau);
}

double depth_from_laser(const LaserDrive& drive) {
  if (drive.detuning_delta == 0.0)
    throw DetuningError("depth is singular at zero detuning");
  double g2 = drive.linewidth_Gamma * drive.linewidth_Gamma;
  double raw = drive.peak_intensity_I0 * kHbar * g2 /
               (8.0 * drive.detuning_delta * drive.saturation_Isat);
  return -raw;  // red detuning (delta < 0) -> positive attractive depth
}

double potential(double r, double z, const TrapSnapshot& snap) {
  const BeamGeometry& g = snap.geometry;
  double u = z / g.rayleigh_zR;
  double axial = 1.0 + u * u;
  double w2 = g.waist_w0 * g.waist_w0 * axial;
  return snap.depth_V0 * (1.0 - std::exp(-2.0 * r * r / w2) / axial);
}

double effective_potential(double r, double z, const TrapSnapshot& snap,
                           const AtomSpecies& atom) {
  if (!(r > 0.0)) throw DomainError("effective potential is singular at r = 0");
  double nu2 = double(snap.azimuthal_nu) * double(snap.azimuthal_nu);
  double centrifugal =
      kHbar * kHbar * (nu2 - 0.25) / (2.0 * atom.mass_kg * r * r);
  return potential(r, z, snap) + centrifugal;
}

double v0_from_omega_z(double omega_z, const BeamGeometry& geom,
                       const AtomSpecies& atom) {
  if (!(omega_z >= 0.0)) throw DomainError("omega_z must be non-negative");
  return v0_from_omega_z_sq(omega_z * omega_z, geom, atom, false);
}

double v0_from_omega_z_sq(double omega_z_sq, const BeamGeometry& geom,
                          const AtomSpecies& atom, bool allow_repulsive) {
  if (omega_z_sq < 0.0 && !allow_repulsive)
    throw AttractivityError(
        "negative omega_z^2 (repulsive trap) without repulsive opt-in");
  return atom.mass_kg * omega_z_sq * geom.rayleigh_zR * geom.rayleigh_zR / 2.0;
}

double omega_z_from_v0(double v0, const BeamGeometry& geom,
                       const AtomSpecies& atom) {
  if (!(v0 >= 0.0)) throw AttractivityError("negative depth has no real omega_z");
  return std::sqrt(2.0 * v0 / atom.mass_kg) / geom.rayleigh_zR;
}

double omega_r_from_omega_z(double omega_z, const BeamGeometry& geom) {
  return std::sqrt(2.0) * kPi * (geom.waist_w0 / geom.wavelength_lambda) *
         omega_z;
}

SeriesCoefficients series_coefficients(const TrapSnapshot& snap) {
  double V0 = snap.depth_V0;
  double w0 = snap.geometry.waist_w0;
  double zR = snap.geometry.rayleigh_zR;
  double w02 = w0 * w0, zR2 = zR * zR;
  return {2.0 * V0 / w02, V0 / zR2, -2.0 * V0 / (w02 * w02), -V0 / (zR2 * zR2),
          -4.0 * V0 / (w02 * zR2)};
}

PhysicalMargins physical_margins(const BeamGeometry& geom, double omega_R,
                                 double g) {
  double paraxial = geom.waist_w0 / (2.0 * geom.wavelength_lambda / kPi);
  double gravity = g / (geom.waist_w0 * omega_R * omega_R);
  return {paraxial, gravity};
}

}  // namespace trapx
