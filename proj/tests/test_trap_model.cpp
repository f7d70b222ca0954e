#include <doctest.h>

#include <cmath>

#include "trapx/constants.hpp"
#include "trapx/trap_model.hpp"

using namespace trapx;

namespace {
const AtomSpecies rb = AtomSpecies::make(kRb87MassKg);
const BeamGeometry w3 = BeamGeometry::make(3e-6, 1060e-9);
const BeamGeometry w10 = BeamGeometry::make(10e-6, 1060e-9);
}  // namespace

TEST_SUITE("trap_model") {

TEST_CASE("rayleigh range matches closed form and reference values") {
  CHECK(w3.rayleigh_zR == doctest::Approx(kPi * 9e-12 / 1060e-9).epsilon(1e-12));
  CHECK(w3.rayleigh_zR == doctest::Approx(2.6674e-5).epsilon(1e-3));
  CHECK(w10.rayleigh_zR == doctest::Approx(2.9644e-4).epsilon(1e-3));
  CHECK_THROWS_AS(rayleigh_range(-1e-6, 1060e-9), DomainError);
  CHECK_THROWS_AS(rayleigh_range(3e-6, 0.0), DomainError);
}

TEST_CASE("paraxial flag records w0 vs 2 lambda/pi without rejecting") {
  CHECK(w3.paraxial);
  auto tight = BeamGeometry::make(0.5e-6, 1060e-9);  // w0 < 2 lambda/pi
  CHECK(!tight.paraxial);
  CHECK(tight.rayleigh_zR > 0.0);  // still evaluable
}

TEST_CASE("saturation intensity: D2-line value and scaling laws") {
  double lam = 780.241e-9, tau = 26.24e-9;
  double isat = saturation_intensity(lam, tau);
  CHECK(isat == doctest::Approx(16.69).epsilon(2e-3));  // W/m^2, known line value
  CHECK(saturation_intensity(lam, 2 * tau) == doctest::Approx(isat / 2).epsilon(1e-12));
  CHECK(saturation_intensity(2 * lam, tau) == doctest::Approx(isat / 8).epsilon(1e-12));
}

TEST_CASE("dipole depth from a two-level drive reproduces the working trap") {
  double lam0 = 780.241e-9, tau = 26.24e-9;
  double lam_trap = 1060e-9, power = 30.0, w0 = 8e-6;
  double delta = 2 * kPi * kSpeedOfLight * (1 / lam_trap - 1 / lam0);
  REQUIRE(delta < 0.0);  // red detuned
  double I0 = 2 * power / (kPi * w0 * w0);
  auto drive = LaserDrive::make(lam0, tau, delta, I0);
  CHECK(drive.linewidth_Gamma == doctest::Approx(1.0 / tau).epsilon(1e-12));
  double V0 = depth_from_laser(drive);
  CHECK(V0 > 0.0);  // attractive by sign convention
  auto geom = BeamGeometry::make(w0, lam_trap);
  double fz = omega_z_from_v0(V0, geom, rb) / (2 * kPi);
  CHECK(fz > 2500.0 * 0.85);
  CHECK(fz < 2500.0 * 1.15);

  auto blue = LaserDrive::make(lam0, tau, -delta, I0);
  CHECK(depth_from_laser(blue) < 0.0);  // flagged repulsive state
  auto resonant = LaserDrive::make(lam0, tau, 0.0, I0);
  CHECK_THROWS_AS(depth_from_laser(resonant), DetuningError);
}

TEST_CASE("potential boundary values and range") {
  TrapSnapshot snap{1e-26, w3, 0};
  CHECK(potential(0, 0, snap) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(potential(1.0, 0, snap) == doctest::Approx(snap.depth_V0).epsilon(1e-12));
  CHECK(potential(0, w3.rayleigh_zR, snap) ==
        doctest::Approx(snap.depth_V0 / 2).epsilon(1e-12));
  for (double r : {0.0, 1e-6, 3e-6})
    for (double z : {0.0, 1e-5, 1e-4}) {
      double v = potential(r, z, snap);
      CHECK(v >= 0.0);
      CHECK(v <= snap.depth_V0);
    }
}

TEST_CASE("potential is monotone in r and |z|") {
  TrapSnapshot snap{2e-26, w10, 0};
  double prev = potential(0, 0, snap);
  for (int i = 1; i <= 40; ++i) {
    double v = potential(i * 0.5e-6, 0, snap);
    CHECK(v >= prev);
    prev = v;
  }
  prev = potential(1e-6, 0, snap);
  for (int i = 1; i <= 40; ++i) {
    double v = potential(1e-6, i * 2e-5, snap);
    CHECK(v >= prev);
    prev = v;
  }
}

TEST_CASE("harmonic curvatures from finite differences match the frequency map") {
  double omega_z = 2 * kPi * 2500.0;
  double V0 = v0_from_omega_z(omega_z, w3, rb);
  TrapSnapshot snap{V0, w3, 0};
  double h = 1e-4 * w3.waist_w0;
  double d2z = (potential(0, h, snap) - 2 * potential(0, 0, snap) +
                potential(0, -h, snap)) / (h * h);
  CHECK(d2z == doctest::Approx(rb.mass_kg * omega_z * omega_z).epsilon(1e-6));
  double omega_r = omega_r_from_omega_z(omega_z, w3);
  double d2r = (potential(h, 0, snap) - 2 * potential(0, 0, snap) +
                potential(-h, 0, snap)) / (h * h);
  CHECK(d2r == doctest::Approx(rb.mass_kg * omega_r * omega_r).epsilon(1e-6));
}

TEST_CASE("effective potential: centrifugal term exact, singular at axis") {
  TrapSnapshot nu0{1e-26, w3, 0};
  TrapSnapshot nu1{1e-26, w3, 1};
  double r = 0.7e-6, z = 3e-6;
  double base = potential(r, z, nu0);
  double c = kHbar * kHbar / (8 * rb.mass_kg * r * r);
  CHECK(effective_potential(r, z, nu0, rb) == doctest::Approx(base - c).epsilon(1e-12));
  CHECK(effective_potential(r, z, nu1, rb) == doctest::Approx(base + 3 * c).epsilon(1e-12));
  TrapSnapshot num1{1e-26, w3, -1};
  CHECK(effective_potential(r, z, num1, rb) ==
        doctest::Approx(effective_potential(r, z, nu1, rb)).epsilon(1e-15));
  // centrifugal part scales exactly as 1/r^2
  double d1 = effective_potential(1e-6, 0, nu1, rb) - potential(1e-6, 0, nu1);
  double d2 = effective_potential(2e-6, 0, nu1, rb) - potential(2e-6, 0, nu1);
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(1e-12));
  // negligible far out
  CHECK(std::abs(effective_potential(0.3, 0, nu1, rb) - potential(0.3, 0, nu1)) <
        1e-12 * nu1.depth_V0);
  CHECK_THROWS_AS(effective_potential(0.0, 0, nu0, rb), DomainError);
}

TEST_CASE("depth-frequency link: reference value and exact round trip") {
  double omega_z = 2 * kPi * 2500.0;
  double V0 = v0_from_omega_z(omega_z, w3, rb);
  CHECK(V0 == doctest::Approx(1.2668e-26).epsilon(1e-4));
  CHECK(omega_z_from_v0(V0, w3, rb) == doctest::Approx(omega_z).epsilon(1e-12));
  CHECK_THROWS_AS(v0_from_omega_z_sq(-1.0, w3, rb), AttractivityError);
  CHECK(v0_from_omega_z_sq(-1.0, w3, rb, true) < 0.0);
}

TEST_CASE("radial-longitudinal frequency ratio is sqrt(2) pi w0/lambda") {
  double omega_z = 2 * kPi * 2500.0;
  CHECK(omega_r_from_omega_z(omega_z, w3) / omega_z ==
        doctest::Approx(12.574).epsilon(1e-4));
  CHECK(omega_r_from_omega_z(omega_z, w10) / omega_z ==
        doctest::Approx(41.914).epsilon(1e-4));
  // exact linearity
  CHECK(omega_r_from_omega_z(2 * omega_z, w3) ==
        doctest::Approx(2 * omega_r_from_omega_z(omega_z, w3)).epsilon(1e-15));
  auto iso = BeamGeometry::make(1060e-9 / (std::sqrt(2.0) * kPi), 1060e-9);
  CHECK(omega_r_from_omega_z(omega_z, iso) == doctest::Approx(omega_z).epsilon(1e-12));
}

TEST_CASE("quartic series coefficients match finite differences of the potential") {
  double V0 = v0_from_omega_z(2 * kPi * 2500.0, w3, rb);
  TrapSnapshot snap{V0, w3, 0};
  auto c = series_coefficients(snap);
  double w02 = w3.waist_w0 * w3.waist_w0, zR2 = w3.rayleigh_zR * w3.rayleigh_zR;
  CHECK(c.c_r2 == doctest::Approx(2 * V0 / w02).epsilon(1e-12));
  CHECK(c.c_z2 == doctest::Approx(V0 / zR2).epsilon(1e-12));
  CHECK(c.c_r4 == doctest::Approx(-2 * V0 / (w02 * w02)).epsilon(1e-12));
  CHECK(c.c_z4 == doctest::Approx(-V0 / (zR2 * zR2)).epsilon(1e-12));
  double h = 1e-4 * w3.waist_w0, k = 1e-4 * w3.rayleigh_zR;
  double cross = (potential(h, k, snap) - potential(h, 0, snap) -
                  potential(0, k, snap) + potential(0, 0, snap)) / (h * h * k * k);
  CHECK(c.c_r2z2 == doctest::Approx(cross).epsilon(1e-6));
  // series reproduces the potential near the origin
  double r = 0.02 * w3.waist_w0, z = 0.02 * w3.rayleigh_zR;
  double series = c.c_r2 * r * r + c.c_z2 * z * z + c.c_r4 * r * r * r * r +
                  c.c_z4 * z * z * z * z + c.c_r2z2 * r * r * z * z;
  CHECK(series == doctest::Approx(potential(r, z, snap)).epsilon(1e-5));
}

TEST_CASE("physical margins: paraxial boundary and gravity ratio") {
  auto edge = BeamGeometry::make(2 * 1060e-9 / kPi, 1060e-9);
  CHECK(physical_margins(edge, 1.0).paraxial_ratio == doctest::Approx(1.0).epsilon(1e-12));
  double omega_r = omega_r_from_omega_z(2 * kPi * 2500.0, w3);
  CHECK(physical_margins(w3, omega_r).gravity_ratio ==
        doctest::Approx(8.4e-5).epsilon(2e-2));
}

}  // TEST_SUITE
