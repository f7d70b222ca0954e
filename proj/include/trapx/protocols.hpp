#pragma once
#include <functional>
#include <vector>

#include "trapx/trap_model.hpp"

namespace trapx {

// One expansion job: ramp the longitudinal frequency omega0_z -> omegaf_z in
// t_final.  gamma = sqrt(omega0/omegaf) is the width-expansion factor.
struct ExpansionTask {
  double omega0_z;  // rad/s
  double omegaf_z;  // rad/s
  double t_final;   // s
  double gamma;
  AtomSpecies atom;
  BeamGeometry geometry;
  bool allow_repulsive = false;

  static ExpansionTask make(double omega0_z, double omegaf_z, double t_final,
                            const AtomSpecies& atom, const BeamGeometry& geom,
                            bool allow_repulsive = false);
  ExpansionTask with_t_final(double t) const;
};

enum class ScalingKind { quintic, constant_frequency, optimal_bound, custom };

struct ScalingDerivs {
  double b, db, d2b, d3b;  // derivatives w.r.t. s
};

// Width scaling b on s in [0,1]; time mapping t = s * domain_T.
struct ScalingFunction {
  ScalingKind kind;
  double domain_T;  // s
  std::function<ScalingDerivs(double)> eval;
};

enum class ProtocolKind { invariant, bang_bang, fast_adiabatic };

// Designed control: evaluators in SI, shareable and pure.  omega_z_sq is
// signed; negative values (transient repulsive trap) exist only behind the
// task's opt-in.
struct FrequencyTrajectory {
  ProtocolKind protocol;
  double t_f;
  double omega0_z, omegaf_z;
  AtomSpecies atom;
  BeamGeometry geometry;
  std::vector<double> breakpoints;  // jump times (bang-bang: {0, t_f})
  std::function<double(double)> omega_z_sq;      // rad^2/s^2, signed
  std::function<double(double)> omega_z_sq_dot;  // analytic time derivative
  double min_omega_sq = 0.0;

  double omega_z(double t) const;
  double radial_ratio() const;           // sqrt(2) pi w0 / lambda
  double omega_r(double t) const;        // ratio * omega_z
  double omega_r_sq(double t) const;     // ratio^2 * omega_z_sq (signed)
  double v0(double t) const;             // J, signed with omega_z_sq
};

ScalingFunction quintic_scaling(const ExpansionTask& task);
// b(t) for holding a constant frequency omega1 starting from equilibrium at
// omega0; parameterized on s in [0,1] with domain_T = pi/(2 omega1).
ScalingFunction constant_frequency_scaling(double omega0, double omega1);

// Ermakov inversion omega^2(t) = omega0^2/b^4 - bdd/b for an s-parameterized
// scaling; throws AttractivityError on negative omega^2 without opt-in.
FrequencyTrajectory omega_from_scaling(const ScalingFunction& b,
                                       const ExpansionTask& task);
FrequencyTrajectory bang_bang(const ExpansionTask& task);
FrequencyTrajectory fast_adiabatic(const ExpansionTask& task);
FrequencyTrajectory make_trajectory(ProtocolKind kind, const ExpansionTask& task);

// Quarter period of the radial intermediate frequency; the radial analog of
// the bang-bang duration, reported as a mismatch diagnostic.
double bang_bang_radial_tf(const ExpansionTask& task);

// Smallest t_f keeping the designed omega^2 non-negative (bisection, 1e-6 rel).
double min_attractive_tf(const ExpansionTask& shape, ScalingKind kind);

enum class Direction { longitudinal, radial };
struct AdiabaticityReport {
  double max_margin;
  bool jump_flag;  // breakpoint jumps are non-adiabatic, not assigned a number
};
AdiabaticityReport adiabaticity_margin(const FrequencyTrajectory& traj,
                                       Direction dir);

}  // namespace trapx
