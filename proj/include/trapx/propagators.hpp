#pragma once
#include <functional>
#include <vector>

#include "trapx/spectral.hpp"

namespace trapx {

enum class Scheme { split_operator_z, crank_nicolson_r, adi_2d };
enum class PotentialForm { full, harmonic };

// Observers fire at t = 0, every snapshot_stride-th step, and at t_f.
using Observer1D = std::function<void(double t, const Wavefunction1D&)>;
using Observer2D = std::function<void(double t, const Wavefunction2D&)>;

// One propagation job.  Only the grids matching the scheme's axes are used.
// dt_request = 0 picks the default (2 pi / omega_max)/200; any request is
// clamped to the stability/accuracy cap (2 pi / omega_max)/50, where
// omega_max is the largest instantaneous |omega| over the plan's axes.
struct PropagationPlan {
  FrequencyTrajectory trajectory;
  Scheme scheme;
  PotentialForm form = PotentialForm::full;
  Grid1D grid_z{};
  Grid1D grid_r{};
  double dt_request = 0.0;
  int snapshot_stride = 0;
  Observer1D observer_1d = {};
  Observer2D observer_2d = {};
};

// Breakpoint-aligned step times: strictly increasing, front() = 0,
// back() = t_f, every trajectory breakpoint on a step boundary, per-segment
// uniform dt <= the cap.
std::vector<double> step_schedule(const FrequencyTrajectory& traj,
                                  bool radial_axis, double dt_request);

struct PropagationResult1D {
  Wavefunction1D final;
  double norm_final, norm_min;
  double boundary_leak_max;  // max over time of edge-cell probability
};
struct PropagationResult2D {
  Wavefunction2D final;
  double norm_final, norm_min;
  double boundary_leak_max;
};

// Strang-split Fourier step exp(-iV dt/2h) exp(-iT dt/h) exp(-iV dt/2h),
// V at the step midpoint.  Throws DomainError when edge probability
// exceeds 1e-6 (grid too small).
PropagationResult1D propagate_longitudinal(const Wavefunction1D& initial,
                                           const PropagationPlan& plan);

// Unitary Cayley Crank-Nicolson on the sqrt(r)-reduced wavefunction with
// Dirichlet zero at r = 0 and at the outer wall.
PropagationResult1D propagate_radial(const Wavefunction1D& initial,
                                     const PropagationPlan& plan, int nu);

// Alternating-direction implicit step C_r(dt/2) C_z(dt) C_r(dt/2); each
// factor is a Cayley half/full step carrying half the midpoint potential,
// so every factor (and the product) is exactly unitary.
PropagationResult2D propagate_3d(const Wavefunction2D& initial,
                                 const PropagationPlan& plan, int nu);

// |<a|b>| on identical grids.
double fidelity(const Wavefunction1D& a, const Wavefunction1D& b);
double fidelity(const Wavefunction2D& a, const Wavefunction2D& b);

struct FidelityReport {
  double fidelity;  // in [0, 1 + 1e-9]
  double norm_final, norm_min;
  double boundary_leak_max;
};
FidelityReport fidelity_report(const PropagationResult1D& run,
                               const Wavefunction1D& target);
FidelityReport fidelity_report(const PropagationResult2D& run,
                               const Wavefunction2D& target);

// Ground state of the static trap by imaginary-time backward-Euler ADI
// relaxation (coarse-to-fine step continuation), seeded with the product of
// 1D numeric eigenstates of the axis cuts.
// Stops once the energy change per sweep is below 1e-10 hbar omega_ref
// (twice in a row); ConvergenceError if that never happens.
Wavefunction2D ground_state_2d(const TrapSnapshot& snap,
                               const AtomSpecies& atom, const Grid1D& grid_r,
                               const Grid1D& grid_z, int nu, double omega_ref);

double energy_expectation_2d(const Wavefunction2D& psi,
                             const std::function<double(double, double)>& V_rz,
                             const AtomSpecies& atom, int nu);

}  // namespace trapx
