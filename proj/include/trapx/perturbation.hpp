#pragma once
#include <complex>

#include "trapx/protocols.hpp"
#include "trapx/trap_model.hpp"

namespace trapx {

// Anharmonic perturbation theory on top of the exactly-solved harmonic
// scaling dynamics.  Longitudinal: the quartic beam-axis term
// -m omega_z^2(t) z^4 / (2 zR^2) treated to first and second order in the
// expanding-mode basis.  Radial: first-order adiabatic perturbation theory
// for the instantaneous-frequency follow error.
struct PerturbationContext {
  ExpansionTask task;
  ScalingFunction scaling;
  BeamGeometry geometry;
  int level_n = 0;

  static PerturbationContext make(const ExpansionTask& task,
                                  const ScalingFunction& scaling, int level_n);
};

// <z^4> in the n-th expanding mode: (hbar/(m omega0))^2 (3 b^4 / 4)
// [(n+1)^2 + n^2].  Units m^4.
double z4_matrix_element(int n, double b, double omega0,
                         const AtomSpecies& atom);

// Diagonal first-order amplitude
//   f_nn = (i m / (2 hbar zR^2)) \int_0^{t_f} omega_z^2(t) <z^4>_n(t) dt,
// purely imaginary: a phase shift, not a population loss, at this order.
std::complex<double> f1_diagonal(const PerturbationContext& ctx);

// \int_0^{t_f} b^2 bdot^2 dt in 1/s.  optimal_bound: closed form
// (gamma^2-1)^2 / (4 t_f) from the variational minimizer (endpoint-kinked,
// usable only inside bound formulas, never as a runnable protocol);
// quintic: Gauss-Legendre quadrature of the polynomial integrand.
double scaling_action_integral(ScalingKind kind, double gamma, double t_f);

// Closed form of the quintic action integral,
//   10 (gamma-1)^2 (1101 + 1351 gamma + 1101 gamma^2) / (24871 t_f),
// derived by Beta-function reduction of b^2 b'^2; agrees with the quadrature
// to roundoff (see tests).
double quintic_action_series(double gamma, double t_f);

struct FirstOrderFidelity {
  double bound;     // 1 - |f1| with the variational-minimum action inside
  double estimate;  // 1 - |f1_diagonal| for the context's actual scaling
};
FirstOrderFidelity fidelity_first_order_bound(const PerturbationContext& ctx);

// alpha_{n,n'} = \int e^{-y^2} H_n(y) H_{n'}(y) y^4 dy, evaluated by a
// Gauss-Hermite rule of sufficient order (exact for the polynomial
// integrand).  Zero unless |n - n'| is in {0, 2, 4}.
double alpha_coefficient(int n, int n_prime);

// beta_{n,n'}(t) = \int_0^t b^4 omega_z^2
//                  exp(-i (n'-n) omega0 \int_0^{t1} dt2 / b^2) dt1,
// oscillatory quadrature with >= 40 nodes per phase period.
std::complex<double> beta_integral(int n, int n_prime,
                                   const PerturbationContext& ctx, double t);

// sqrt(1 - sum_{n' != n} |f_{n,n'}|^2) with
//   f_{n,n'} = (i hbar / (2 m zR^2 omega0^2)) alpha_{n,n'} beta_{n,n'}(t_f)
//              / sqrt(pi 2^{n+n'} n! n'!),
// summed over the |n - n'| <= 4 band (exact by the alpha selection rule),
// n' >= 0; clamped at 0 when the truncated sum exceeds 1.
double second_order_fidelity(const PerturbationContext& ctx);

// Radial adiabatic perturbation theory:
//   a1 = -\int_0^{t_f} (omega_R_dot / (2 omega_R))
//        exp(2 i \int_0^t omega_R dt') dt.
// Frequency jumps at breakpoints contribute instantaneous
// -(1/2) log(omega_after/omega_before) terms, flagged in the result.
struct AdiabaticAmplitude {
  std::complex<double> a1;
  bool jump_terms = false;
  double fidelity_estimate() const;  // sqrt(max(0, 1 - |a1|^2))
};
AdiabaticAmplitude adiabatic_amplitude(const FrequencyTrajectory& traj,
                                       double t_f);

}  // namespace trapx
