#pragma once
#include <complex>
#include <functional>
#include <utility>
#include <vector>

#include "trapx/grid.hpp"
#include "trapx/protocols.hpp"
#include "trapx/trap_model.hpp"

namespace trapx {

using cplx = std::complex<double>;

// Samples on a Grid1D.  On radial grids the samples are the sqrt(r)-reduced
// function u = sqrt(r) F with u(0) = 0 implicit.
struct Wavefunction1D {
  Grid1D grid;
  std::vector<cplx> psi;

  double norm() const;
  void normalize();
};

// Row-major samples [ir * grid_z.n + iz], sqrt(r)-reduced in r.
struct Wavefunction2D {
  Grid1D grid_r, grid_z;
  std::vector<cplx> psi;

  double norm() const;
  void normalize();
};

// Scaled eigenstate of the quadratic invariant at one instant.
struct ExpandingModeSpec {
  int level_n;
  double omega0;         // rad/s
  double b, bdot;        // scaling and its time derivative (1/s)
  double phase_integral; // int_0^t dt'/b^2, in s
};

// Symmetric tridiagonal Hamiltonian (J): 3-point kinetic stencil on z,
// flux-form finite-volume stencil with centrifugal term on r.
struct Tridiag {
  std::vector<double> diag;
  std::vector<double> off;
};
Tridiag assemble_hamiltonian(const Grid1D& grid,
                             const std::function<double(double)>& V,
                             const AtomSpecies& atom, int nu = 0);
void apply_hamiltonian(const Tridiag& h, const cplx* in, cplx* out, int n);

Wavefunction1D harmonic_eigenstate_z(int n, double omega,
                                     const AtomSpecies& atom,
                                     const Grid1D& grid);
// nu = 0 closed form: sqrt(2 m w / hbar) sqrt(r) e^{-m w r^2 / 2 hbar} L_k.
Wavefunction1D radial_eigenstate(int k, double omegaR, const AtomSpecies& atom,
                                 const Grid1D& grid);

// n-th eigenpair of the grid Hamiltonian; deterministic sign (positive first
// antinode).  Throws SpectrumError when level n is not a bound grid state.
std::pair<Wavefunction1D, double> stationary_state_numeric(
    const std::function<double(double)>& V, const Grid1D& grid, int n,
    const AtomSpecies& atom, int nu = 0);

Wavefunction1D expanding_mode(const ExpandingModeSpec& spec,
                              const AtomSpecies& atom, const Grid1D& grid);

// <I> with I = b^2 p^2/2m - b bdot (zp+pz)/2 + (m bdot^2/2 + m w0^2/(2 b^2)) z^2.
double invariant_expectation(const Wavefunction1D& psi, double b, double bdot,
                             double omega0, const AtomSpecies& atom);

// <H> for the grid Hamiltonian with potential V (diagnostic; same stencils
// as stationary_state_numeric).
double energy_expectation(const Wavefunction1D& psi,
                          const std::function<double(double)>& V,
                          const AtomSpecies& atom, int nu = 0);

double overlap_abs(const Wavefunction1D& a, const Wavefunction1D& b);

// Default simulation grids sized from the task and the protocol's width
// excursion (1.2 headroom for transient breathing), resolution raised with
// the level.
Grid1D default_longitudinal_grid(const ExpansionTask& task, int n_level,
                                 double b_max);
Grid1D default_radial_grid(const ExpansionTask& task, int k_level,
                           double b_max);

}  // namespace trapx
