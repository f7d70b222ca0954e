#include "trapx/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>

#include "trapx/constants.hpp"
#include "trapx/fft.hpp"
#include "trapx/orthopoly.hpp"

namespace trapx {

namespace {

// Trapezoid weights: longitudinal grids halve both ends; radial grids carry
// an implicit zero node at r = 0, so only the outer end is halved.
double weight(const Grid1D& g, int j) {
  if (g.axis == Axis::longitudinal_z)
    return (j == 0 || j == g.n - 1) ? 0.5 : 1.0;
  return j == g.n - 1 ? 0.5 : 1.0;
}

cplx inner(const Grid1D& g, const std::vector<cplx>& a,
           const std::vector<cplx>& b) {
  cplx s{};
  for (int j = 0; j < g.n; ++j) s += weight(g, j) * std::conj(a[j]) * b[j];
  return s * g.dx;
}

void check_boundary_amplitude(const Wavefunction1D& w, double unit_len) {
  double scale = std::sqrt(unit_len);  // dimensionless amplitude
  double edge = std::abs(w.psi.back());
  if (w.grid.axis == Axis::longitudinal_z)
    edge = std::max(edge, std::abs(w.psi.front()));
  if (edge * scale > 1e-8)
    throw DomainError("grid extent truncates the state (boundary amplitude)");
}

}  // namespace

double Wavefunction1D::norm() const {
  return std::sqrt(std::real(inner(grid, psi, psi)));
}

void Wavefunction1D::normalize() {
  double n = norm();
  if (!(n > 0.0)) throw DomainError("cannot normalize a zero state");
  for (auto& a : psi) a /= n;
}

double Wavefunction2D::norm() const {
  double s = 0.0;
  for (int ir = 0; ir < grid_r.n; ++ir) {
    double row = 0.0;
    for (int iz = 0; iz < grid_z.n; ++iz) {
      double w = weight(grid_z, iz);
      row += w * std::norm(psi[size_t(ir) * grid_z.n + iz]);
    }
    s += weight(grid_r, ir) * row;
  }
  return std::sqrt(s * grid_r.dx * grid_z.dx);
}

void Wavefunction2D::normalize() {
  double n = norm();
  if (!(n > 0.0)) throw DomainError("cannot normalize a zero state");
  for (auto& a : psi) a /= n;
}

Tridiag assemble_hamiltonian(const Grid1D& grid,
                             const std::function<double(double)>& V,
                             const AtomSpecies& atom, int nu) {
  int n = grid.n;
  double dx = grid.dx;
  double kappa = kHbar * kHbar / (2.0 * atom.mass_kg * dx * dx);
  Tridiag h;
  h.diag.resize(n);
  h.off.resize(n - 1);
  if (grid.axis == Axis::longitudinal_z) {
    for (int j = 0; j < n; ++j) h.diag[j] = 2.0 * kappa + V(grid.x(j));
    for (int j = 0; j + 1 < n; ++j) h.off[j] = -kappa;
    return h;
  }
  // radial flux-form finite volume on u = sqrt(r) F
  double nu2 = double(nu) * double(nu);
  for (int j = 0; j < n; ++j) {
    double r = grid.x(j);
    h.diag[j] = 2.0 * kappa + V(r);
    if (nu != 0)
      h.diag[j] += kHbar * kHbar * nu2 / (2.0 * atom.mass_kg * r * r);
  }
  if (nu == 0) h.diag[0] = 1.5 * kappa + V(grid.x(0));  // natural origin BC
  for (int j = 0; j + 1 < n; ++j) {
    double rj = grid.x(j), rj1 = grid.x(j + 1), rhalf = 0.5 * (rj + rj1);
    h.off[j] = -kappa * rhalf / std::sqrt(rj * rj1);
  }
  return h;
}

void apply_hamiltonian(const Tridiag& h, const cplx* in, cplx* out, int n) {
  for (int j = 0; j < n; ++j) {
    cplx v = h.diag[j] * in[j];
    if (j > 0) v += h.off[j - 1] * in[j - 1];
    if (j + 1 < n) v += h.off[j] * in[j + 1];
    out[j] = v;
  }
}

Wavefunction1D harmonic_eigenstate_z(int n, double omega,
                                     const AtomSpecies& atom,
                                     const Grid1D& grid) {
  if (grid.axis != Axis::longitudinal_z)
    throw GridError("harmonic longitudinal state needs a z grid");
  double a = std::sqrt(kHbar / (atom.mass_kg * omega));
  Wavefunction1D w{grid, std::vector<cplx>(grid.n)};
  for (int j = 0; j < grid.n; ++j)
    w.psi[j] = hermite_function(n, grid.x(j) / a) / std::sqrt(a);
  check_boundary_amplitude(w, a);
  w.normalize();
  return w;
}

Wavefunction1D radial_eigenstate(int k, double omegaR, const AtomSpecies& atom,
                                 const Grid1D& grid) {
  if (grid.axis != Axis::radial_r)
    throw GridError("radial eigenstate needs a radial grid");
  double s = atom.mass_kg * omegaR / kHbar;  // 1/a_R^2
  Wavefunction1D w{grid, std::vector<cplx>(grid.n)};
  for (int j = 0; j < grid.n; ++j) {
    double r = grid.x(j), x = s * r * r;
    w.psi[j] = std::sqrt(2.0 * s) * std::sqrt(r) * std::exp(-0.5 * x) *
               laguerre_poly(k, x);
  }
  check_boundary_amplitude(w, 1.0 / std::sqrt(s));
  w.normalize();
  return w;
}

std::pair<Wavefunction1D, double> stationary_state_numeric(
    const std::function<double(double)>& V, const Grid1D& grid, int n,
    const AtomSpecies& atom, int nu) {
  if (n < 0 || n >= grid.n) throw SpectrumError("level outside grid spectrum");
  Tridiag h = assemble_hamiltonian(grid, V, atom, nu);
  // scale to O(1) for the eigensolver
  double kappa = kHbar * kHbar / (2.0 * atom.mass_kg * grid.dx * grid.dx);
  std::vector<double> d(grid.n), e(grid.n - 1);
  for (int j = 0; j < grid.n; ++j) d[j] = h.diag[j] / kappa;
  for (int j = 0; j + 1 < grid.n; ++j) e[j] = h.off[j] / kappa;

  int m = 0;
  std::vector<double> wvals(grid.n), z(grid.n);
  std::vector<lapack_int> isuppz(2);
  lapack_int info = LAPACKE_dstevr(
      LAPACK_ROW_MAJOR, 'V', 'I', grid.n, d.data(), e.data(), 0.0, 0.0, n + 1,
      n + 1, 0.0, &m, wvals.data(), z.data(), 1, isuppz.data());
  if (info != 0 || m != 1) throw ConvergenceError("eigensolver failed");
  double energy = wvals[0] * kappa;

  double v_edge = grid.axis == Axis::longitudinal_z
                      ? std::max(V(grid.x_min()), V(grid.x_max()))
                      : V(grid.x_max());
  if (energy >= v_edge)
    throw SpectrumError("level is not a bound grid state");

  Wavefunction1D w{grid, std::vector<cplx>(grid.n)};
  for (int j = 0; j < grid.n; ++j) w.psi[j] = z[j];
  // deterministic sign: positive first antinode
  double peak = 0.0;
  for (int j = 0; j < grid.n; ++j) peak = std::max(peak, std::abs(z[j]));
  for (int j = 1; j + 1 < grid.n; ++j) {
    double a = std::abs(z[j]);
    if (a >= std::abs(z[j - 1]) && a > std::abs(z[j + 1]) && a > 0.05 * peak) {
      if (z[j] < 0.0)
        for (auto& c : w.psi) c = -c;
      break;
    }
  }
  w.normalize();
  return {std::move(w), energy};
}

Wavefunction1D expanding_mode(const ExpandingModeSpec& spec,
                              const AtomSpecies& atom, const Grid1D& grid) {
  if (!(spec.b > 0.0)) throw DomainError("expanding mode needs b > 0");
  double chirp = atom.mass_kg * spec.bdot / (2.0 * kHbar * spec.b);
  if (grid.axis == Axis::radial_r) {
    // Scaled 2D-oscillator mode (nu = 0): u0(r/b)/sqrt(b) equals the
    // closed-form eigenstate at frequency omega0/b^2, up to normalization.
    Wavefunction1D w = radial_eigenstate(
        spec.level_n, spec.omega0 / (spec.b * spec.b), atom, grid);
    cplx lr = std::exp(cplx(0.0, -(2.0 * spec.level_n + 1.0) * spec.omega0 *
                                     spec.phase_integral));
    for (int j = 0; j < grid.n; ++j) {
      double r = grid.x(j);
      w.psi[j] *= lr * std::exp(cplx(0.0, chirp * r * r));
    }
    w.normalize();
    return w;
  }
  double a = std::sqrt(kHbar / (atom.mass_kg * spec.omega0));
  double ab = a * spec.b;
  cplx lr = std::exp(cplx(0.0, -(spec.level_n + 0.5) * spec.omega0 *
                                   spec.phase_integral));
  Wavefunction1D w{grid, std::vector<cplx>(grid.n)};
  for (int j = 0; j < grid.n; ++j) {
    double z = grid.x(j);
    w.psi[j] = std::exp(cplx(0.0, chirp * z * z)) * lr *
               hermite_function(spec.level_n, z / ab) / std::sqrt(ab);
  }
  w.normalize();
  return w;
}

double invariant_expectation(const Wavefunction1D& psi, double b, double bdot,
                             double omega0, const AtomSpecies& atom) {
  if (psi.grid.axis != Axis::longitudinal_z)
    throw GridError("invariant expectation is longitudinal");
  int n = psi.grid.n;
  double dx = psi.grid.dx, L = n * dx, m = atom.mass_kg;
  Fft1D fft(n);
  std::vector<cplx> ft(psi.psi), dpsi(n);
  fft.forward(ft.data());
  double p2 = 0.0;
  for (int j = 0; j < n; ++j) {
    int kidx = j < n / 2 ? j : j - n;
    double k = 2.0 * kPi * kidx / L;
    p2 += kHbar * kHbar * k * k * std::norm(ft[j]);
    ft[j] *= cplx(0.0, k);  // spectral derivative
  }
  p2 *= dx / n;  // Parseval with the grid measure
  fft.backward(ft.data());
  for (int j = 0; j < n; ++j) dpsi[j] = ft[j] / double(n);

  cplx zp{};
  double z2 = 0.0;
  for (int j = 0; j < n; ++j) {
    double z = psi.grid.x(j);
    zp += std::conj(psi.psi[j]) * cplx(0.0, -kHbar) *
          (z * dpsi[j] + 0.5 * psi.psi[j]);
    z2 += z * z * std::norm(psi.psi[j]);
  }
  zp *= dx;
  z2 *= dx;

  cplx total = b * b * p2 / (2.0 * m) - bdot * b * zp +
               (0.5 * m * bdot * bdot + m * omega0 * omega0 / (2.0 * b * b)) * z2;
  if (std::abs(total.imag()) > 1e-10 * std::abs(total.real()) + 1e-300)
    throw ConvergenceError("invariant expectation has a spurious imaginary part");
  return total.real();
}

double energy_expectation(const Wavefunction1D& psi,
                          const std::function<double(double)>& V,
                          const AtomSpecies& atom, int nu) {
  Tridiag h = assemble_hamiltonian(psi.grid, V, atom, nu);
  std::vector<cplx> hpsi(psi.grid.n);
  apply_hamiltonian(h, psi.psi.data(), hpsi.data(), psi.grid.n);
  return std::real(inner(psi.grid, psi.psi, hpsi)) /
         std::real(inner(psi.grid, psi.psi, psi.psi));
}

double overlap_abs(const Wavefunction1D& a, const Wavefunction1D& b) {
  if (!a.grid.same_as(b.grid)) throw GridError("overlap needs identical grids");
  return std::abs(inner(a.grid, a.psi, b.psi));
}

Grid1D default_longitudinal_grid(const ExpansionTask& task, int n_level,
                                 double b_max) {
  double a0 = std::sqrt(kHbar / (task.atom.mass_kg * task.omega0_z));
  double half = 8.0 * std::sqrt(n_level + 0.5) * a0 * std::max(1.0, 1.2 * b_max);
  double dz_target = 0.35 * a0 / std::sqrt(1.0 + n_level);
  int np = 1024;
  while (np < 16384 && 2.0 * half / np > dz_target) np *= 2;
  return Grid1D::longitudinal(half, np);
}

Grid1D default_radial_grid(const ExpansionTask& task, int k_level,
                           double b_max) {
  double wR0 = omega_r_from_omega_z(task.omega0_z, task.geometry);
  double aR = std::sqrt(kHbar / (task.atom.mass_kg * wR0));
  double rmax =
      8.0 * std::sqrt(2.0 * k_level + 1.0) * aR * std::max(1.0, 1.2 * b_max);
  double dr_target = 0.03 * aR;
  int np = 1024;
  while (np < 8192 && rmax / np > dr_target) np *= 2;
  return Grid1D::radial(rmax, np);
}

}  // namespace trapx
