#include "trapx/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "trapx/constants.hpp"
#include "trapx/errors.hpp"
#include "trapx/orthopoly.hpp"
#include "trapx/quadrature.hpp"

namespace trapx {

namespace {
using cplx = std::complex<double>;
constexpr cplx kI{0.0, 1.0};

// omega_z^2 at reduced time s for an s-parameterized scaling (Ermakov
// inversion, signed; repulsive transients are legitimate here because the
// perturbative formulas never take a square root of it).
double omega_sq_of_s(const ScalingFunction& sc, double omega0, double s) {
  ScalingDerivs d = sc.eval(s);
  double bdd = d.d2b / (sc.domain_T * sc.domain_T);
  double b2 = d.b * d.b;
  return omega0 * omega0 / (b2 * b2) - bdd / d.b;
}
}  // namespace

PerturbationContext PerturbationContext::make(const ExpansionTask& task,
                                              const ScalingFunction& scaling,
                                              int level_n) {
  if (level_n < 0) throw UsageError("perturbation level must be >= 0");
  if (!(scaling.domain_T > 0.0) || !scaling.eval)
    throw UsageError("perturbation context needs a usable scaling");
  return PerturbationContext{task, scaling, task.geometry, level_n};
}

double z4_matrix_element(int n, double b, double omega0,
                         const AtomSpecies& atom) {
  double a2 = kHbar / (atom.mass_kg * omega0);  // width^2, m^2
  double np1 = double(n) + 1.0;
  double levels = np1 * np1 + double(n) * double(n);
  double b2 = b * b;
  return a2 * a2 * 0.75 * b2 * b2 * levels;
}

std::complex<double> f1_diagonal(const PerturbationContext& ctx) {
  const double T = ctx.scaling.domain_T;
  const double omega0 = ctx.task.omega0_z;
  const double scale =
      omega0 * omega0 * z4_matrix_element(ctx.level_n, 1.0, omega0, ctx.task.atom);
  auto g = [&](double s) {
    return omega_sq_of_s(ctx.scaling, omega0, s) *
           z4_matrix_element(ctx.level_n, ctx.scaling.eval(s).b, omega0,
                             ctx.task.atom) /
           scale;
  };
  // Integrand is O(1 + gamma^4) in these units; keep the tolerance relative
  // to that so the adaptive loop is not chasing roundoff.
  double g4 = std::pow(ctx.task.gamma, 4);
  double js = integrate_adaptive(g, 0.0, ctx.task.t_final / T,
                                 1e-10 * (1.0 + g4));
  const double zr = ctx.geometry.rayleigh_zR;
  const double m = ctx.task.atom.mass_kg;
  return kI * (m / (2.0 * kHbar * zr * zr)) * js * T * scale;
}

double scaling_action_integral(ScalingKind kind, double gamma, double t_f) {
  if (gamma < 1.0) throw UsageError("scaling action needs gamma >= 1");
  if (!(t_f > 0.0)) throw UsageError("scaling action needs t_f > 0");
  if (gamma == 1.0) return 0.0;
  switch (kind) {
    case ScalingKind::optimal_bound: {
      double q = gamma * gamma - 1.0;
      return q * q / (4.0 * t_f);
    }
    case ScalingKind::quintic: {
      auto g = [gamma](double s) {
        double p = ((6.0 * s - 15.0) * s + 10.0) * s * s * s;
        double u = s * (1.0 - s);
        double b = 1.0 + (gamma - 1.0) * p;
        double db = 30.0 * (gamma - 1.0) * u * u;
        return b * b * db * db;
      };
      // Degree-18 polynomial: two 16-point panels are exact.
      return integrate_panels(g, 0.0, 1.0, 2) / t_f;
    }
    default:
      throw UsageError("scaling action is defined for quintic and optimal kinds");
  }
}

double quintic_action_series(double gamma, double t_f) {
  double d = gamma - 1.0;
  return 10.0 * d * d * (1101.0 + 1351.0 * gamma + 1101.0 * gamma * gamma) /
         (24871.0 * t_f);
}

FirstOrderFidelity fidelity_first_order_bound(const PerturbationContext& ctx) {
  const double zr = ctx.geometry.rayleigh_zR;
  const double m = ctx.task.atom.mass_kg;
  const double np1 = double(ctx.level_n) + 1.0;
  const double levels = np1 * np1 + double(ctx.level_n) * double(ctx.level_n);
  const double pref = 3.0 * kHbar / (8.0 * m * zr * zr) * levels;
  const double tf = ctx.task.t_final;
  const double w0sq = ctx.task.omega0_z * ctx.task.omega0_z;
  const double action =
      scaling_action_integral(ScalingKind::optimal_bound, ctx.task.gamma, tf);
  FirstOrderFidelity out;
  out.bound = 1.0 - pref * (tf + 3.0 * action / w0sq);
  out.estimate = 1.0 - std::abs(f1_diagonal(ctx));
  return out;
}

double alpha_coefficient(int n, int n_prime) {
  if (n < 0 || n_prime < 0) throw UsageError("alpha levels must be >= 0");
  // Integrand is a polynomial of degree n + n' + 4 times the Hermite weight.
  const QuadRule& rule = gauss_hermite((n + n_prime + 4) / 2 + 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    double y = rule.nodes[i];
    double y2 = y * y;
    acc += rule.weights[i] * hermite_poly(n, y) * hermite_poly(n_prime, y) *
           y2 * y2;
  }
  return acc;
}

std::complex<double> beta_integral(int n, int n_prime,
                                   const PerturbationContext& ctx, double t) {
  if (n < 0 || n_prime < 0) throw UsageError("beta levels must be >= 0");
  if (t < 0.0 || t > ctx.task.t_final * (1.0 + 1e-9))
    throw UsageError("beta time outside [0, t_f]");
  if (t == 0.0) return 0.0;

  const double T = ctx.scaling.domain_T;
  const double omega0 = ctx.task.omega0_z;
  const double delta = (double(n_prime) - double(n)) * omega0;
  const double s_t = t / T;

  CumulativeIntegral phase(
      [&](double s) {
        double b = ctx.scaling.eval(s).b;
        return 1.0 / (b * b);
      },
      s_t, 512);

  double max_inv_b2 = 0.0;
  for (int i = 0; i <= 256; ++i) {
    double b = ctx.scaling.eval(s_t * i / 256.0).b;
    max_inv_b2 = std::max(max_inv_b2, 1.0 / (b * b));
  }

  auto f = [&](double s) -> cplx {
    ScalingDerivs d = ctx.scaling.eval(s);
    double b2 = d.b * d.b;
    double w2b4 = omega_sq_of_s(ctx.scaling, omega0, s) * b2 * b2;
    return w2b4 * std::exp(-kI * (delta * T * phase(s)));
  };
  double tol = 1e-10 * omega0 * omega0 * std::max(s_t, 1e-3);
  cplx val =
      integrate_oscillatory(f, 0.0, s_t, std::abs(delta) * T * max_inv_b2, tol);
  return val * T;
}

double second_order_fidelity(const PerturbationContext& ctx) {
  const int n = ctx.level_n;
  const double zr = ctx.geometry.rayleigh_zR;
  const double m = ctx.task.atom.mass_kg;
  const double w0sq = ctx.task.omega0_z * ctx.task.omega0_z;
  const double pref = kHbar / (2.0 * m * zr * zr * w0sq);
  double sum = 0.0;
  for (int dn : {-4, -2, 2, 4}) {
    int np = n + dn;
    if (np < 0) continue;
    double norm = std::exp(
        0.5 * (std::log(kPi) + (n + np) * std::log(2.0) +
               std::lgamma(double(n) + 1.0) + std::lgamma(double(np) + 1.0)));
    double f = pref * alpha_coefficient(n, np) *
               std::abs(beta_integral(n, np, ctx, ctx.task.t_final)) / norm;
    sum += f * f;
  }
  return std::sqrt(std::max(0.0, 1.0 - sum));
}

double AdiabaticAmplitude::fidelity_estimate() const {
  return std::sqrt(std::max(0.0, 1.0 - std::norm(a1)));
}

AdiabaticAmplitude adiabatic_amplitude(const FrequencyTrajectory& traj,
                                       double t_f) {
  if (!(t_f > 0.0)) throw UsageError("adiabatic amplitude needs t_f > 0");

  const int kSamples = 2048;
  double min_wsq = 1e300, max_wsq = 0.0;
  for (int i = 0; i <= kSamples; ++i) {
    double wsq = traj.omega_z_sq(t_f * i / kSamples);
    min_wsq = std::min(min_wsq, wsq);
    max_wsq = std::max(max_wsq, wsq);
  }
  if (min_wsq <= 0.0)
    throw AttractivityError(
        "adiabatic amplitude needs an attractive trap throughout");

  const double ratio = traj.radial_ratio();
  const double max_wr = ratio * std::sqrt(max_wsq);
  CumulativeIntegral theta([&traj](double t) { return traj.omega_r(t); }, t_f,
                           1024);

  std::vector<double> bounds{0.0, t_f};
  for (double tb : traj.breakpoints)
    if (tb > t_f * 1e-12 && tb < t_f * (1.0 - 1e-12)) bounds.push_back(tb);
  std::sort(bounds.begin(), bounds.end());

  AdiabaticAmplitude out;
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    auto f = [&](double t) -> cplx {
      double pre = traj.omega_z_sq_dot(t) / (4.0 * traj.omega_z_sq(t));
      return -pre * std::exp(2.0 * kI * theta(t));
    };
    out.a1 += integrate_oscillatory(f, bounds[i], bounds[i + 1], 2.0 * max_wr,
                                    1e-10);
  }

  // Breakpoint jumps: sudden frequency steps contribute instantaneous
  // -(1/2) log(w_after / w_before) at the accumulated phase.  The ends
  // compare against the nominal initial and target frequencies (the bases
  // the state is prepared and measured in).
  const double eps = 1e-9 * t_f;
  for (double tb : traj.breakpoints) {
    if (tb < -eps || tb > t_f * (1.0 + 1e-12)) continue;
    double before = (tb <= eps) ? traj.omega0_z : traj.omega_z(tb - eps);
    double after =
        (tb >= t_f * (1.0 - 1e-12)) ? traj.omegaf_z : traj.omega_z(tb + eps);
    double lr = std::log(after / before);
    if (std::abs(lr) > 1e-12) {
      out.a1 += -0.5 * lr * std::exp(2.0 * kI * theta(std::clamp(tb, 0.0, t_f)));
      out.jump_terms = true;
    }
  }
  return out;
}

}  // namespace trapx
