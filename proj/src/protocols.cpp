#include "trapx/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trapx/constants.hpp"
#include "trapx/errors.hpp"

namespace trapx {

ExpansionTask ExpansionTask::make(double omega0_z, double omegaf_z,
                                  double t_final, const AtomSpecies& atom,
                                  const BeamGeometry& geom,
                                  bool allow_repulsive) {
  if (!(omega0_z > 0.0) || !(omegaf_z > 0.0) || !(t_final > 0.0))
    throw DomainError("expansion task needs positive frequencies and duration");
  double gamma = std::sqrt(omega0_z / omegaf_z);
  return {omega0_z, omegaf_z, t_final, gamma, atom, geom, allow_repulsive};
}

ExpansionTask ExpansionTask::with_t_final(double t) const {
  ExpansionTask copy = *this;
  if (!(t > 0.0)) throw DomainError("t_final must be positive");
  copy.t_final = t;
  return copy;
}

double FrequencyTrajectory::omega_z(double t) const {
  return std::sqrt(std::max(0.0, omega_z_sq(t)));
}

double FrequencyTrajectory::radial_ratio() const {
  return std::sqrt(2.0) * kPi * geometry.waist_w0 / geometry.wavelength_lambda;
}

double FrequencyTrajectory::omega_r(double t) const {
  return radial_ratio() * omega_z(t);
}

double FrequencyTrajectory::omega_r_sq(double t) const {
  double r = radial_ratio();
  return r * r * omega_z_sq(t);
}

double FrequencyTrajectory::v0(double t) const {
  return v0_from_omega_z_sq(omega_z_sq(t), geometry, atom, true);
}

ScalingFunction quintic_scaling(const ExpansionTask& task) {
  double g1 = task.gamma - 1.0;
  auto eval = [g1](double s) -> ScalingDerivs {
    double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;
    return {1.0 + g1 * (10 * s3 - 15 * s4 + 6 * s5),
            g1 * (30 * s2 - 60 * s3 + 30 * s4),
            g1 * (60 * s - 180 * s2 + 120 * s3),
            g1 * (60 - 360 * s + 360 * s2)};
  };
  return {ScalingKind::quintic, task.t_final, eval};
}

ScalingFunction constant_frequency_scaling(double omega0, double omega1) {
  if (!(omega1 > 0.0)) throw DomainError("intermediate frequency must be positive");
  double T = kPi / (2.0 * omega1);
  double c = (omega0 * omega0 - omega1 * omega1) / (omega1 * omega1);
  double a = omega1 * T;  // phase per unit s (= pi/2)
  auto eval = [c, a](double s) -> ScalingDerivs {
    double th = a * s;
    double sn = std::sin(th), s2 = std::sin(2 * th), c2 = std::cos(2 * th);
    double q = c * sn * sn + 1.0;
    double dq = c * a * s2;
    double d2q = 2.0 * c * a * a * c2;
    double d3q = -4.0 * c * a * a * a * s2;
    double b = std::sqrt(q);
    double db = dq / (2 * b);
    double d2b = d2q / (2 * b) - dq * dq / (4 * q * b);
    double d3b = d3q / (2 * b) - 3 * d2q * dq / (4 * q * b) +
                 3 * dq * dq * dq / (8 * q * q * b);
    return {b, db, d2b, d3b};
  };
  return {ScalingKind::constant_frequency, T, eval};
}

FrequencyTrajectory omega_from_scaling(const ScalingFunction& b,
                                       const ExpansionTask& task) {
  double tf = b.domain_T > 0.0 ? b.domain_T : task.t_final;
  auto eval = b.eval;
  auto sq = [eval, tf, w0 = task.omega0_z](double t) {
    double s = std::clamp(t / tf, 0.0, 1.0);
    ScalingDerivs d = eval(s);
    double b2 = d.b * d.b;
    return w0 * w0 / (b2 * b2) - d.d2b / (tf * tf * d.b);
  };
  auto sq_dot = [eval, tf, w0 = task.omega0_z](double t) {
    double s = std::clamp(t / tf, 0.0, 1.0);
    ScalingDerivs d = eval(s);
    double b5 = std::pow(d.b, 5.0);
    return -4.0 * w0 * w0 * d.db / (b5 * tf) -
           (d.d3b * d.b - d.d2b * d.db) / (tf * tf * tf * d.b * d.b);
  };
  double mn = sq(0.0);
  for (int i = 1; i <= 10000; ++i) mn = std::min(mn, sq(tf * i / 10000.0));
  if (mn < 0.0 && !task.allow_repulsive)
    throw AttractivityError(
        "designed omega_z^2 goes negative (transient repulsive trap); "
        "enable the repulsive opt-in to proceed");
  FrequencyTrajectory traj{ProtocolKind::invariant, tf,
                           task.omega0_z,           task.omegaf_z,
                           task.atom,               task.geometry,
                           {},                      sq,
                           sq_dot,                  mn};
  return traj;
}

FrequencyTrajectory bang_bang(const ExpansionTask& task) {
  double w0 = task.omega0_z, wf = task.omegaf_z;
  double w1 = std::sqrt(w0 * wf);
  double tf = kPi / (2.0 * w1);
  auto sq = [w0, wf, w1, tf](double t) {
    if (t < 0.0) return w0 * w0;
    if (t < tf) return w1 * w1;
    return wf * wf;
  };
  FrequencyTrajectory traj{ProtocolKind::bang_bang, tf,
                           w0,                      wf,
                           task.atom,               task.geometry,
                           {0.0, tf},               sq,
                           [](double) { return 0.0; },
                           std::min(w1 * w1, std::min(w0 * w0, wf * wf))};
  return traj;
}

FrequencyTrajectory fast_adiabatic(const ExpansionTask& task) {
  double w0 = task.omega0_z, wf = task.omegaf_z, tf = task.t_final;
  double slope = (wf - w0) / (tf * wf);  // omega = w0 / (1 - slope * t)
  for (int i = 0; i <= 1000; ++i)
    if (1.0 - slope * (tf * i / 1000.0) <= 0.0)
      throw DomainError("fast-adiabatic ramp is singular inside [0, t_f]");
  auto omega = [w0, slope](double t) { return w0 / (1.0 - slope * t); };
  auto sq = [omega](double t) { double w = omega(t); return w * w; };
  // omega' = slope * omega^2 / w0, so d(omega^2)/dt = 2 slope omega^3 / w0
  auto sq_dot = [omega, w0, slope](double t) {
    double w = omega(t);
    return 2.0 * slope * w * w * w / w0;
  };
  FrequencyTrajectory traj{ProtocolKind::fast_adiabatic, tf,
                           w0,                           wf,
                           task.atom,                    task.geometry,
                           {},                           sq,
                           sq_dot,                       std::min(w0 * w0, wf * wf)};
  return traj;
}

FrequencyTrajectory make_trajectory(ProtocolKind kind, const ExpansionTask& task) {
  switch (kind) {
    case ProtocolKind::invariant:
      return omega_from_scaling(quintic_scaling(task), task);
    case ProtocolKind::bang_bang:
      return bang_bang(task);
    case ProtocolKind::fast_adiabatic:
      return fast_adiabatic(task);
  }
  throw UsageError("unknown protocol kind");
}

double bang_bang_radial_tf(const ExpansionTask& task) {
  double ratio = std::sqrt(2.0) * kPi * task.geometry.waist_w0 /
                 task.geometry.wavelength_lambda;
  return kPi / (2.0 * ratio * std::sqrt(task.omega0_z * task.omegaf_z));
}

double min_attractive_tf(const ExpansionTask& shape, ScalingKind kind) {
  if (kind != ScalingKind::quintic)
    throw UsageError("attractivity threshold needs a t_f-independent scaling shape");
  if (shape.gamma == 1.0) return 0.0;
  ScalingFunction b = quintic_scaling(shape);
  double w0sq = shape.omega0_z * shape.omega0_z;
  auto attractive = [&](double tf) {
    for (int i = 0; i <= 4096; ++i) {
      ScalingDerivs d = b.eval(i / 4096.0);
      double b2 = d.b * d.b;
      if (w0sq / (b2 * b2) - d.d2b / (tf * tf * d.b) < 0.0) return false;
    }
    return true;
  };
  double lo = 1e-6, hi = 1e-1;
  for (int k = 0; k < 8 && attractive(lo); ++k) { hi = lo; lo /= 10.0; }
  for (int k = 0; k < 8 && !attractive(hi); ++k) { lo = hi; hi *= 10.0; }
  if (!attractive(hi)) throw ConvergenceError("no attractive t_f in bracket");
  while ((hi - lo) / hi > 1e-6) {
    double mid = 0.5 * (lo + hi);
    (attractive(mid) ? hi : lo) = mid;
  }
  return hi;
}

AdiabaticityReport adiabaticity_margin(const FrequencyTrajectory& traj,
                                       Direction dir) {
  // segment ends strictly inside (0, t_f) plus the domain edges
  std::vector<double> cuts{0.0};
  for (double b : traj.breakpoints)
    if (b > 0.0 && b < traj.t_f) cuts.push_back(b);
  cuts.push_back(traj.t_f);
  std::sort(cuts.begin(), cuts.end());

  double ratio = traj.radial_ratio();
  double worst = 0.0;
  for (size_t s = 0; s + 1 < cuts.size(); ++s) {
    double a = cuts[s], c = cuts[s + 1];
    int n = 2000;
    for (int i = 0; i <= n; ++i) {
      // one-sided at segment ends: nudge the sample into the open segment
      double t = a + (c - a) * i / n;
      if (i == 0) t += (c - a) * 1e-9;
      if (i == n) t -= (c - a) * 1e-9;
      double sq = traj.omega_z_sq(t);
      if (sq <= 0.0) return {std::numeric_limits<double>::infinity(),
                             !traj.breakpoints.empty()};
      double wz = std::sqrt(sq);
      double wdot = traj.omega_z_sq_dot(t) / (2.0 * wz);
      double m = dir == Direction::longitudinal
                     ? std::sqrt(2.0) * std::abs(wdot) / (8.0 * sq)
                     : std::abs(wdot) / (4.0 * ratio * sq);
      worst = std::max(worst, m);
    }
  }
  return {worst, !traj.breakpoints.empty()};
}

}  // namespace trapx
