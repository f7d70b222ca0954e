#include "trapx/quadrature.hpp"

#include <cmath>

#include "trapx/constants.hpp"
#include "trapx/errors.hpp"
#include "trapx/orthopoly.hpp"

namespace trapx {

namespace {
constexpr int kPanelNodes = 16;

template <class T, class F>
T panels_impl(const F& f, double a, double b, int n_panels) {
  const QuadRule& rule = gauss_legendre(kPanelNodes);
  T total{};
  double h = (b - a) / n_panels;
  for (int p = 0; p < n_panels; ++p) {
    double lo = a + p * h;
    double mid = lo + 0.5 * h, half = 0.5 * h;
    T acc{};
    for (int i = 0; i < kPanelNodes; ++i)
      acc += rule.weights[i] * f(mid + half * rule.nodes[i]);
    total += half * acc;
  }
  return total;
}

template <class T, class F>
T adaptive_impl(const F& f, double a, double b, double abs_tol, int n0) {
  if (a == b) return T{};
  T prev = panels_impl<T>(f, a, b, n0);
  for (int n = 2 * n0; n <= (1 << 22); n *= 2) {
    T cur = panels_impl<T>(f, a, b, n);
    if (std::abs(cur - prev) <= abs_tol) return cur;
    prev = cur;
  }
  throw ConvergenceError("quadrature did not reach tolerance");
}
}  // namespace

double integrate_panels(const std::function<double(double)>& f, double a,
                        double b, int n_panels) {
  return panels_impl<double>(f, a, b, n_panels);
}

std::complex<double> integrate_panels_c(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    int n_panels) {
  return panels_impl<std::complex<double>>(f, a, b, n_panels);
}

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol) {
  return adaptive_impl<double>(f, a, b, abs_tol, 1);
}

std::complex<double> integrate_adaptive_c(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double abs_tol) {
  return adaptive_impl<std::complex<double>>(f, a, b, abs_tol, 1);
}

std::complex<double> integrate_oscillatory(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double max_phase_rate, double abs_tol) {
  double periods = std::abs(max_phase_rate) * (b - a) / (2.0 * kPi);
  int n0 = std::max(4, int(std::ceil(periods * 40.0 / kPanelNodes)));
  return adaptive_impl<std::complex<double>>(f, a, b, abs_tol, n0);
}

CumulativeIntegral::CumulativeIntegral(std::function<double(double)> g,
                                       double t_max, int segments)
    : g_(std::move(g)), t_max_(t_max), dt_(t_max / segments) {
  if (!(t_max > 0.0) || segments < 1)
    throw DomainError("cumulative integral needs positive range");
  prefix_.resize(segments + 1, 0.0);
  for (int s = 0; s < segments; ++s)
    prefix_[s + 1] =
        prefix_[s] + integrate_panels(g_, s * dt_, (s + 1) * dt_, 1);
}

double CumulativeIntegral::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= t_max_) t = t_max_;
  int s = std::min(int(t / dt_), int(prefix_.size()) - 2);
  return prefix_[s] + integrate_panels(g_, s * dt_, t, 1);
}

}  // namespace trapx
