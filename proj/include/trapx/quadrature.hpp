#pragma once
#include <complex>
#include <functional>
#include <vector>

namespace trapx {

// Composite 16-point Gauss-Legendre over n_panels equal panels.
double integrate_panels(const std::function<double(double)>& f, double a,
                        double b, int n_panels);
std::complex<double> integrate_panels_c(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    int n_panels);

// Panel-doubling composite quadrature to absolute tolerance.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double abs_tol = 1e-10);
std::complex<double> integrate_adaptive_c(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double abs_tol = 1e-10);

// Oscillatory integrand with known maximum phase rate (rad per unit t):
// panels sized for >= 40 nodes per phase period, then doubled to tolerance.
std::complex<double> integrate_oscillatory(
    const std::function<std::complex<double>(double)>& f, double a, double b,
    double max_phase_rate, double abs_tol = 1e-10);

// Cumulative integral F(t) = int_0^t g, exact-to-roundoff for smooth g:
// prefix sums over fixed segments plus a partial Gauss panel.
class CumulativeIntegral {
 public:
  CumulativeIntegral(std::function<double(double)> g, double t_max,
                     int segments = 512);
  double operator()(double t) const;
  double t_max() const { return t_max_; }

 private:
  std::function<double(double)> g_;
  double t_max_, dt_;
  std::vector<double> prefix_;
};

}  // namespace trapx
