#include "trapx/orthopoly.hpp"

#include <lapacke.h>

#include <cmath>
#include <map>
#include <mutex>

#include "trapx/constants.hpp"
#include "trapx/errors.hpp"

namespace trapx {

double hermite_poly(int n, double y) {
  double hm = 1.0, h = 2.0 * y;
  if (n == 0) return hm;
  for (int k = 1; k < n; ++k) {
    double next = 2.0 * y * h - 2.0 * k * hm;
    hm = h;
    h = next;
  }
  return h;
}

double hermite_function(int n, double y) {
  double g = std::exp(-0.5 * y * y) / std::pow(kPi, 0.25);
  double hm = 0.0, h = g;
  for (int k = 0; k < n; ++k) {
    double next = y * std::sqrt(2.0 / (k + 1)) * h -
                  std::sqrt(double(k) / (k + 1)) * hm;
    hm = h;
    h = next;
  }
  return h;
}

double laguerre_poly(int k, double x) {
  double lm = 1.0, l = 1.0 - x;
  if (k == 0) return lm;
  for (int j = 1; j < k; ++j) {
    double next = ((2.0 * j + 1.0 - x) * l - j * lm) / (j + 1.0);
    lm = l;
    l = next;
  }
  return l;
}

namespace {

QuadRule golub_welsch(int n, const std::vector<double>& offdiag, double mu0) {
  std::vector<double> d(n, 0.0), e(offdiag), z(size_t(n) * n);
  int info = LAPACKE_dstevd(LAPACK_ROW_MAJOR, 'V', n, d.data(), e.data(),
                            z.data(), n);
  if (info != 0) throw ConvergenceError("quadrature eigensolve failed");
  QuadRule rule;
  rule.nodes = d;
  rule.weights.resize(n);
  for (int j = 0; j < n; ++j) {
    double v0 = z[size_t(0) * n + j];
    rule.weights[j] = mu0 * v0 * v0;
  }
  return rule;
}

const QuadRule& cached(std::map<int, QuadRule>& cache, std::mutex& mu, int n,
                       QuadRule (*make)(int)) {
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make(n)).first;
  return it->second;
}

QuadRule make_gh(int n) {
  std::vector<double> e(n - 1);
  for (int k = 1; k < n; ++k) e[k - 1] = std::sqrt(k / 2.0);
  return golub_welsch(n, e, std::sqrt(kPi));
}

QuadRule make_gl(int n) {
  std::vector<double> e(n - 1);
  for (int k = 1; k < n; ++k) e[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(n, e, 2.0);
}

}  // namespace

const QuadRule& gauss_hermite(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mu;
  return cached(cache, mu, n, make_gh);
}

const QuadRule& gauss_legendre(int n) {
  static std::map<int, QuadRule> cache;
  static std::mutex mu;
  return cached(cache, mu, n, make_gl);
}

}  // namespace trapx
