#pragma once
#include <vector>

namespace trapx {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Physicists' Hermite polynomial H_n(y).
double hermite_poly(int n, double y);
// Normalized Hermite function H_n(y) e^{-y^2/2} / sqrt(2^n n! sqrt(pi)),
// evaluated by the stable normalized recurrence.
double hermite_function(int n, double y);
// Generalized Laguerre L_k^(0)(x).
double laguerre_poly(int k, double x);

// Golub-Welsch rules (symmetric tridiagonal eigenproblem via LAPACK).
// gauss_hermite integrates f(y) e^{-y^2} on R exactly for poly f of
// degree <= 2n-1; gauss_legendre integrates on [-1, 1].
const QuadRule& gauss_hermite(int n);
const QuadRule& gauss_legendre(int n);

}  // namespace trapx
