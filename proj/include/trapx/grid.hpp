#pragma once
#include "trapx/errors.hpp"

namespace trapx {

enum class Axis { longitudinal_z, radial_r };

// Uniform 1D grid.  Longitudinal grids are symmetric about 0 and periodic in
// the Fourier sense (right endpoint excluded); radial grids start at r = dx
// with Dirichlet zero at r = 0.
struct Grid1D {
  Axis axis;
  int n;
  double x0;
  double dx;

  double x(int j) const { return x0 + j * dx; }
  double x_min() const { return x0; }
  double x_max() const { return x0 + (n - 1) * dx; }
  double width() const { return (n - 1) * dx; }

  static Grid1D longitudinal(double half_extent, int n_points) {
    if (n_points < 16) throw GridError("grid needs at least 16 points");
    if (!(half_extent > 0.0)) throw GridError("grid extent must be positive");
    double dx = 2.0 * half_extent / n_points;
    return {Axis::longitudinal_z, n_points, -half_extent, dx};
  }
  static Grid1D radial(double r_max, int n_points) {
    if (n_points < 16) throw GridError("grid needs at least 16 points");
    if (!(r_max > 0.0)) throw GridError("grid extent must be positive");
    double dr = r_max / n_points;
    return {Axis::radial_r, n_points, dr, dr};
  }
  bool same_as(const Grid1D& o) const {
    return axis == o.axis && n == o.n && x0 == o.x0 && dx == o.dx;
  }
};

}  // namespace trapx
