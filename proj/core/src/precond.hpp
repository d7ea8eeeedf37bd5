#pragma once

#include "kgm/grid.hpp"
#include "tridiag.hpp"

#include <numbers>
#include <vector>

namespace kgm::detail {

/// Factorized stiffness surrogate used to precondition ratio ascents and the
/// energy descent.  pin_last replaces the boundary row by the identity
/// (Dirichlet metric); otherwise a lumped-mass shift of 1/|Omega| keeps the
/// free (Neumann) matrix invertible.
inline Tridiag stiffness_preconditioner(const RadialDomain& dom,
                                        bool pin_last) {
  const int n = dom.n;
  Tridiag t;
  t.resize(n);
  const double h = dom.spacing();
  const double scale = 4.0 * std::numbers::pi / (h * h);
  std::vector<double> cond(n - 1);
  for (int i = 0; i + 1 < n; ++i) cond[i] = scale * dom.face_r2_integral[i];
  for (int i = 0; i < n; ++i) {
    long double d = pin_last ? 0.0L : dom.weights[i] / dom.volume;
    if (i > 0) {
      d += cond[i - 1];
      t.mult[i] = -cond[i - 1];
      t.upper[i - 1] = -cond[i - 1];
    }
    if (i + 1 < n) d += cond[i];
    t.diag[i] = d;
  }
  if (pin_last) {
    t.diag[n - 1] = 1.0L;
    t.mult[n - 1] = 0.0L;
    t.upper[n - 2] = 0.0L;
  }
  t.factor();
  return t;
}

} // namespace kgm::detail
