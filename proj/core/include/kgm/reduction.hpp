#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "kgm/elliptic.hpp"
#include "kgm/grid.hpp"

namespace kgm {

/// Spatial coupling profile q (nonzero in L^6).
///
/// has_gap records whether every nodal value is either exactly zero or at
/// least `gap` in magnitude; each node carries positive measure, so the scan
/// is the discrete form of the gap condition.
struct CouplingField {
  GridFunction values;
  std::optional<double> gap; ///< q0
  bool has_gap = false;
  double l6 = 0.0; ///< |q|_6

  /// Throws std::invalid_argument if q vanishes identically or gap <= 0.
  static CouplingField make(const RadialDomain& dom, GridFunction values,
                            std::optional<double> gap);
};

/// Model parameters: masses, frequency, coupling, flux data.
struct PhysicsParams {
  double m = 1.0;
  double omega = 0.5;
  CouplingField q;
  BoundaryData bd;

  /// |omega| <= |m| together with the coupling gap.
  bool case_gap() const { return std::abs(omega) <= std::abs(m) && q.has_gap; }
  /// |omega| <= |m| / sqrt(2), no gap needed.
  bool case_half() const { return omega * omega * 2.0 <= m * m; }
};

/// |q u|_3, the monitor for the admissible set {u : q u != 0}; its vanishing
/// is exactly the degeneracy rejected by the screened operator.
double coupling_l3(const RadialDomain& dom, const PhysicsParams& p,
                   const GridFunction& u);

/// Source of the reduced potential: rho_u = A/|Omega| - (qu)^2 chi - omega q u^2.
GridFunction compute_rho(const RadialDomain& dom, const PhysicsParams& p,
                         const GridFunction& u, const ChiField& chi);

/// Reduced potential and its three components, all produced by one
/// factorization of -Delta + (qu)^2:
///   phi  solves against rho_u,
///   xi   against -(qu)^2 chi,
///   eta  against  A/|Omega|,
///   theta against -q u^2,
/// so phi = xi + eta + omega theta holds nodewise to solver precision.
struct ReducedState {
  GridFunction u;
  GridFunction phi, xi, eta, theta;
  double xi_bar = 0.0, eta_bar = 0.0, theta_bar = 0.0;
  double qu_l3 = 0.0;
  double decomposition_residual = 0.0; ///< |phi - (xi + eta + omega theta)|_inf / |phi|_inf
};

/// Runs the four screened solves and checks the state invariants:
/// decomposition residual, sign of A eta, |xi|_inf <= |chi|_inf, and the
/// gap bound |theta|_inf <= 1/q0 when the coupling has a gap.  Throws
/// NearSingularError when |qu|_3 is below the singular tolerance and
/// std::runtime_error if an invariant is violated beyond safety margins.
ReducedState reduce(const RadialDomain& dom, const PhysicsParams& p,
                    const GridFunction& u, const ChiField& chi);

/// Relative residuals of the three cross-solve identities
///   int (qu)^2 chi theta = int q u^2 xi,
///   A xi_bar  = -int (qu)^2 chi eta,
///   A theta_bar = -int q u^2 eta.
std::array<double, 3> mixed_identities(const RadialDomain& dom,
                                       const PhysicsParams& p,
                                       const ReducedState& s,
                                       const ChiField& chi);

} // namespace kgm
