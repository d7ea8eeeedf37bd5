#pragma once

#include <utility>
#include <vector>

#include "kgm/functional.hpp"

namespace kgm {

enum class SolveStatus {
  Converged,        ///< gradient below tolerance, residuals verified
  BoundaryApproach, ///< |qu|_3 fell to the admissibility floor while J kept dropping
  MaxIterations,    ///< budget exhausted (or the line search stalled)
  NoNewSolution,    ///< deflated search only: every restart collapsed onto known roots
};

const char* to_string(SolveStatus s);

struct SolveOptions {
  int max_iter = 10000;
  double grad_tol_scale = 1e-8; ///< grad_tol = scale * max(1, |J|)
  double pde_tol = 1e-6;
  double singular_tol = -1.0;   ///< <= 0: use the domain default
  double boundary_factor = 1e3; ///< boundary_tol = factor * singular_tol
  int trailing_window = 20;     ///< accepted steps consulted by the boundary test
  bool precondition = true;     ///< descend in the Dirichlet-inverse metric
  double distinct_tol_scale = 1e-3; ///< distinct_tol = scale * |u_known|_2
  int deflation_starts = 4;
  int trail_stride = 0; ///< > 0: record every k-th accepted iterate of u
};

/// Outcome of one descent run.  For BoundaryApproach before any admissible
/// evaluation, the state is empty and the scalars are zero.
struct SolveResult {
  GridFunction u_star;
  ReducedState state;
  double j_star = 0.0;
  double grad_norm = 0.0;
  /// Relative residuals of the two field equations at (u_star, phi): the
  /// first measures criticality in u, the second is guaranteed small by
  /// construction of the reduced potential.
  std::pair<double, double> pde_residuals{0.0, 0.0};
  SolveStatus status = SolveStatus::MaxIterations;
  int iterations = 0;
  /// Recorded iterates (including the start), when trail_stride > 0.
  std::vector<GridFunction> trail;
};

/// Minimizes J from u0 by preconditioned gradient descent with Armijo
/// backtracking.  Steps accepted by the energy test never increase J; once
/// the attainable decrease falls below the floating-point floor of J the
/// loop contracts the gradient norm instead, which moves J only within
/// roundoff.  On first-order
/// convergence the iterate is replaced by its absolute value and re-polished
/// (J(|u|) <= J(u) on the grid), so a Converged result has min nodal value
/// >= -1e-12.  A NearSingular evaluation or |qu|_3 falling below
/// boundary_tol while J is still decreasing ends the run as
/// BoundaryApproach: the descent is escaping through the admissibility
/// boundary, which is the no-minimizer signature.  C1 <= 0 in dc does not
/// abort the run; existence is simply not promised there.
SolveResult minimize(const RadialDomain& dom, const GridFunction& u0,
                     const PhysicsParams& p, const ChiField& chi,
                     const DomainConstants& dc, const SolveOptions& opts = {});

/// Searches for a critical point distinct from every entry of `found` (and
/// their negatives) by minimizing the deflated objective
///   J(u) * prod_k (1 + 1 / |u - u_k|_2^2) (1 + 1 / |u + u_k|_2^2)
/// from several internal starts.  A Converged result satisfies the
/// undeflated gradient tolerance and is at least distinct_tol away from all
/// known roots; otherwise the status is NoNewSolution.  Throws
/// std::invalid_argument when `found` is empty.
SolveResult deflate_and_resolve(const RadialDomain& dom,
                                const std::vector<SolveResult>& found,
                                const PhysicsParams& p, const ChiField& chi,
                                const DomainConstants& dc,
                                const SolveOptions& opts = {});

/// Relative discrete residuals of the two equations of the system at
/// (s.u, s.phi), both measured against the conservative operator rows.
std::pair<double, double> pde_residual(const RadialDomain& dom,
                                       const PhysicsParams& p,
                                       const ReducedState& s,
                                       const ChiField& chi);

/// Canonical positive starting guess: the parabolic cap 1 - (r/R)^2 scaled
/// so that |qu|_3 = qu3_target, placing it well inside the admissible set.
GridFunction default_start(const RadialDomain& dom, const PhysicsParams& p,
                           double qu3_target = 0.5);

} // namespace kgm
