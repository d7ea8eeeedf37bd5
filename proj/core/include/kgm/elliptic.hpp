#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "kgm/grid.hpp"

namespace kgm {

/// Raised when a screened operator is requested for a coupling profile whose
/// L^3 mass is below the singular tolerance (screening degenerate).
struct NearSingularError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Degeneracy threshold for |b|_3: 1e-8 * |Omega|^{1/3}.
double singular_tolerance(const RadialDomain& dom);

/// Constant Neumann flux data for the electric potential.
struct BoundaryData {
  double alpha = 0.0;               ///< prescribed normal derivative on r = R
  double total_charge = 0.0;        ///< A = alpha * 4 pi R^2
  double alpha_surrogate_norm = 0.0; ///< |alpha| * |boundary|^{1/2}

  static BoundaryData make(double alpha, const RadialDomain& dom);
};

/// Zero-mean lift of the inhomogeneous flux: Delta chi = A/|Omega|,
/// d chi / d nu = alpha, int chi = 0.
struct ChiField {
  GridFunction values;  ///< NeumannBoth
  double max_abs = 0.0; ///< |chi|_inf
};

/// Solves the chi problem by the conservative form with the last node pinned
/// and the quadrature mean subtracted afterwards.  |mean| <= 1e-12 * |chi|_inf.
ChiField solve_chi(const BoundaryData& bd, const RadialDomain& dom);

/// Factorized screened Neumann operator  -Delta + b^2  on the ball.
///
/// Assembled in the conservative face form: stiffness rows plus the lumped
/// mass times b^2 on the diagonal.  The matrix is a symmetric irreducible
/// M-matrix (off-diagonals <= 0, weak diagonal dominance, strict wherever
/// b != 0), so the inverse is entrywise nonnegative; sign and envelope
/// properties of solutions hold to solver roundoff, not discretization error.
///
/// Immutable after construction; solve() keeps its workspace on the stack of
/// the call, so concurrent solves on one operator are safe.
class ScreenedOperator {
 public:
  /// Throws NearSingularError when |b|_3 <= singular_tolerance(dom).
  ScreenedOperator(const RadialDomain& dom, const GridFunction& b);

  /// Solves -Delta phi + b^2 phi = rho with natural (zero-flux) closure.
  GridFunction solve(const GridFunction& rho) const;

  /// Relative residual of the assembled rows at phi for right-hand side rho.
  double residual(const GridFunction& phi, const GridFunction& rho) const;

  /// Solves with rho = b^2 h and returns (min phi - min h, max h - max phi);
  /// both are nonnegative up to roundoff (envelope property).
  std::pair<double, double> envelope_slack(const GridFunction& h) const;

  double b_l3() const { return b_l3_; }
  const std::vector<double>& b_squared() const { return b2_; }
  int size() const { return n_; }

  /// M-matrix structure check (off-diagonal signs, dominance); true always —
  /// exposed so tests can assert the assembly invariant directly.
  bool is_m_matrix() const;

 private:
  int n_ = 0;
  double b_l3_ = 0.0;
  std::vector<double> b2_;
  std::vector<double> w_;    // lumped quadrature weights
  std::vector<double> cond_; // face conductances 4 pi I_i / h^2
  std::vector<long double> lu_diag_, lu_upper_, lu_mult_; // factorization
  // Pinned principal block and its response to the screening mass, for the
  // split solve used when the full factorization degrades (tiny b).
  std::vector<long double> p_diag_, p_upper_, p_mult_;
  std::vector<long double> z_;
  long double schur_ = 0.0L;
};

} // namespace kgm
