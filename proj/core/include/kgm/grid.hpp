#pragma once

#include <functional>
#include <vector>

namespace kgm {

/// Boundary tag of a radial grid function on [0, R].
///
/// DirichletAtR functions vanish at r = R (matter fields).
/// NeumannBoth functions carry no value constraint; derivative closures at
/// r = 0 and r = R use symmetry / flux ghost nodes (potentials, coefficients).
enum class Bc { DirichletAtR, NeumannBoth };

/// Uniform radial grid on the ball of radius R in R^3.
///
/// Integrals over the ball reduce to 4*pi * int_0^R f(r) r^2 dr.  The
/// quadrature weights integrate the piecewise-linear interpolant of f against
/// the r^2 measure exactly, so constants and linear profiles are integrated
/// without discretization error and sum(weights) == volume to roundoff.
///
/// Immutable after construction; safe to share across threads.
struct RadialDomain {
  double radius = 0.0;
  int n = 0;                            ///< node count, >= 16
  std::vector<double> nodes;            ///< r_i = R * i / (n-1)
  std::vector<double> weights;          ///< quadrature weights, all positive
  std::vector<double> face_r2_integral; ///< int_{r_i}^{r_{i+1}} r^2 dr, size n-1
  double volume = 0.0;                  ///< 4/3 pi R^3
  double surface = 0.0;                 ///< 4 pi R^2

  /// Throws std::invalid_argument for R <= 0 or n < 16.
  static RadialDomain make(double radius, int n);

  double spacing() const { return nodes[1] - nodes[0]; }
};

/// Nodal values of a radial function together with its boundary tag.
struct GridFunction {
  std::vector<double> values;
  Bc bc = Bc::NeumannBoth;

  static GridFunction zeros(int n, Bc bc);
  /// Samples f(r) at the nodes; for DirichletAtR the last value is forced to 0.
  static GridFunction sample(const RadialDomain& dom, Bc bc,
                             const std::function<double(double)>& f);

  int size() const { return static_cast<int>(values.size()); }
  double operator[](int i) const { return values[i]; }
  double& operator[](int i) { return values[i]; }
};

/// int_Omega f dx by the domain quadrature.
double integrate(const RadialDomain& dom, const GridFunction& f);

/// integrate(f) / |Omega|.
double mean(const RadialDomain& dom, const GridFunction& f);

/// L^p norm, p in [1, inf]; pass lp_infinity for the sup norm.
/// Throws std::invalid_argument for p < 1.
double lp_norm(const RadialDomain& dom, const GridFunction& f, double p);

inline constexpr double lp_infinity = -1.0; ///< sentinel accepted by lp_norm

/// Dirichlet energy int_Omega |grad f|^2 dx in the conservative face form
/// sum_faces (4 pi / h^2) (int r^2 dr) (f_{i+1} - f_i)^2.  This is the
/// bilinear form of the assembled elliptic operators, so energy identities
/// involving solver output hold to solver precision, not stencil mismatch.
double gradient_energy(const RadialDomain& dom, const GridFunction& f);

/// Face-form bilinear pairing int grad f . grad g dx (same form as above).
double gradient_pairing(const RadialDomain& dom, const GridFunction& f,
                        const GridFunction& g);

/// Applies the stiffness form row-wise: (Sf)_i = sum_faces flux differences.
/// Rows sum to zero exactly (flux form), so S * constant == 0 in floating
/// point.  The boundary tag is ignored; callers impose their own closure.
std::vector<double> stiffness_apply(const RadialDomain& dom,
                                    const GridFunction& f);

/// Full H^1 surrogate norm (|grad f|_2^2 + mean(f)^2)^{1/2}.
double h1_norm(const RadialDomain& dom, const GridFunction& f);

/// Pointwise radial Laplacian f'' + (2/r) f'.
///
/// Second-order centered stencil in the interior, the 3 f''(0) limit with a
/// symmetry ghost at r = 0, a reflected ghost (zero flux) at r = R for
/// NeumannBoth, and a one-sided second-order stencil at r = R for
/// DirichletAtR.  Output carries the NeumannBoth tag (no constraint).
GridFunction apply_laplacian(const RadialDomain& dom, const GridFunction& f);

} // namespace kgm
