#include "kgm/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tridiag.hpp"

namespace kgm {

namespace {

constexpr double four_pi = 4.0 * std::numbers::pi;

std::vector<double> face_conductances(const RadialDomain& dom) {
  const double h = dom.spacing();
  const double scale = four_pi / (h * h);
  std::vector<double> cond(dom.n - 1);
  for (int i = 0; i + 1 < dom.n; ++i) cond[i] = scale * dom.face_r2_integral[i];
  return cond;
}

// Forward/back substitution for an m-row Thomas factorization.
void lu_pass(int m, const std::vector<long double>& mult,
             const std::vector<long double>& diag,
             const std::vector<long double>& upper, const long double* in,
             long double* out) {
  std::vector<long double> y(m);
  y[0] = in[0];
  for (int i = 1; i < m; ++i) y[i] = in[i] - mult[i] * y[i - 1];
  long double t = y[m - 1] / diag[m - 1];
  out[m - 1] = t;
  for (int i = m - 1; i-- > 0;) {
    t = (y[i] - upper[i] * t) / diag[i];
    out[i] = t;
  }
}

} // namespace

double singular_tolerance(const RadialDomain& dom) {
  return 1e-8 * std::cbrt(dom.volume);
}

BoundaryData BoundaryData::make(double alpha, const RadialDomain& dom) {
  BoundaryData bd;
  bd.alpha = alpha;
  bd.total_charge = alpha * dom.surface;
  bd.alpha_surrogate_norm = std::abs(alpha) * std::sqrt(dom.surface);
  return bd;
}

ChiField solve_chi(const BoundaryData& bd, const RadialDomain& dom) {
  const int n = dom.n;
  const auto cond = face_conductances(dom);
  const double source = bd.total_charge / dom.volume; // Delta chi = A/|Omega|

  // Conservative rows of -Delta with the flux alpha entering at r = R.
  // The last node is pinned to zero (pure Neumann kernel) and the system is
  // exactly compatible, so the dropped row is satisfied automatically.
  detail::Tridiag t;
  t.resize(n - 1);
  for (int i = 0; i + 1 < n; ++i) {
    long double d = 0.0L;
    if (i > 0) {
      d += cond[i - 1];
      t.mult[i] = -cond[i - 1];
      t.upper[i - 1] = -cond[i - 1];
    }
    d += cond[i];
    t.diag[i] = d;
  }
  t.factor();

  std::vector<long double> rhs(n - 1);
  for (int i = 0; i + 1 < n; ++i)
    rhs[i] = -static_cast<long double>(source) * dom.weights[i];

  ChiField chi;
  chi.values = GridFunction::zeros(n, Bc::NeumannBoth);
  t.solve(rhs, chi.values.values);
  chi.values.values[n - 1] = 0.0;

  const double m = mean(dom, chi.values);
  for (double& v : chi.values.values) v -= m;

  chi.max_abs = lp_norm(dom, chi.values, lp_infinity);
  return chi;
}

ScreenedOperator::ScreenedOperator(const RadialDomain& dom, const GridFunction& b) {
  n_ = dom.n;
  b_l3_ = lp_norm(dom, b, 3.0);
  if (b_l3_ <= singular_tolerance(dom))
    throw NearSingularError("ScreenedOperator: |b|_3 below singular tolerance");

  b2_.resize(n_);
  for (int i = 0; i < n_; ++i) b2_[i] = b.values[i] * b.values[i];
  w_ = dom.weights;
  cond_ = face_conductances(dom);

  lu_diag_.assign(n_, 0.0L);
  lu_upper_.assign(n_, 0.0L);
  lu_mult_.assign(n_, 0.0L);
  for (int i = 0; i < n_; ++i) {
    long double d = static_cast<long double>(w_[i]) * b2_[i];
    if (i > 0) {
      d += cond_[i - 1];
      lu_mult_[i] = -cond_[i - 1];
      lu_upper_[i - 1] = -cond_[i - 1];
    }
    if (i + 1 < n_) d += cond_[i];
    lu_diag_[i] = d;
  }
  // Thomas factorization in place.
  for (int i = 1; i < n_; ++i) {
    const long double m = lu_mult_[i] / lu_diag_[i - 1];
    lu_mult_[i] = m;
    lu_diag_[i] -= m * lu_upper_[i - 1];
  }

  // Pinned principal block (last node held at zero).  Strictly dominant at
  // its final row regardless of b, so this factorization never degenerates;
  // together with the Schur scalar below it carries the split solve that
  // takes over when the full elimination loses the near-constant mode.
  const int m = n_ - 1;
  p_diag_.assign(m, 0.0L);
  p_upper_.assign(m, 0.0L);
  p_mult_.assign(m, 0.0L);
  for (int i = 0; i < m; ++i) {
    long double d = static_cast<long double>(w_[i]) * b2_[i];
    if (i > 0) {
      d += cond_[i - 1];
      p_mult_[i] = -cond_[i - 1];
      p_upper_[i - 1] = -cond_[i - 1];
    }
    d += cond_[i];
    p_diag_[i] = d;
  }
  for (int i = 1; i < m; ++i) {
    const long double t = p_mult_[i] / p_diag_[i - 1];
    p_mult_[i] = t;
    p_diag_[i] -= t * p_upper_[i - 1];
  }

  // z solves the pinned block against the screening mass; the Schur scalar
  // is w b^2 at the pin plus the face conductance times z there.  Both are
  // sums of positive terms (the pinned block is an M-matrix, so z >= 0):
  // no cancellation at any conditioning.
  z_.assign(m, 0.0L);
  {
    std::vector<long double> rhs(m);
    for (int i = 0; i < m; ++i)
      rhs[i] = static_cast<long double>(w_[i]) * b2_[i];
    lu_pass(m, p_mult_, p_diag_, p_upper_, rhs.data(), z_.data());
  }
  schur_ = static_cast<long double>(w_[n_ - 1]) * b2_[n_ - 1] +
           static_cast<long double>(cond_[n_ - 2]) * z_[m - 1];
  if (!(schur_ > 0.0L))
    throw NearSingularError("ScreenedOperator: screening mass vanished");
}

GridFunction ScreenedOperator::solve(const GridFunction& rho) const {
  const int m = n_ - 1;
  std::vector<long double> f(n_), x(n_), r(n_), delta(n_);
  for (int i = 0; i < n_; ++i)
    f[i] = static_cast<long double>(w_[i]) * rho.values[i];

  const auto full_solve = [&](const std::vector<long double>& in,
                              std::vector<long double>& out) {
    lu_pass(n_, lu_mult_, lu_diag_, lu_upper_, in.data(), out.data());
  };
  // Split solve: x = psi + c with the last node carrying the constant.  The
  // pinned block gives psi up to the scalar, which the last assembled row
  // determines through the Schur scalar.
  const auto split_solve = [&](const std::vector<long double>& in,
                               std::vector<long double>& out) {
    std::vector<long double> y(m);
    lu_pass(m, p_mult_, p_diag_, p_upper_, in.data(), y.data());
    const long double c =
        (in[n_ - 1] + static_cast<long double>(cond_[n_ - 2]) * y[m - 1]) /
        schur_;
    for (int i = 0; i < m; ++i) out[i] = y[i] - c * z_[i] + c;
    out[n_ - 1] = c;
  };
  // Residual with each face flux evaluated once: the constant-mode
  // projection of the flux noise cancels exactly, so refinement can see
  // (and repair) errors in the near-constant mode.
  const auto residual_ld = [&](const std::vector<long double>& xx,
                               std::vector<long double>& rr) {
    for (int i = 0; i < n_; ++i)
      rr[i] = f[i] - static_cast<long double>(w_[i]) * b2_[i] * xx[i];
    for (int i = 0; i + 1 < n_; ++i) {
      const long double flux =
          static_cast<long double>(cond_[i]) * (xx[i] - xx[i + 1]);
      rr[i] -= flux;
      rr[i + 1] += flux;
    }
  };
  // Refine in place; returns true when the result is finite and the last
  // correction was small, i.e. the factorization behind `inner` can be
  // trusted for this right-hand side.  NaN poisons max() silently, so
  // finiteness is scanned explicitly.
  const auto refine = [&](const auto& inner) {
    long double dmax = 0.0L, xmax = 0.0L;
    for (int pass = 0; pass < 3; ++pass) {
      residual_ld(x, r);
      inner(r, delta);
      dmax = 0.0L;
      xmax = 0.0L;
      for (int i = 0; i < n_; ++i) {
        x[i] += delta[i];
        dmax = std::max(dmax, std::abs(delta[i]));
        xmax = std::max(xmax, std::abs(x[i]));
      }
      if (dmax <= 1e-18L * xmax) break;
    }
    for (int i = 0; i < n_; ++i)
      if (!std::isfinite(static_cast<double>(x[i]))) return false;
    return dmax <= 1e-13L * xmax;
  };

  // Direct elimination first: in the ordinary regime it refines to machine
  // terms in one pass.  When the screening mass is tiny the elimination can
  // lose the near-constant mode beyond what refinement recovers; the split
  // solve is immune (its only small denominator is the cancellation-free
  // Schur scalar), so redo the solve through it.
  full_solve(f, x);
  if (!refine(full_solve)) {
    split_solve(f, x);
    refine(split_solve);
  }

  GridFunction phi = GridFunction::zeros(n_, Bc::NeumannBoth);
  for (int i = 0; i < n_; ++i) phi.values[i] = static_cast<double>(x[i]);
  return phi;
}

double ScreenedOperator::residual(const GridFunction& phi, const GridFunction& rho) const {
  std::vector<long double> row(n_, 0.0L);
  for (int i = 0; i + 1 < n_; ++i) {
    const long double flux =
        static_cast<long double>(cond_[i]) * (static_cast<long double>(phi.values[i]) - phi.values[i + 1]);
    row[i] += flux;
    row[i + 1] -= flux;
  }
  long double num = 0.0L, f2 = 0.0L, x2 = 0.0L, anorm = 0.0L;
  for (int i = 0; i < n_; ++i) {
    const long double wi = w_[i];
    row[i] += wi * b2_[i] * phi.values[i];
    const long double f = wi * rho.values[i];
    num += (row[i] - f) * (row[i] - f);
    f2 += f * f;
    x2 += static_cast<long double>(phi.values[i]) * phi.values[i];
    long double rowsum = wi * b2_[i];
    if (i > 0) rowsum += 2.0L * cond_[i - 1];
    if (i + 1 < n_) rowsum += 2.0L * cond_[i];
    anorm = std::max(anorm, rowsum);
  }
  const long double den = anorm * std::sqrt(x2) + std::sqrt(f2);
  if (den == 0.0L) return static_cast<double>(std::sqrt(num));
  return static_cast<double>(std::sqrt(num) / den);
}

std::pair<double, double> ScreenedOperator::envelope_slack(const GridFunction& h) const {
  GridFunction rho = GridFunction::zeros(n_, Bc::NeumannBoth);
  for (int i = 0; i < n_; ++i) rho.values[i] = b2_[i] * h.values[i];
  const GridFunction phi = solve(rho);
  const auto [hmin, hmax] = std::minmax_element(h.values.begin(), h.values.end());
  const auto [pmin, pmax] = std::minmax_element(phi.values.begin(), phi.values.end());
  return {*pmin - *hmin, *hmax - *pmax};
}

bool ScreenedOperator::is_m_matrix() const {
  for (int i = 0; i + 1 < n_; ++i)
    if (!(cond_[i] > 0.0)) return false;
  // Weak row dominance with nonnegative screening mass; strict somewhere.
  bool strict = false;
  for (int i = 0; i < n_; ++i) {
    const double mass = w_[i] * b2_[i];
    if (mass < 0.0) return false;
    if (mass > 0.0) strict = true;
  }
  return strict;
}

} // namespace kgm
