#include "kgm/solver.hpp"

#include "precond.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <stdexcept>

namespace kgm {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::BoundaryApproach: return "BoundaryApproach";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::NoNewSolution: return "NoNewSolution";
  }
  return "Unknown";
}

namespace {

/// Known roots (and their negatives) of J with the shifted-inverse barrier.
struct Deflation {
  const RadialDomain* dom = nullptr;
  std::vector<GridFunction> roots;

  double factor(const GridFunction& u) const {
    double m = 1.0;
    for (const auto& r : roots) {
      long double d2 = 0.0L;
      for (int i = 0; i < dom->n; ++i) {
        const double d = u.values[i] - r.values[i];
        d2 += static_cast<long double>(dom->weights[i]) * d * d;
      }
      m *= 1.0 + 1.0 / std::max(static_cast<double>(d2), 1e-300);
    }
    return m;
  }

  /// Riesz gradient of log factor in the weighted metric.
  std::vector<double> log_grad(const GridFunction& u) const {
    std::vector<double> g(dom->n, 0.0);
    for (const auto& r : roots) {
      long double d2l = 0.0L;
      for (int i = 0; i < dom->n; ++i) {
        const double d = u.values[i] - r.values[i];
        d2l += static_cast<long double>(dom->weights[i]) * d * d;
      }
      const double d2 = std::max(static_cast<double>(d2l), 1e-300);
      // d/du log(1 + d2^-1) = -2 (u - r) / (d2^2 + d2)
      const double c = -2.0 / (d2 * d2 + d2);
      for (int i = 0; i < dom->n; ++i)
        g[i] += c * (u.values[i] - r.values[i]);
    }
    return g;
  }
};

/// Shared descent core.  With a deflation context the steps follow the
/// deflated objective while convergence is always declared on the undeflated
/// gradient; distinctness from the deflated roots is the caller's check.
SolveResult descend(const RadialDomain& dom, GridFunction u,
                    const PhysicsParams& p, const ChiField& chi,
                    const SolveOptions& opts, const Deflation* defl) {
  const int n = dom.n;
  u.bc = Bc::DirichletAtR;
  u.values[n - 1] = 0.0;

  const double sing =
      opts.singular_tol > 0.0 ? opts.singular_tol : singular_tolerance(dom);
  const double boundary_tol = opts.boundary_factor * sing;

  SolveResult out;
  out.u_star = u;

  ReducedState s;
  FunctionalReport rep;
  auto eval = [&](const GridFunction& v, ReducedState& sv,
                  FunctionalReport& rv) {
    try {
      sv = reduce(dom, p, v, chi);
    } catch (const NearSingularError&) {
      return false;
    }
    rv = evaluate_j(dom, p, sv, chi);
    return true;
  };
  if (!eval(u, s, rep)) {
    out.status = SolveStatus::BoundaryApproach;
    return out;
  }
  int accepted_count = 0;
  if (opts.trail_stride > 0) out.trail.push_back(u);
  const auto record = [&] {
    ++accepted_count;
    if (opts.trail_stride > 0 && accepted_count % opts.trail_stride == 0)
      out.trail.push_back(u);
  };

  const detail::Tridiag pre = detail::stiffness_preconditioner(dom, true);

  std::deque<double> window;
  std::vector<double> ge(n), rhs(n), dvec(n);
  GridFunction trial = u;
  ReducedState st;
  FunctionalReport rt;
  double t_start = 1.0;
  double gn = 0.0;
  int polish = 0;
  int iter = 0;
  out.status = SolveStatus::MaxIterations;

  for (; iter < opts.max_iter; ++iter) {
    const GridFunction g = gradient_j(dom, p, s, chi);
    gn = gradient_norm(dom, g);
    const double grad_tol =
        opts.grad_tol_scale * std::max(1.0, std::abs(rep.j));

    if (gn <= grad_tol) {
      if (defl != nullptr) {
        out.status = SolveStatus::Converged;
        break;
      }
      // Fold to the nonnegative representative and re-polish; J(|u|) never
      // exceeds J(u) on the grid, so this cannot undo convergence.
      GridFunction folded = u;
      bool changed = false;
      for (auto& x : folded.values)
        if (x < 0.0) {
          x = -x;
          changed = true;
        }
      if (!changed || polish >= 3) {
        out.status = SolveStatus::Converged;
        break;
      }
      ++polish;
      if (!eval(folded, st, rt)) {
        out.status = SolveStatus::Converged;
        break;
      }
      u = folded;
      s = std::move(st);
      rep = rt;
      record();
      continue;
    }

    const bool window_decreasing =
        window.empty() || window.back() < window.front();
    if (s.qu_l3 <= boundary_tol && window_decreasing) {
      out.status = SolveStatus::BoundaryApproach;
      break;
    }

    // Effective (possibly deflated) gradient in the weighted Riesz form.
    double j_current = rep.j;
    if (defl != nullptr) {
      const double m = defl->factor(u);
      const std::vector<double> lm = defl->log_grad(u);
      for (int i = 0; i < n; ++i)
        ge[i] = m * (g.values[i] + rep.j * lm[i]);
      j_current = rep.j * m;
    } else {
      for (int i = 0; i < n; ++i) ge[i] = g.values[i];
    }
    ge[n - 1] = 0.0;

    // A stationary point of the deflated objective where J itself is not
    // critical is a barrier rim: the pull of J balances the push away from
    // the known roots.  No new solution lies this way.
    double gn_eff = gn;
    if (defl != nullptr) {
      long double acc = 0.0L;
      for (int i = 0; i < n; ++i)
        acc += static_cast<long double>(dom.weights[i]) * ge[i] * ge[i];
      gn_eff = std::sqrt(static_cast<double>(acc));
      if (gn_eff <=
          opts.grad_tol_scale * std::max(1.0, std::abs(j_current))) {
        out.status = SolveStatus::NoNewSolution;
        break;
      }
    }

    if (opts.precondition) {
      for (int i = 0; i < n; ++i) rhs[i] = dom.weights[i] * ge[i];
      rhs[n - 1] = 0.0;
      pre.solve(rhs, dvec);
      for (auto& x : dvec) x = -x;
    } else {
      for (int i = 0; i < n; ++i) dvec[i] = -ge[i];
    }
    dvec[n - 1] = 0.0;

    long double slope_acc = 0.0L;
    for (int i = 0; i < n; ++i)
      slope_acc += static_cast<long double>(dom.weights[i]) * ge[i] * dvec[i];
    double slope = static_cast<double>(slope_acc);
    if (!(slope < 0.0)) { // fall back to the raw direction
      slope_acc = 0.0L;
      for (int i = 0; i < n; ++i) {
        dvec[i] = -ge[i];
        slope_acc -= static_cast<long double>(dom.weights[i]) * ge[i] * ge[i];
      }
      slope = static_cast<double>(slope_acc);
    }

    // Energy steps must beat the floating-point floor of J; otherwise the
    // Armijo test is decided by roundoff and the iteration rattles in place.
    const double noise_floor = 1e-14 * std::max(1.0, std::abs(j_current));
    bool accepted = false;
    double t = t_start;
    for (int ls = 0; ls < 60 && !accepted; ++ls, t *= 0.5) {
      for (int i = 0; i < n; ++i) trial.values[i] = u.values[i] + t * dvec[i];
      trial.values[n - 1] = 0.0;
      if (!eval(trial, st, rt)) continue; // singular crossing: shorten
      const double jt =
          defl != nullptr ? rt.j * defl->factor(trial) : rt.j;
      if (jt <= j_current + std::min(1e-4 * t * slope, -noise_floor)) {
        accepted = true;
        u = trial;
        s = std::move(st);
        rep = rt;
        window.push_back(jt);
        if (static_cast<int>(window.size()) > opts.trailing_window)
          window.pop_front();
        t_start = std::min(t * 2.0, 1e6);
        record();
      }
    }
    if (!accepted) {
      // The decrease demanded near a minimizer (~ |g|^2) is unresolvable in
      // J before the gradient tolerance is met.  Contract the first-order
      // residual along the same direction; J moves only within roundoff.
      t = 1.0;
      for (int ls = 0; ls < 60 && !accepted; ++ls, t *= 0.5) {
        for (int i = 0; i < n; ++i)
          trial.values[i] = u.values[i] + t * dvec[i];
        trial.values[n - 1] = 0.0;
        if (!eval(trial, st, rt)) continue;
        const GridFunction gt = gradient_j(dom, p, st, chi);
        double gnt;
        if (defl != nullptr) {
          const double mt = defl->factor(trial);
          const std::vector<double> lmt = defl->log_grad(trial);
          long double acc = 0.0L;
          for (int i = 0; i < n; ++i) {
            const double c = mt * (gt.values[i] + rt.j * lmt[i]);
            acc += static_cast<long double>(dom.weights[i]) * c * c;
          }
          gnt = std::sqrt(static_cast<double>(acc));
        } else {
          gnt = gradient_norm(dom, gt);
        }
        if (gnt <= 0.99 * gn_eff) {
          accepted = true;
          u = trial;
          s = std::move(st);
          rep = rt;
          t_start = 1.0;
          record();
        }
      }
      if (!accepted) break; // no progress in either metric: MaxIterations
    }
  }

  out.u_star = u;
  out.state = s;
  out.j_star = rep.j;
  out.grad_norm = gn;
  out.pde_residuals = pde_residual(dom, p, s, chi);
  out.iterations = iter;
  return out;
}

} // namespace

SolveResult minimize(const RadialDomain& dom, const GridFunction& u0,
                     const PhysicsParams& p, const ChiField& chi,
                     const DomainConstants& dc, const SolveOptions& opts) {
  (void)dc; // the existence gate c1 > 0 is advisory; descent runs either way
  return descend(dom, u0, p, chi, opts, nullptr);
}

SolveResult deflate_and_resolve(const RadialDomain& dom,
                                const std::vector<SolveResult>& found,
                                const PhysicsParams& p, const ChiField& chi,
                                const DomainConstants& dc,
                                const SolveOptions& opts) {
  (void)dc;
  if (found.empty())
    throw std::invalid_argument(
        "deflate_and_resolve: need at least one known solution");

  Deflation defl;
  defl.dom = &dom;
  for (const auto& r : found) {
    defl.roots.push_back(r.u_star);
    GridFunction neg = r.u_star;
    for (auto& x : neg.values) x = -x;
    defl.roots.push_back(std::move(neg));
  }

  const GridFunction& u_known = found.front().u_star;
  const double known_norm = lp_norm(dom, u_known, 2.0);
  const double distinct_tol = opts.distinct_tol_scale * known_norm;
  auto is_distinct = [&](const GridFunction& u) {
    for (const auto& r : defl.roots) {
      long double d2 = 0.0L;
      for (int i = 0; i < dom.n; ++i) {
        const double d = u.values[i] - r.values[i];
        d2 += static_cast<long double>(dom.weights[i]) * d * d;
      }
      if (std::sqrt(static_cast<double>(d2)) < distinct_tol) return false;
    }
    return true;
  };

  // Starts: an oscillatory mode at the known solution's scale, the known
  // solution pushed along that mode, a perturbed negative, then random
  // admissible fields.
  constexpr double pi = 3.14159265358979323846;
  const double R = dom.radius;
  const double amp = std::max(known_norm, 0.1);
  auto mode = [&](int k) {
    return GridFunction::sample(dom, Bc::DirichletAtR, [&](double r) {
      const double x = k * pi * r / R;
      return x == 0.0 ? 1.0 : std::sin(x) / x;
    });
  };
  std::vector<GridFunction> starts;
  {
    GridFunction osc = mode(2);
    const double nrm = lp_norm(dom, osc, 2.0);
    for (auto& x : osc.values) x *= 2.0 * amp / nrm;
    starts.push_back(osc);

    GridFunction pushed = u_known;
    for (int i = 0; i < dom.n; ++i)
      pushed.values[i] += 1.5 * amp / nrm * osc.values[i];
    starts.push_back(pushed);

    GridFunction neg = u_known;
    const GridFunction bump = mode(3);
    for (int i = 0; i < dom.n; ++i)
      neg.values[i] = -neg.values[i] + 0.5 * amp * bump.values[i];
    starts.push_back(std::move(neg));
  }
  std::mt19937_64 rng(871553);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  while (static_cast<int>(starts.size()) < opts.deflation_starts) {
    double c[4];
    for (auto& x : c) x = coef(rng);
    GridFunction rnd = GridFunction::zeros(dom.n, Bc::DirichletAtR);
    for (int k = 0; k < 4; ++k) {
      const GridFunction mk = mode(k + 1);
      for (int i = 0; i < dom.n; ++i) rnd.values[i] += c[k] * mk.values[i];
    }
    const double nrm = lp_norm(dom, rnd, 2.0);
    if (nrm == 0.0) continue;
    for (auto& x : rnd.values) x *= 1.5 * amp / nrm;
    starts.push_back(std::move(rnd));
  }

  SolveResult last;
  last.status = SolveStatus::MaxIterations;
  bool any_collapse = false;
  for (int k = 0; k < std::min<int>(opts.deflation_starts, starts.size());
       ++k) {
    SolveResult r = descend(dom, starts[k], p, chi, opts, &defl);
    if (r.status == SolveStatus::Converged) {
      if (is_distinct(r.u_star)) return r;
      any_collapse = true;
    } else if (r.status == SolveStatus::NoNewSolution ||
               r.status == SolveStatus::BoundaryApproach) {
      any_collapse = true; // blocked by a known root or escaped
    }
    last = std::move(r);
  }
  last.status = any_collapse ? SolveStatus::NoNewSolution
                             : SolveStatus::MaxIterations;
  return last;
}

std::pair<double, double> pde_residual(const RadialDomain& dom,
                                       const PhysicsParams& p,
                                       const ReducedState& s,
                                       const ChiField& chi) {
  const int n = dom.n;
  if (s.u.size() != n || s.phi.size() != n) return {0.0, 0.0};

  const std::vector<double> su = stiffness_apply(dom, s.u);
  long double num1 = 0.0L, den1a = 0.0L, den1b = 0.0L;
  for (int i = 0; i + 1 < n; ++i) { // boundary row is the Dirichlet constraint
    const double lap = su[i] / dom.weights[i];
    const double c = p.omega + p.q.values.values[i] *
                                   (s.phi.values[i] + chi.values.values[i]);
    const double react = (p.m * p.m - c * c) * s.u.values[i];
    const long double w = dom.weights[i];
    num1 += w * (lap + react) * (lap + react);
    den1a += w * lap * lap;
    den1b += w * react * react;
  }
  const double den1 = std::sqrt(static_cast<double>(den1a)) +
                      std::sqrt(static_cast<double>(den1b));
  const double r1 =
      den1 > 0.0 ? std::sqrt(static_cast<double>(num1)) / den1 : 0.0;

  const GridFunction rho = compute_rho(dom, p, s.u, chi);
  const std::vector<double> sphi = stiffness_apply(dom, s.phi);
  long double num2 = 0.0L, den2a = 0.0L, den2b = 0.0L, den2c = 0.0L;
  for (int i = 0; i < n; ++i) {
    const double b = p.q.values.values[i] * s.u.values[i];
    const double mass = dom.weights[i] * b * b * s.phi.values[i];
    const double load = dom.weights[i] * rho.values[i];
    const double row = sphi[i] + mass - load;
    num2 += static_cast<long double>(row) * row;
    den2a += static_cast<long double>(sphi[i]) * sphi[i];
    den2b += static_cast<long double>(mass) * mass;
    den2c += static_cast<long double>(load) * load;
  }
  const double den2 = std::sqrt(static_cast<double>(den2a)) +
                      std::sqrt(static_cast<double>(den2b)) +
                      std::sqrt(static_cast<double>(den2c));
  const double r2 =
      den2 > 0.0 ? std::sqrt(static_cast<double>(num2)) / den2 : 0.0;
  return {r1, r2};
}

GridFunction default_start(const RadialDomain& dom, const PhysicsParams& p,
                           double qu3_target) {
  GridFunction u = GridFunction::sample(dom, Bc::DirichletAtR, [&](double r) {
    const double x = r / dom.radius;
    return (1.0 - x) * (1.0 + x);
  });
  const double qu3 = coupling_l3(dom, p, u);
  if (qu3 > 0.0)
    for (auto& x : u.values) x *= qu3_target / qu3;
  return u;
}

} // namespace kgm
