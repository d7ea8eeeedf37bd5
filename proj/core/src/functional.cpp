#include "kgm/functional.hpp"

#include "precond.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

namespace kgm {

namespace {

constexpr double pi = 3.14159265358979323846;

double sinc_mode(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

} // namespace

double action(const RadialDomain& dom, const PhysicsParams& p,
              const GridFunction& u, const GridFunction& phi,
              const ChiField& chi) {
  long double mass = 0.0L;
  for (int i = 0; i < dom.n; ++i) {
    const double c =
        p.omega + p.q.values.values[i] * (phi.values[i] + chi.values.values[i]);
    mass += static_cast<long double>(dom.weights[i]) *
            (p.m * p.m - c * c) * u.values[i] * u.values[i];
  }
  return gradient_energy(dom, u) + static_cast<double>(mass) -
         gradient_energy(dom, phi) +
         2.0 * p.bd.total_charge * mean(dom, phi);
}

FunctionalReport evaluate_j(const RadialDomain& dom, const PhysicsParams& p,
                            const ReducedState& s, const ChiField& chi) {
  FunctionalReport r;
  r.j = action(dom, p, s.u, s.phi, chi);
  r.qu_l3 = s.qu_l3;

  const double m2w2 = p.m * p.m - p.omega * p.omega;
  long double mass = 0.0L, coupling = 0.0L, chi_sq = 0.0L, chi_cross = 0.0L,
              drag = 0.0L;
  for (int i = 0; i < dom.n; ++i) {
    const long double w = dom.weights[i];
    const double qv = p.q.values.values[i];
    const double uv = s.u.values[i];
    const double qu2 = qv * uv * uv;
    const double b2 = qv * uv * qv * uv;
    const double cv = chi.values.values[i];
    mass += w * m2w2 * uv * uv;
    coupling += w * qu2 * (cv + s.xi.values[i]);
    chi_sq += w * b2 * cv * cv;
    chi_cross += w * b2 * cv * s.xi.values[i];
    drag += w * qu2 * s.theta.values[i];
  }
  r.terms.grad_energy = gradient_energy(dom, s.u);
  r.terms.mass = static_cast<double>(mass);
  r.terms.lift_coupling = -2.0 * p.omega * static_cast<double>(coupling);
  r.terms.lift_mean = 2.0 * p.bd.total_charge * s.xi_bar;
  r.terms.chi_square = -static_cast<double>(chi_sq);
  r.terms.chi_cross = -static_cast<double>(chi_cross);
  r.terms.theta_drag = -p.omega * p.omega * static_cast<double>(drag);

  r.j_tilde = r.terms.total();
  r.a_eta_bar = p.bd.total_charge * s.eta_bar;
  r.two_omega_a_theta_bar = 2.0 * p.omega * p.bd.total_charge * s.theta_bar;

  const double decomposed = r.j_tilde + r.a_eta_bar + r.two_omega_a_theta_bar;
  const double scale = std::max(std::abs(r.j), std::abs(decomposed));
  r.route_gap = scale > 0.0 ? std::abs(r.j - decomposed) / scale : 0.0;
  return r;
}

FunctionalReport evaluate_j(const RadialDomain& dom, const PhysicsParams& p,
                            const GridFunction& u, const ChiField& chi) {
  return evaluate_j(dom, p, reduce(dom, p, u, chi), chi);
}

GridFunction gradient_j(const RadialDomain& dom, const PhysicsParams& p,
                        const ReducedState& s, const ChiField& chi) {
  const std::vector<double> su = stiffness_apply(dom, s.u);
  GridFunction g = GridFunction::zeros(dom.n, Bc::DirichletAtR);
  for (int i = 0; i + 1 < dom.n; ++i) {
    const double c = p.omega + p.q.values.values[i] *
                                   (s.phi.values[i] + chi.values.values[i]);
    g.values[i] =
        2.0 * (su[i] / dom.weights[i] + (p.m * p.m - c * c) * s.u.values[i]);
  }
  return g; // last node stays 0: Dirichlet closure
}

GridFunction gradient_j(const RadialDomain& dom, const PhysicsParams& p,
                        const GridFunction& u, const ChiField& chi) {
  return gradient_j(dom, p, reduce(dom, p, u, chi), chi);
}

double gradient_norm(const RadialDomain& dom, const GridFunction& g) {
  return lp_norm(dom, g, 2.0);
}

namespace {

/// One ascent run on the embedding ratio from a given start; every evaluated
/// ratio is attained by an admissible trial function, so the running best is
/// a valid lower bound at all times.  The raw gradient is preconditioned by a
/// stiffness solve (plus a mass shift in the free case), which changes the
/// metric of the ascent but not its stationary points.
double ascend_ratio(const RadialDomain& dom, double p, SobolevKind kind,
                    GridFunction f) {
  const int n = dom.n;
  const bool dirichlet = kind == SobolevKind::dirichlet;

  const detail::Tridiag precond =
      detail::stiffness_preconditioner(dom, dirichlet);

  auto denominator = [&](const GridFunction& v) {
    return dirichlet ? std::sqrt(gradient_energy(dom, v)) : h1_norm(dom, v);
  };
  auto normalize = [&](GridFunction& v) {
    const double d = denominator(v);
    if (d <= 0.0) return false;
    for (auto& x : v.values) x /= d;
    return true;
  };

  if (dirichlet) f.values[n - 1] = 0.0;
  if (!normalize(f)) return 0.0;
  double best = lp_norm(dom, f, p);

  double step = 0.5;
  int since_best = 0;
  GridFunction trial = f;
  std::vector<double> rhs(n), dir(n);
  for (int iter = 0; iter < 600 && step > 1e-13 && since_best < 40; ++iter) {
    const std::vector<double> sf = stiffness_apply(dom, f);
    const double np = lp_norm(dom, f, p);
    const double np_p = std::pow(np, p);
    const double den2 = dirichlet
                            ? gradient_energy(dom, f)
                            : gradient_energy(dom, f) + std::pow(mean(dom, f), 2);
    const double fbar = dirichlet ? 0.0 : mean(dom, f);

    // Dual gradient of log(|f|_p / denominator), then preconditioned.
    for (int i = 0; i < n; ++i) {
      const double fv = f.values[i];
      const double dnum = std::pow(std::abs(fv), p - 2.0) * fv / np_p;
      double dden = sf[i] / dom.weights[i];
      if (!dirichlet) dden += fbar / dom.volume;
      rhs[i] = dom.weights[i] * (dnum - dden / den2);
    }
    if (dirichlet) rhs[n - 1] = 0.0;
    precond.solve(rhs, dir);

    double dmax = 0.0;
    for (double v : dir) dmax = std::max(dmax, std::abs(v));
    if (dmax == 0.0) break;

    trial = f;
    for (int i = 0; i < n; ++i)
      trial.values[i] = f.values[i] + step * dir[i] / dmax;
    if (dirichlet) trial.values[n - 1] = 0.0;
    if (!normalize(trial)) { step *= 0.5; continue; }
    const double r = lp_norm(dom, trial, p);
    if (r > best) {
      since_best = r - best > 1e-12 * best ? 0 : since_best + 1;
      f = trial;
      best = r;
      step *= 1.3;
    } else {
      step *= 0.5;
      ++since_best;
    }
  }
  return best;
}

} // namespace

double estimate_sobolev(const RadialDomain& dom, double p, SobolevKind kind,
                        std::uint64_t seed) {
  if (!(p > 1.0 && p <= 6.0))
    throw std::invalid_argument("estimate_sobolev: p must lie in (1, 6]");

  const double R = dom.radius;
  std::vector<GridFunction> starts;
  if (kind == SobolevKind::dirichlet) {
    starts.push_back(GridFunction::sample(dom, Bc::DirichletAtR, [R](double r) {
      return 1.0 - (r / R) * (r / R);
    }));
    starts.push_back(GridFunction::sample(dom, Bc::DirichletAtR, [R](double r) {
      return sinc_mode(pi * r / R);
    }));
  } else {
    starts.push_back(
        GridFunction::sample(dom, Bc::NeumannBoth, [](double) { return 1.0; }));
    starts.push_back(GridFunction::sample(dom, Bc::NeumannBoth, [R](double r) {
      return 1.0 + 0.5 * std::cos(pi * r / R);
    }));
  }

  std::mt19937_64 rng(seed * 1000003ULL +
                      static_cast<std::uint64_t>(p * 256.0) +
                      (kind == SobolevKind::full ? 7919ULL : 0ULL));
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int k = 0; k < 2; ++k) {
    std::array<double, 5> c;
    for (auto& x : c) x = coef(rng);
    if (kind == SobolevKind::dirichlet) {
      starts.push_back(GridFunction::sample(dom, Bc::DirichletAtR, [&](double r) {
        double v = 0.0;
        for (int j = 0; j < 5; ++j) v += c[j] * sinc_mode((j + 1) * pi * r / R);
        return v;
      }));
    } else {
      starts.push_back(GridFunction::sample(dom, Bc::NeumannBoth, [&](double r) {
        double v = c[0];
        for (int j = 1; j < 5; ++j) v += c[j] * std::cos(j * pi * r / R);
        return v;
      }));
    }
  }

  double best = 0.0;
  for (auto& f : starts) best = std::max(best, ascend_ratio(dom, p, kind, f));
  return best;
}

DomainConstants compute_constants(const RadialDomain& dom,
                                  const PhysicsParams& p, const ChiField& chi,
                                  std::optional<DomainConstants> estimates) {
  DomainConstants dc;
  if (estimates) {
    dc = *estimates;
  } else {
    dc.sigma2 = estimate_sobolev(dom, 2.0, SobolevKind::dirichlet);
    dc.sigma12_5 = estimate_sobolev(dom, 12.0 / 5.0, SobolevKind::dirichlet);
    dc.sigma3 = estimate_sobolev(dom, 3.0, SobolevKind::dirichlet);
    dc.tau2 = estimate_sobolev(dom, 2.0, SobolevKind::full);
    dc.tau3 = estimate_sobolev(dom, 3.0, SobolevKind::full);
    dc.tau6 = estimate_sobolev(dom, 6.0, SobolevKind::full);
  }

  dc.chi_infty = chi.max_abs;
  dc.kappa_num = p.bd.alpha_surrogate_norm > 0.0
                     ? chi.max_abs / p.bd.alpha_surrogate_norm
                     : 0.0;
  dc.q_l6 = p.q.l6;

  const double ka = dc.chi_infty; // measured kappa * |alpha| product
  const double aw = std::abs(p.omega);
  const double q6 = dc.q_l6;
  dc.c1 = 1.0 - 4.0 * aw * dc.sigma12_5 * dc.sigma12_5 * ka * q6 -
          dc.sigma3 * dc.sigma3 * ka * ka * q6 * q6;
  dc.c2 = 1.0 + std::abs(p.m * p.m - p.omega * p.omega) * dc.sigma2 * dc.sigma2 +
          4.0 * aw * dc.sigma12_5 * dc.sigma12_5 * ka * q6 +
          2.0 * dc.sigma3 * dc.sigma3 * ka * ka * q6 * q6;
  dc.c3 = p.omega * p.omega * dc.sigma3 * dc.sigma3 * dc.tau6 * q6;
  dc.c1_positive = dc.c1 > 0.0;
  return dc;
}

BoundSlack verify_bound_lemma(const RadialDomain& dom, const PhysicsParams& p,
                              const GridFunction& u, const ChiField& chi,
                              const DomainConstants& dc) {
  const ReducedState s = reduce(dom, p, u, chi);
  const FunctionalReport rep = evaluate_j(dom, p, s, chi);

  const double grad2 = rep.terms.grad_energy;
  const double abs_a = std::abs(p.bd.total_charge);
  const double ka = dc.chi_infty;

  BoundSlack out;
  out.lower =
      rep.j_tilde - (dc.c1 * grad2 + rep.terms.mass - 2.0 * ka * abs_a);
  out.upper = (dc.c2 + dc.c3 * h1_norm(dom, s.theta)) * grad2 +
              2.0 * ka * abs_a - rep.j_tilde;

  long double p1 = 0.0L, p2 = 0.0L;
  for (int i = 0; i < dom.n; ++i) {
    const long double w = dom.weights[i];
    const double qv = p.q.values.values[i];
    const double uv = u.values[i];
    p1 += w * qv * uv * uv * (chi.values.values[i] + s.xi.values[i]);
    p2 += w * qv * uv * qv * uv * chi.values.values[i] * chi.values.values[i];
  }
  const double u125 = lp_norm(dom, u, 12.0 / 5.0);
  const double u3 = lp_norm(dom, u, 3.0);
  out.holder_p1 =
      2.0 * ka * dc.q_l6 * u125 * u125 - std::abs(static_cast<double>(p1));
  out.holder_p2 =
      ka * ka * dc.q_l6 * dc.q_l6 * u3 * u3 - static_cast<double>(p2);
  return out;
}

double theta_lemma_slack(const RadialDomain& dom, const PhysicsParams& p,
                         const ReducedState& s) {
  const double u2 = lp_norm(dom, s.u, 2.0);
  const double lhs =
      std::abs(2.0 * p.omega * p.bd.total_charge * s.theta_bar);
  return p.omega * p.omega * u2 * u2 + p.bd.total_charge * s.eta_bar - lhs;
}

} // namespace kgm
