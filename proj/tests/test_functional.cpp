#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "kgm/functional.hpp"

using namespace kgm;

namespace {

constexpr double pi = 3.14159265358979323846;

double sinc_mode(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

PhysicsParams reference_params(const RadialDomain& dom, double omega = 0.5,
                               double alpha = 0.05) {
  PhysicsParams p;
  p.m = 1.0;
  p.omega = omega;
  p.q = CouplingField::make(
      dom, GridFunction::sample(dom, Bc::NeumannBoth, [](double) { return 1.0; }),
      1.0);
  p.bd = BoundaryData::make(alpha, dom);
  return p;
}

/// Random admissible field: dominant positive first mode plus four decaying
/// overtones, amplitudes bounded so the sum stays positive in the interior.
GridFunction sample_field(const RadialDomain& dom, std::mt19937_64& rng) {
  static constexpr double cap[4] = {0.2, 0.12, 0.08, 0.05};
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double c1 = 0.75 + 0.5 * u01(rng);
  double c[4];
  for (int j = 0; j < 4; ++j) c[j] = cap[j] * (2.0 * u01(rng) - 1.0);
  const double amp = std::exp(std::log(0.3) + u01(rng) * std::log(10.0));
  const double R = dom.radius;
  return GridFunction::sample(dom, Bc::DirichletAtR, [&](double r) {
    double v = c1 * sinc_mode(pi * r / R);
    for (int j = 0; j < 4; ++j) v += c[j] * sinc_mode((j + 2) * pi * r / R);
    return amp * v;
  });
}

} // namespace

TEST_CASE("action at rest states keeps only the flux term") {
  const auto dom = RadialDomain::make(1.0, 801);
  const auto p = reference_params(dom);
  const auto chi = solve_chi(p.bd, dom);

  const auto zero = GridFunction::zeros(dom.n, Bc::DirichletAtR);
  for (double c : {0.0, 1.0, -2.5}) {
    const auto phi =
        GridFunction::sample(dom, Bc::NeumannBoth, [c](double) { return c; });
    const double expected = 2.0 * p.bd.total_charge * c;
    CHECK(std::abs(action(dom, p, zero, phi, chi) - expected) <=
          1e-13 * (std::abs(expected) + 1.0));
  }
}

TEST_CASE("two evaluation routes agree on random admissible fields") {
  const auto dom = RadialDomain::make(1.0, 801);
  const auto p = reference_params(dom);
  const auto chi = solve_chi(p.bd, dom);

  std::mt19937_64 rng(12345);
  for (int k = 0; k < 20; ++k) {
    const auto u = sample_field(dom, rng);
    const auto rep = evaluate_j(dom, p, u, chi);
    CHECK(rep.route_gap <= 1e-8);
    // The identity's ingredients carry definite signs.
    CHECK(rep.terms.chi_cross >= -1e-15);
    CHECK(rep.terms.theta_drag >= -1e-15);
    CHECK(rep.a_eta_bar > 0.0);
  }
}

TEST_CASE("omega zero drops every frequency term") {
  const auto dom = RadialDomain::make(1.0, 801);
  auto p = reference_params(dom, 0.0);
  const auto chi = solve_chi(p.bd, dom);
  const auto u = GridFunction::sample(dom, Bc::DirichletAtR, [](double r) {
    return 1.3 * sinc_mode(pi * r);
  });

  const auto rep = evaluate_j(dom, p, u, chi);
  CHECK(rep.terms.lift_coupling == 0.0);
  CHECK(rep.terms.theta_drag == 0.0);
  CHECK(rep.two_omega_a_theta_bar == 0.0);
  CHECK(std::abs(rep.j - (rep.j_tilde + rep.a_eta_bar)) <=
        1e-12 * std::abs(rep.j));
}

TEST_CASE("the functional is even and folding never raises it") {
  const auto dom = RadialDomain::make(1.0, 801);
  const auto p = reference_params(dom);
  const auto chi = solve_chi(p.bd, dom);

  // Sign-changing profile.
  const auto u = GridFunction::sample(dom, Bc::DirichletAtR, [](double r) {
    return sinc_mode(2.0 * pi * r) + 0.3 * sinc_mode(3.0 * pi * r);
  });
  GridFunction flipped = u, folded = u;
  for (auto& v : flipped.values) v = -v;
  for (auto& v : folded.values) v = std::abs(v);

  const auto r0 = evaluate_j(dom, p, u, chi);
  const auto r1 = evaluate_j(dom, p, flipped, chi);
  const auto r2 = evaluate_j(dom, p, folded, chi);

  CHECK(r0.j == r1.j); // bit-identical: every source term is even in u
  CHECK(r2.j <= r0.j + 1e-12 * (std::abs(r0.j) + 1.0)); // folding shrinks energy

  // Positive samples are fixed points of folding, so equality is exact there.
  std::mt19937_64 rng(99);
  const auto w = sample_field(dom, rng);
  GridFunction w_folded = w;
  for (auto& v : w_folded.values) v = std::abs(v);
  CHECK(evaluate_j(dom, p, w, chi).j == evaluate_j(dom, p, w_folded, chi).j);
}

TEST_CASE("reduced potential maximizes the action in its slot") {
  const auto dom = RadialDomain::make(1.0, 801);
  const auto p = reference_params(dom);
  const auto chi = solve_chi(p.bd, dom);
  std::mt19937_64 rng(4242);
  const auto u = sample_field(dom, rng);

  const auto s = reduce(dom, p, u, chi);
  const double j = action(dom, p, u, s.phi, chi);

  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int k = 0; k < 5; ++k) {
    GridFunction perturbed = s.phi;
    double c[3] = {coef(rng), coef(rng), coef(rng)};
    for (int i = 0; i < dom.n; ++i) {
      const double r = dom.nodes[i];
      perturbed.values[i] += 0.1 * (c[0] + c[1] * std::cos(pi * r) +
                                    c[2] * std::cos(2.0 * pi * r));
    }
    CHECK(action(dom, p, u, perturbed, chi) <= j + 1e-10 * (std::abs(j) + 1.0));
  }
}

TEST_CASE("gradient matches central finite differences") {
  const auto dom = RadialDomain::make(1.0, 801);
  const auto p = reference_params(dom);
  const auto chi = solve_chi(p.bd, dom);
  std::mt19937_64 rng(777);
  const auto u = sample_field(dom, rng);
  const auto g = gradient_j(dom, p, u, chi);

  CHECK(g.values[dom.n - 1] == 0.0);

  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int dir = 0; dir < 3; ++dir) {
    double c[4];
    for (auto& x : c) x = coef(rng);
    const auto v = GridFunction::sample(dom, Bc::DirichletAtR, [&](double r) {
      double s = 0.0;
      for (int j = 0; j < 4; ++j) s += c[j] * sinc_mode((j + 1) * pi * r);
      return s;
    });

    long double pairing = 0.0L;
    for (int i = 0; i < dom.n; ++i)
      pairing += static_cast<long double>(dom.weights[i]) * g.values[i] *
                 v.values[i];

    double best = 1e300;
    for (double eps : {1e-3, 1e-4, 1e-5}) {
      GridFunction up = u, dn = u;
      for (int i = 0; i < dom.n; ++i) {
        up.values[i] += eps * v.values[i];
        dn.values[i] -= eps * v.values[i];
      }
      const double fd =
          (evaluate_j(dom, p, up, chi).j - evaluate_j(dom, p, dn, chi).j) /
          (2.0 * eps);
      best = std::min(best, std::abs(fd - static_cast<double>(pairing)) /
                                std::max(1.0, std::abs(fd)));
    }
    CHECK(best <= 1e-6);
  }

  // Oddness of the gradient under u -> -u.
  GridFunction flipped = u;
  for (auto& x : flipped.values) x = -x;
  const auto gf = gradient_j(dom, p, flipped, chi);
  for (int i = 0; i < dom.n; ++i) CHECK(gf.values[i] == -g.values[i]);
}

TEST_CASE("embedding estimates recover the known extremals") {
  const auto dom = RadialDomain::make(1.0, 501);

  // First Dirichlet mode: |f|_2 / |grad f|_2 -> R / pi.
  const double sigma2 = estimate_sobolev(dom, 2.0, SobolevKind::dirichlet);
  CHECK(std::abs(sigma2 - 1.0 / pi) <= 0.01 / pi);

  // Constants are the extremals of the full-norm p = 2 ratio on the ball.
  const double tau2 = estimate_sobolev(dom, 2.0, SobolevKind::full);
  const double vol_sqrt = std::sqrt(4.0 * pi / 3.0);
  CHECK(tau2 >= vol_sqrt * (1.0 - 1e-9));
  CHECK(std::abs(tau2 - vol_sqrt) <= 0.01 * vol_sqrt);

  // Refinement stability within 1%.
  const auto coarse = RadialDomain::make(1.0, 251);
  const double sigma2_c = estimate_sobolev(coarse, 2.0, SobolevKind::dirichlet);
  CHECK(std::abs(sigma2 - sigma2_c) <= 0.01 * sigma2);

  CHECK_THROWS_AS(estimate_sobolev(dom, 1.0, SobolevKind::dirichlet),
                  std::invalid_argument);
  CHECK_THROWS_AS(estimate_sobolev(dom, 6.5, SobolevKind::full),
                  std::invalid_argument);
}

TEST_CASE("smallness constants and their degenerate limits") {
  const auto dom = RadialDomain::make(1.0, 501);
  const auto p = reference_params(dom);
  const auto chi = solve_chi(p.bd, dom);

  const auto dc = compute_constants(dom, p, chi);
  CHECK(dc.c1 > 0.0);
  CHECK(dc.c1 < 1.0);
  CHECK(dc.c1_positive);
  CHECK(dc.c2 > 1.0);
  CHECK(dc.c3 > 0.0);
  CHECK(dc.kappa_num > 0.0);
  CHECK(dc.chi_infty == chi.max_abs);

  // Zero flux: both subtracted terms vanish and the gate is exactly open.
  auto p0 = reference_params(dom, 0.5, 0.0);
  const auto chi0 = solve_chi(p0.bd, dom);
  const auto dc0 = compute_constants(dom, p0, chi0, dc);
  CHECK(dc0.c1 == 1.0);
  CHECK(dc0.kappa_num == 0.0);

  // omega = 0 drops the first subtracted term only.
  auto pw = reference_params(dom, 0.0);
  const auto dcw = compute_constants(dom, pw, chi, dc);
  const double expected =
      1.0 - dcw.sigma3 * dcw.sigma3 * dcw.chi_infty * dcw.chi_infty *
                dcw.q_l6 * dcw.q_l6;
  CHECK(std::abs(dcw.c1 - expected) <= 1e-15);
  CHECK(dcw.c3 == 0.0);

  // Passing estimates back in reuses them verbatim.
  CHECK(dc0.sigma2 == dc.sigma2);
  CHECK(dc0.tau6 == dc.tau6);
}

TEST_CASE("two-sided energy bounds hold with nonnegative slack") {
  const auto dom = RadialDomain::make(1.0, 801);
  const auto p = reference_params(dom);
  const auto chi = solve_chi(p.bd, dom);
  const auto dc = compute_constants(dom, p, chi);

  std::mt19937_64 rng(2026);
  for (int k = 0; k < 20; ++k) {
    const auto u = sample_field(dom, rng);
    const auto slack = verify_bound_lemma(dom, p, u, chi, dc);
    CHECK(slack.lower >= -1e-8);
    CHECK(slack.upper >= -1e-8);
    CHECK(slack.holder_p1 >= -1e-10);
    CHECK(slack.holder_p2 >= -1e-10);
  }
}

TEST_CASE("theta estimate holds in both parameter regimes") {
  const auto dom = RadialDomain::make(1.0, 801);
  std::mt19937_64 rng(31415);

  // Gap regime: omega close to m, coupling bounded away from zero.
  const auto p1 = reference_params(dom, 0.9);
  REQUIRE(p1.case_gap());
  REQUIRE_FALSE(p1.case_half());

  // Half regime: decaying coupling with no gap, omega below m / sqrt(2).
  PhysicsParams p2;
  p2.m = 1.0;
  p2.omega = 0.6;
  p2.q = CouplingField::make(
      dom,
      GridFunction::sample(dom, Bc::NeumannBoth,
                           [](double r) {
                             const double s = std::max(0.0, 2.0 * (r - 0.5));
                             return s * s;
                           }),
      {});
  p2.bd = BoundaryData::make(0.05, dom);
  REQUIRE_FALSE(p2.case_gap());
  REQUIRE(p2.case_half());

  const PhysicsParams* regimes[] = {&p1, &p2};
  for (const PhysicsParams* p : regimes) {
    const auto chi = solve_chi(p->bd, dom);
    for (int k = 0; k < 10; ++k) {
      const auto u = sample_field(dom, rng);
      const auto s = reduce(dom, *p, u, chi);
      CHECK(theta_lemma_slack(dom, *p, s) >= -1e-10);
    }
  }
}

TEST_CASE("scaling probes: coercive growth and boundary blow-up") {
  const auto dom = RadialDomain::make(1.0, 801);
  const auto p = reference_params(dom);
  const auto chi = solve_chi(p.bd, dom);
  const auto u = GridFunction::sample(dom, Bc::DirichletAtR, [](double r) {
    return sinc_mode(pi * r);
  });

  auto j_at = [&](double t) {
    GridFunction v = u;
    for (auto& x : v.values) x *= t;
    return evaluate_j(dom, p, v, chi).j;
  };

  const double j1 = j_at(1.0);

  // Coercivity: large amplitudes raise J without bound.
  CHECK(j_at(16.0) > j_at(8.0));
  CHECK(j_at(8.0) > j_at(4.0));
  CHECK(j_at(16.0) >= 10.0 * std::abs(j1) + 1.0);

  // Boundary blow-up: shrinking amplitudes raise J as well (A != 0).
  CHECK(j_at(1.0 / 16.0) > j_at(1.0 / 8.0));
  CHECK(j_at(1.0 / 8.0) > j_at(1.0 / 4.0));
  CHECK(j_at(1.0 / 16.0) >= 10.0 * std::abs(j1) + 1.0);

  // Between the two regimes J stays bounded on admissible families.
  for (double t : {0.5, 0.75, 1.0, 1.5, 2.0})
    CHECK(std::abs(j_at(t)) <= 100.0 * (std::abs(j1) + 1.0));
}
