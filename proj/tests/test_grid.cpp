#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "kgm/grid.hpp"

using namespace kgm;

namespace {
constexpr double pi = std::numbers::pi;

RadialDomain unit_ball(int n = 2001) { return RadialDomain::make(1.0, n); }
} // namespace

TEST_CASE("construction validates inputs") {
  CHECK_THROWS_AS(RadialDomain::make(0.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(RadialDomain::make(-1.0, 100), std::invalid_argument);
  CHECK_THROWS_AS(RadialDomain::make(1.0, 15), std::invalid_argument);
  CHECK_NOTHROW(RadialDomain::make(1.0, 16));
}

TEST_CASE("weights are positive and sum to the ball volume") {
  for (int n : {16, 100, 251, 2001}) {
    const auto dom = RadialDomain::make(1.7, n);
    long double sum = 0.0L;
    for (double w : dom.weights) {
      CHECK(w > 0.0);
      sum += w;
    }
    CHECK(std::abs(static_cast<double>(sum) - dom.volume) <= 1e-12 * dom.volume);
  }
}

TEST_CASE("integrates constants exactly") {
  const auto dom = unit_ball();
  const auto one = GridFunction::sample(dom, Bc::NeumannBoth, [](double) { return 1.0; });
  CHECK(integrate(dom, one) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-13));

  const auto zero = GridFunction::zeros(dom.n, Bc::NeumannBoth);
  CHECK(integrate(dom, zero) == 0.0);
}

TEST_CASE("integrates linear profiles exactly") {
  const auto dom = unit_ball(101);
  const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return 2.5 * r - 0.75; });
  // 4 pi int (2.5 r - 0.75) r^2 dr = 4 pi (2.5/4 - 0.75/3)
  const double exact = 4.0 * pi * (2.5 / 4.0 - 0.25);
  CHECK(integrate(dom, f) == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("integral of r^2 converges to 4 pi / 5") {
  const double exact = 4.0 * pi / 5.0;
  double prev_err = 0.0;
  for (int n : {251, 501, 1001, 2001}) {
    const auto dom = unit_ball(n);
    const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return r * r; });
    const double err = std::abs(integrate(dom, f) - exact);
    if (prev_err > 0.0) CHECK(prev_err / err >= 3.5);
    prev_err = err;
  }
  const auto dom = unit_ball();
  const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return r * r; });
  CHECK(integrate(dom, f) == doctest::Approx(exact).epsilon(1e-6));
}

TEST_CASE("integrate is linear") {
  const auto dom = unit_ball(317);
  const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return std::sin(3.0 * r); });
  const auto g = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return std::exp(-r); });
  GridFunction h = f;
  for (int i = 0; i < dom.n; ++i) h.values[i] = 2.0 * f.values[i] - 5.0 * g.values[i];
  const double lhs = integrate(dom, h);
  const double rhs = 2.0 * integrate(dom, f) - 5.0 * integrate(dom, g);
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-13));
}

TEST_CASE("lp_norm basics") {
  const auto dom = unit_ball();
  const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return r; });
  CHECK(lp_norm(dom, f, 2.0) == doctest::Approx(std::sqrt(4.0 * pi / 5.0)).epsilon(1e-7));
  CHECK(lp_norm(dom, f, lp_infinity) == doctest::Approx(1.0));
  CHECK_THROWS_AS(lp_norm(dom, f, 0.5), std::invalid_argument);

  // |c|_p = |c| |Omega|^{1/p}
  const auto c = GridFunction::sample(dom, Bc::NeumannBoth, [](double) { return -2.0; });
  CHECK(lp_norm(dom, c, 3.0) == doctest::Approx(2.0 * std::cbrt(dom.volume)).epsilon(1e-12));
}

TEST_CASE("lp_norm homogeneity") {
  const auto dom = unit_ball(251);
  const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return std::cos(2.0 * r) + 0.3; });
  GridFunction g = f;
  for (double& v : g.values) v *= -3.5;
  for (double p : {1.0, 2.0, 2.4, 3.0, 6.0}) {
    CHECK(lp_norm(dom, g, p) == doctest::Approx(3.5 * lp_norm(dom, f, p)).epsilon(1e-12));
  }
  CHECK(lp_norm(dom, g, lp_infinity) == doctest::Approx(3.5 * lp_norm(dom, f, lp_infinity)).epsilon(1e-12));
}

TEST_CASE("h1_norm of the linear profile matches the closed form") {
  const auto dom = unit_ball();
  const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return r; });
  // |grad r|^2 = |Omega| = 4 pi / 3 and mean(r) = 3/4 on the unit ball.
  CHECK(gradient_energy(dom, f) == doctest::Approx(4.0 * pi / 3.0).epsilon(1e-13));
  CHECK(mean(dom, f) == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(h1_norm(dom, f) == doctest::Approx(std::sqrt(4.0 * pi / 3.0 + 9.0 / 16.0)).epsilon(1e-13));
}

TEST_CASE("h1_norm homogeneity") {
  const auto dom = unit_ball(251);
  const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return std::sin(2.0 * r) - 0.4 * r; });
  GridFunction g = f;
  for (double& v : g.values) v *= -2.25;
  CHECK(h1_norm(dom, g) == doctest::Approx(2.25 * h1_norm(dom, f)).epsilon(1e-12));
}

TEST_CASE("stiffness rows annihilate constants exactly") {
  const auto dom = unit_ball(199);
  const auto c = GridFunction::sample(dom, Bc::NeumannBoth, [](double) { return 7.25; });
  const auto row = stiffness_apply(dom, c);
  for (double v : row) CHECK(v == 0.0);
}

TEST_CASE("stiffness form matches gradient_energy") {
  const auto dom = unit_ball(251);
  const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return std::cos(pi * r); });
  const auto row = stiffness_apply(dom, f);
  long double quad = 0.0L;
  for (int i = 0; i < dom.n; ++i) quad += static_cast<long double>(row[i]) * f.values[i];
  CHECK(static_cast<double>(quad) == doctest::Approx(gradient_energy(dom, f)).epsilon(1e-12));
  CHECK(gradient_pairing(dom, f, f) == doctest::Approx(gradient_energy(dom, f)).epsilon(1e-13));
}

TEST_CASE("radial laplacian of r^2 is 6 everywhere") {
  const auto dom = unit_ball();
  const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return r * r; });
  const auto lap = apply_laplacian(dom, f);
  for (int i = 0; i + 1 < dom.n; ++i) CHECK(lap.values[i] == doctest::Approx(6.0).epsilon(1e-6));
}

TEST_CASE("radial laplacian of the cosine mode is second order") {
  // f = cos(pi r / R): zero flux at both ends, Delta f known in closed form.
  const double R = 1.0;
  auto exact = [&](double r) {
    const double k = pi / R;
    if (r == 0.0) return -3.0 * k * k;
    return -k * k * std::cos(k * r) - 2.0 * k * std::sin(k * r) / r;
  };
  double prev_err = 0.0;
  for (int n : {251, 501, 1001, 2001}) {
    const auto dom = RadialDomain::make(R, n);
    const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [&](double r) { return std::cos(pi * r / R); });
    const auto lap = apply_laplacian(dom, f);
    double err = 0.0;
    for (int i = 0; i < dom.n; ++i) err = std::max(err, std::abs(lap.values[i] - exact(dom.nodes[i])));
    if (prev_err > 0.0) CHECK(prev_err / err >= 3.5);
    prev_err = err;
  }
}

TEST_CASE("discrete integration by parts with zero-flux data") {
  // int (Delta f) g + int grad f . grad g -> 0 at second order when both
  // functions have zero flux at the ends.
  double prev_def = 0.0;
  for (int n : {251, 501, 1001, 2001}) {
    const auto dom = unit_ball(n);
    const auto f = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return std::cos(pi * r); });
    const auto g = GridFunction::sample(dom, Bc::NeumannBoth, [](double r) { return std::cos(2.0 * pi * r); });
    const auto lap = apply_laplacian(dom, f);
    GridFunction prod = lap;
    for (int i = 0; i < dom.n; ++i) prod.values[i] = lap.values[i] * g.values[i];
    const double defect = std::abs(integrate(dom, prod) + gradient_pairing(dom, f, g));
    if (prev_def > 0.0) CHECK(prev_def / defect >= 3.0);
    prev_def = defect;
  }
  CHECK(prev_def <= 1e-4);
}

TEST_CASE("dirichlet sampling forces the boundary value") {
  const auto dom = unit_ball(64);
  const auto f = GridFunction::sample(dom, Bc::DirichletAtR, [](double) { return 5.0; });
  CHECK(f.values[dom.n - 1] == 0.0);
}
