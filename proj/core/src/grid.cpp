#include "kgm/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kgm {

namespace {

constexpr double four_pi = 4.0 * std::numbers::pi;

} // namespace

RadialDomain RadialDomain::make(double radius, int n) {
  if (!(radius > 0.0)) throw std::invalid_argument("RadialDomain: radius must be positive");
  if (n < 16) throw std::invalid_argument("RadialDomain: need at least 16 nodes");

  RadialDomain dom;
  dom.radius = radius;
  dom.n = n;
  dom.nodes.resize(n);
  for (int i = 0; i < n; ++i)
    dom.nodes[i] = radius * static_cast<double>(i) / static_cast<double>(n - 1);
  dom.nodes[n - 1] = radius;

  const double h = dom.nodes[1] - dom.nodes[0];
  dom.face_r2_integral.resize(n - 1);
  dom.weights.assign(n, 0.0);
  for (int i = 0; i + 1 < n; ++i) {
    const double s = dom.nodes[i];
    const double e = dom.nodes[i + 1];
    const double cube = (e * e * e - s * s * s) / 3.0;
    const double quart = (e * e * e * e - s * s * s * s) / 4.0;
    dom.face_r2_integral[i] = cube;
    // Weights of the linear interpolant against r^2 dr on [s, e]:
    //   left  hat: int (e - r) r^2 dr / h
    //   right hat: int (r - s) r^2 dr / h
    const double left = (e * cube - quart) / h;
    const double right = (quart - s * cube) / h;
    dom.weights[i] += four_pi * left;
    dom.weights[i + 1] += four_pi * right;
  }

  dom.volume = four_pi * radius * radius * radius / 3.0;
  dom.surface = four_pi * radius * radius;
  return dom;
}

GridFunction GridFunction::zeros(int n, Bc bc) {
  GridFunction f;
  f.values.assign(n, 0.0);
  f.bc = bc;
  return f;
}

GridFunction GridFunction::sample(const RadialDomain& dom, Bc bc,
                                  const std::function<double(double)>& f) {
  GridFunction g;
  g.bc = bc;
  g.values.resize(dom.n);
  for (int i = 0; i < dom.n; ++i) g.values[i] = f(dom.nodes[i]);
  if (bc == Bc::DirichletAtR) g.values[dom.n - 1] = 0.0;
  return g;
}

double integrate(const RadialDomain& dom, const GridFunction& f) {
  long double acc = 0.0L;
  for (int i = 0; i < dom.n; ++i)
    acc += static_cast<long double>(dom.weights[i]) * f.values[i];
  return static_cast<double>(acc);
}

double mean(const RadialDomain& dom, const GridFunction& f) {
  return integrate(dom, f) / dom.volume;
}

double lp_norm(const RadialDomain& dom, const GridFunction& f, double p) {
  if (p == lp_infinity) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(p >= 1.0)) throw std::invalid_argument("lp_norm: p must be >= 1 or lp_infinity");
  long double acc = 0.0L;
  for (int i = 0; i < dom.n; ++i)
    acc += static_cast<long double>(dom.weights[i]) *
           std::pow(std::abs(static_cast<long double>(f.values[i])), static_cast<long double>(p));
  return static_cast<double>(std::pow(acc, 1.0L / static_cast<long double>(p)));
}

double gradient_energy(const RadialDomain& dom, const GridFunction& f) {
  const double h = dom.spacing();
  const double scale = four_pi / (h * h);
  long double acc = 0.0L;
  for (int i = 0; i + 1 < dom.n; ++i) {
    const long double d = static_cast<long double>(f.values[i + 1]) - f.values[i];
    acc += static_cast<long double>(scale) * dom.face_r2_integral[i] * d * d;
  }
  return static_cast<double>(acc);
}

double gradient_pairing(const RadialDomain& dom, const GridFunction& f,
                        const GridFunction& g) {
  const double h = dom.spacing();
  const double scale = four_pi / (h * h);
  long double acc = 0.0L;
  for (int i = 0; i + 1 < dom.n; ++i) {
    const long double df = static_cast<long double>(f.values[i + 1]) - f.values[i];
    const long double dg = static_cast<long double>(g.values[i + 1]) - g.values[i];
    acc += static_cast<long double>(scale) * dom.face_r2_integral[i] * df * dg;
  }
  return static_cast<double>(acc);
}

std::vector<double> stiffness_apply(const RadialDomain& dom, const GridFunction& f) {
  const double h = dom.spacing();
  const double scale = four_pi / (h * h);
  std::vector<double> out(dom.n, 0.0);
  for (int i = 0; i + 1 < dom.n; ++i) {
    const double c = scale * dom.face_r2_integral[i];
    const double flux = c * (f.values[i] - f.values[i + 1]);
    out[i] += flux;
    out[i + 1] -= flux;
  }
  return out;
}

double h1_norm(const RadialDomain& dom, const GridFunction& f) {
  const double m = mean(dom, f);
  return std::sqrt(gradient_energy(dom, f) + m * m);
}

GridFunction apply_laplacian(const RadialDomain& dom, const GridFunction& f) {
  const int n = dom.n;
  const double h = dom.spacing();
  const double h2 = h * h;
  GridFunction out = GridFunction::zeros(n, Bc::NeumannBoth);
  const auto& v = f.values;

  out.values[0] = 6.0 * (v[1] - v[0]) / h2;
  for (int i = 1; i + 1 < n; ++i) {
    const double second = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
    const double first2r = (v[i + 1] - v[i - 1]) / (h * dom.nodes[i]);
    out.values[i] = second + first2r;
  }
  if (f.bc == Bc::NeumannBoth) {
    out.values[n - 1] = 2.0 * (v[n - 2] - v[n - 1]) / h2;
  } else {
    const double second =
        (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
    const double first =
        (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    out.values[n - 1] = second + 2.0 * first / dom.radius;
  }
  return out;
}

} // namespace kgm
