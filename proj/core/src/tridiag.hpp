#pragma once

#include <cstddef>
#include <vector>

namespace kgm::detail {

// Symmetric tridiagonal LU (Thomas) kept in extended precision.  The screened
// solves feed differences of related right-hand sides through one shared
// factorization; extended precision keeps those solves consistent with each
// other well below the 1e-9 identity tolerances even at 1/h^2 row scaling.
struct Tridiag {
  std::vector<long double> diag;  // pivots after factor()
  std::vector<long double> upper; // original superdiagonal
  std::vector<long double> mult;  // multipliers after factor()
  bool factored = false;

  void resize(std::size_t n) {
    diag.assign(n, 0.0L);
    upper.assign(n, 0.0L);
    mult.assign(n, 0.0L);
    factored = false;
  }

  // Rows: mult holds the subdiagonal before factoring (symmetric input uses
  // upper[i-1] == sub[i]).
  void factor() {
    const std::size_t n = diag.size();
    for (std::size_t i = 1; i < n; ++i) {
      const long double m = mult[i] / diag[i - 1];
      mult[i] = m;
      diag[i] -= m * upper[i - 1];
    }
    factored = true;
  }

  template <class In, class Out>
  void solve(const In& rhs, Out& x) const {
    const std::size_t n = diag.size();
    std::vector<long double> y(n);
    y[0] = rhs[0];
    for (std::size_t i = 1; i < n; ++i) y[i] = rhs[i] - mult[i] * y[i - 1];
    x[n - 1] = static_cast<double>(y[n - 1] / diag[n - 1]);
    for (std::size_t i = n - 1; i-- > 0;)
      x[i] = static_cast<double>((y[i] - upper[i] * x[i + 1]) / diag[i]);
  }
};

} // namespace kgm::detail
