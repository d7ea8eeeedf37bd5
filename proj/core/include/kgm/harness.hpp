#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "kgm/solver.hpp"

namespace kgm {

/// One certified claim with its worst observed margin.
///
/// For inequality claims worst_slack is the smallest margin seen (the check
/// passes when it stays >= -tolerance); for identity claims it is the
/// largest relative residual (passes when <= tolerance).  A skipped report
/// names the unmet hypothesis instead of pretending a verdict.
struct CheckReport {
  std::string name;
  std::string statement; ///< the mathematical claim being certified
  int samples = 0;
  double worst_slack = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool skipped = false;
  std::string skip_reason;
  std::vector<std::string> details;
};

/// Deterministic admissible-field generator: a dominant positive first
/// radial mode plus four overtones with amplitude caps that keep the sum
/// strictly positive in the interior, rejection-sampled so |qu|_3 stays a
/// factor above the boundary monitor.  Identical (seed, call index) pairs
/// produce identical fields.
class FieldSampler {
public:
  FieldSampler(const RadialDomain& dom, const PhysicsParams& p,
               std::uint64_t seed);
  GridFunction next();

private:
  const RadialDomain* dom_;
  const PhysicsParams* p_;
  std::mt19937_64 rng_;
  double floor_;
};

/// Runs every per-sample claim about the reduced potential and the energy
/// on n_samples random admissible fields.  Each check owns a generator
/// seeded from (seed + check index), so the reports do not depend on
/// execution order.  Failures are reported, never thrown; checks whose
/// hypothesis the configuration violates come back skipped.
std::vector<CheckReport> run_lemma_suite(const RadialDomain& dom,
                                         const PhysicsParams& p,
                                         std::uint64_t seed, int n_samples);

/// Evaluates J along u_t = 2^{-k} u_ref, k = 0..n_steps (stopping early
/// only if the screening degenerates), and certifies that the trailing
/// values increase strictly, the last exceeds the first by >= 10x, and the
/// recorded A eta_bar + 2 omega A theta_bar tail increases.  Throws
/// std::invalid_argument when the total charge vanishes (the growth needs
/// A != 0) or u_ref is inadmissible.
CheckReport experiment_blowup(const RadialDomain& dom, const PhysicsParams& p,
                              const GridFunction& u_ref, int n_steps);

/// For a coupling that decays to zero without a gap, builds bumps u_n on
/// the bands {2^-(n+1) < q < 2^-n} and certifies theta_bar_n <= -2^n + tol
/// with a strictly decreasing sequence: the third energy summand is
/// unbounded below without the gap hypothesis.  Throws
/// std::invalid_argument when q has a gap (the bands are empty) or a band
/// holds too few grid nodes to carry a bump.
CheckReport experiment_noQ(const RadialDomain& dom, const PhysicsParams& p,
                           int n_terms);

/// With zero total charge, descends from n_starts random admissible fields
/// and certifies that every run either escapes through the admissibility
/// boundary or ends at a trivial (|u| <= 1e-3) point; the nonnegativity
/// chain 0 <= D(u) - C1 |grad u|^2 is evaluated along each iterate trail.
/// With nonzero charge the same call is the control arm: it passes when at
/// least one start converges to a nontrivial critical point.  Throws
/// std::invalid_argument when |omega| > |m| or the smallness gate C1 <= 0.
CheckReport experiment_nonexistence(const RadialDomain& dom,
                                    const PhysicsParams& p, std::uint64_t seed,
                                    int n_starts);

} // namespace kgm
