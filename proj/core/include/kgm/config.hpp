#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "kgm/harness.hpp"

namespace kgm {

/// Syntax fault in a configuration file, with its 1-based line.
struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& what_)
      : std::runtime_error("line " + std::to_string(line_) + ": " + what_),
        line(line_) {}
};

/// Semantic fault: names the violated invariant.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Coupling profile grammar:
///   constant(c)                 c everywhere
///   annulus(inner, outer, v)    v on [inner, outer], 1 elsewhere
///   step_with_gap(q0, c)        q0 on [0, R/2), c on [R/2, R]
///   table(r:q, r:q, ...)        piecewise-linear through the given points
///   decay(c)                    c * (2 max(0, r - R/2) / R)^2, gapless
struct QSpec {
  enum class Kind { Constant, Annulus, StepWithGap, Table, Decay };
  Kind kind = Kind::Constant;
  std::vector<double> args{1.0};
  std::vector<std::pair<double, double>> table;

  /// Canonical re-parseable text form.
  std::string to_string() const;
};

/// Every free parameter of a run.  Tolerances resolve to positive values at
/// load time (boundary and singular default from the domain size).
struct RunConfig {
  double R = 1.0;
  int N = 2001;
  double m = 1.0;
  double omega = 0.5;
  double alpha = 0.05;
  QSpec q_spec;
  std::optional<double> q0; ///< coupling gap override; forms with an
                            ///< unambiguous gap set it themselves
  double grad_tol = 1e-8;
  double pde_tol = 1e-6;
  double boundary_tol = 0.0; ///< 0 at rest: resolved to 1e3 * singular_tol
  double singular_tol = 0.0; ///< 0 at rest: resolved from the domain volume
  std::uint64_t seed = 12345;
  int max_iter = 10000;
  int n_samples = 100;
  int deflation_rounds = 0;
  std::string output_dir = "out";
};

/// Parses flat `key = value` text (UTF-8, # comments, blank lines ignored).
/// Unknown keys are errors; missing keys keep the documented defaults.
/// Throws ParseError or ValidationError.
RunConfig parse_config(const std::string& text);

/// parse_config over the contents of the file at path.
RunConfig load_config(const std::string& path);

/// Canonical `key = value` rendering of every field, re-parseable by
/// parse_config (round-trip complete; doubles printed with 17 digits).
std::string format_config(const RunConfig& cfg);

/// The instantiated problem: grid, parameters, lift, constants.
struct Problem {
  RadialDomain dom;
  PhysicsParams p;
  ChiField chi;
  DomainConstants dc;
};

/// Builds the problem a config describes.  Throws ValidationError when the
/// coupling vanishes identically or contradicts the declared gap.
Problem instantiate(const RunConfig& cfg);

/// Solver options implied by the config's tolerances and budgets.
SolveOptions solve_options(const RunConfig& cfg);

} // namespace kgm
