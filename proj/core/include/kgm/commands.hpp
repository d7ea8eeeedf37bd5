#pragma once

#include <string>
#include <vector>

#include "kgm/config.hpp"

namespace kgm {

/// Directory all command outputs land in: the KGM_OUTPUT_DIR environment
/// variable when set and nonempty, otherwise cfg.output_dir.  Created on
/// demand.  Every file written below is deterministic for a fixed
/// (config, seed): no timestamps, doubles printed with 17 digits.
std::string resolve_output_dir(const RunConfig& cfg);

/// Minimizes the reduced energy from the canonical positive start, then runs
/// cfg.deflation_rounds deflated searches for further critical points.
/// Writes summary.txt (verdict, energy, residuals, constants, the embedded
/// config) and the radial profiles u, phi, xi, eta, theta, chi as CSV files
/// with columns r,value.  Returns 0 when the primary run reached a clean
/// verdict: Converged with both residuals within pde_tol, or
/// BoundaryApproach (the no-minimizer signature); 1 otherwise.
int cmd_solve(const RunConfig& cfg);

/// Runs the whole claim suite on cfg.n_samples random admissible fields and
/// writes verify_report.txt, one block per check.  Returns 0 iff every
/// check passed (skipped checks name their unmet hypothesis and do not
/// fail the run).
int cmd_verify(const RunConfig& cfg);

/// Runs one named experiment and writes experiment_<name>.txt:
///   blowup        J along the curve 2^-k u0, k = 0..20 (needs total charge)
///   noQ           band bumps u_n with theta_bar_n <= -2^n (needs gapless q)
///   nonexistence  n = 5 descents under zero flux, or the control arm
/// Returns 0 iff the certificate passed.  Throws std::invalid_argument for
/// an unknown name or a violated hypothesis.
int cmd_experiment(const std::string& name, const RunConfig& cfg);

/// Re-solves the config once per value of the swept parameter ("omega",
/// "alpha", or "m") and writes sweep.csv with columns value,j_star,status.
/// Returns 0 when every row reached a clean verdict in the cmd_solve sense.
int cmd_sweep(const RunConfig& cfg, const std::string& param,
              const std::vector<double>& values);

} // namespace kgm
