#pragma once

#include <cstdint>
#include <optional>

#include "kgm/reduction.hpp"

namespace kgm {

/// The seven summands of the reduced part of the energy, kept separate so the
/// verification suite can certify each bound term by term.
struct SummandBreakdown {
  double grad_energy = 0.0;  ///< |grad u|_2^2
  double mass = 0.0;         ///< int (m^2 - omega^2) u^2
  double lift_coupling = 0.0; ///< -2 omega int q u^2 (chi + xi)
  double lift_mean = 0.0;    ///< +2 A xi_bar
  double chi_square = 0.0;   ///< -int (qu)^2 chi^2
  double chi_cross = 0.0;    ///< -int (qu)^2 chi xi
  double theta_drag = 0.0;   ///< -omega^2 int q u^2 theta

  double total() const {
    return grad_energy + mass + lift_coupling + lift_mean + chi_square +
           chi_cross + theta_drag;
  }
};

/// One evaluation of the reduced energy J, computed by two independent
/// routes: directly as the action at the reduced potential, and through the
/// seven-summand decomposition.  route_gap is the relative disagreement; it
/// certifies the whole decomposition algebra on every call.
struct FunctionalReport {
  double j = 0.0;            ///< action route: F(u, Phi(u))
  double j_tilde = 0.0;      ///< terms.total()
  double a_eta_bar = 0.0;    ///< A * eta_bar
  double two_omega_a_theta_bar = 0.0;
  SummandBreakdown terms;
  double qu_l3 = 0.0;
  std::optional<double> grad_norm; ///< filled by callers that also compute the gradient
  double route_gap = 0.0;    ///< |j - (j_tilde + a_eta_bar + 2 omega A theta_bar)| / scale
};

/// Action functional of the full two-field problem,
///   F(u, phi) = |grad u|^2 + int (m^2 - (omega + q (phi + chi))^2) u^2
///             - |grad phi|^2 + 2 A phi_bar.
/// Evaluated by quadrature; no solve involved.
double action(const RadialDomain& dom, const PhysicsParams& p,
              const GridFunction& u, const GridFunction& phi,
              const ChiField& chi);

/// Evaluates J(u) = F(u, Phi(u)) through both routes; throws what reduce()
/// throws.  The overload taking a ReducedState skips the solves.
FunctionalReport evaluate_j(const RadialDomain& dom, const PhysicsParams& p,
                            const GridFunction& u, const ChiField& chi);
FunctionalReport evaluate_j(const RadialDomain& dom, const PhysicsParams& p,
                            const ReducedState& s, const ChiField& chi);

/// Gradient of J in the weighted-L2 Riesz form:
///   g = 2 (-Delta u + (m^2 - (omega + q (phi_u + chi))^2) u),
/// with the last node closed to zero (Dirichlet).  The potential derivative
/// contributes nothing because phi_u is stationary for the action; that
/// cancellation is exact for the discrete operator as well, which is what the
/// finite-difference tests certify.
GridFunction gradient_j(const RadialDomain& dom, const PhysicsParams& p,
                        const ReducedState& s, const ChiField& chi);
GridFunction gradient_j(const RadialDomain& dom, const PhysicsParams& p,
                        const GridFunction& u, const ChiField& chi);

/// Weighted L2 norm of a Riesz gradient, the solver's convergence monitor.
double gradient_norm(const RadialDomain& dom, const GridFunction& g);

enum class SobolevKind {
  dirichlet, ///< |f|_p <= sigma_p |grad f|_2 over Dirichlet fields
  full,      ///< |f|_p <= tau_p (|grad f|_2^2 + f_bar^2)^(1/2) over free fields
};

/// Empirical lower bound for the best constant in the embedding above,
/// obtained by normalized gradient ascent on the ratio from several smooth
/// starts.  Never an upper bound: inequality checks elsewhere are arranged so
/// that an underestimate cannot turn a true statement false.
/// Throws std::invalid_argument unless p in (1, 6].
double estimate_sobolev(const RadialDomain& dom, double p, SobolevKind kind,
                        std::uint64_t seed = 7);

/// Embedding estimates and the derived smallness constants.
///
/// kappa_num is the measured ratio |chi|_inf / |alpha|_surrogate (zero flux
/// gives zero); the products kappa * |alpha| in the printed constants are
/// replaced by the measured |chi|_inf itself, which is the only way kappa
/// ever enters the proofs.
struct DomainConstants {
  double sigma2 = 0.0, sigma12_5 = 0.0, sigma3 = 0.0;
  double tau2 = 0.0, tau3 = 0.0, tau6 = 0.0;
  double kappa_num = 0.0;
  double chi_infty = 0.0; ///< measured |chi|_inf, the kappa*alpha surrogate
  double q_l6 = 0.0;
  double c1 = 0.0; ///< 1 - 4|omega| sigma12_5^2 |chi|_inf |q|_6 - sigma3^2 |chi|_inf^2 |q|_6^2
  double c2 = 0.0; ///< 1 + |m^2-omega^2| sigma2^2 + 4|omega| sigma12_5^2 |chi|_inf |q|_6 + 2 sigma3^2 |chi|_inf^2 |q|_6^2
  double c3 = 0.0; ///< omega^2 sigma3^2 tau6 |q|_6
  bool c1_positive = false; ///< the smallness gate for existence
};

/// Runs the embedding estimates (or reuses the ones passed in) and fills the
/// smallness constants for the given parameters.
DomainConstants compute_constants(const RadialDomain& dom,
                                  const PhysicsParams& p, const ChiField& chi,
                                  std::optional<DomainConstants> estimates = {});

/// Slacks of the two-sided energy bounds and of the two intermediate Hoelder
/// steps; every field must come out >= -tol on admissible u.
struct BoundSlack {
  double lower = 0.0;     ///< j_tilde - (c1 |grad u|^2 + int (m^2-omega^2) u^2 - 2 |chi|_inf |A|)
  double upper = 0.0;     ///< (c2 + c3 |theta|_H1) |grad u|^2 + 2 |chi|_inf |A| - j_tilde
  double holder_p1 = 0.0; ///< 2 |chi|_inf |q|_6 |u|_{12/5}^2 - |int q u^2 (chi + xi)|
  double holder_p2 = 0.0; ///< |chi|_inf^2 |q|_6^2 |u|_3^2 - int (qu)^2 chi^2
};

/// Evaluates the bound slacks at u; uses the measured |chi|_inf, so the
/// certificate is tighter than the printed constants.
BoundSlack verify_bound_lemma(const RadialDomain& dom, const PhysicsParams& p,
                              const GridFunction& u, const ChiField& chi,
                              const DomainConstants& dc);

/// Slack of the theta estimate  |2 omega A theta_bar| <= int omega^2 u^2 + A eta_bar;
/// nonnegative up to roundoff for every admissible u, with no case hypothesis.
double theta_lemma_slack(const RadialDomain& dom, const PhysicsParams& p,
                         const ReducedState& s);

} // namespace kgm
