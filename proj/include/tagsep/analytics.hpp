#pragma once

#include <array>
#include <span>
#include <vector>

#include "tagsep/color_two.hpp"
#include "tagsep/rates.hpp"

namespace tagsep::analytics {

/// Stationary law of the site-1 color in the first color scheme.
struct MarginalSolution {
  double nu_w = 0.0;
  double nu_b = 0.0;
  double nu_p = 0.0;
};

/// Solves the balance system
///   rho*q1*nu_w - p2*nu_b = 0
///   p2*(nu_w + nu_b) - q1*nu_p = 0
///   nu_w + nu_b + nu_p = 1.
MarginalSolution marginal_solve(const Rates& r);

/// Residuals of the three balance equations at s.
std::array<double, 3> marginal_residuals(const Rates& r, const MarginalSolution& s);

/// Closed-form candidate nu_b = rho*q1*(q1-p2)/((q1+p2)(p2+rho*q1)),
/// nu_p = 2*p2/(q1+p2), nu_w = p2*(q1-p2)/((q1+p2)(p2+rho*q1)).
/// It does not satisfy the balance system and is kept only so reports can
/// show the disagreement.
MarginalSolution closed_form_candidate(const Rates& r);

/// Jump rate of X_t under s: q1*nu_p + (1-rho)*q1*nu_w.
double speed_from_marginals(const Rates& r, const MarginalSolution& s);

/// MGF of T_b ~ Exp(p2) + Exp(q1); requires b < min(p2, q1).
double mgf_tb(const Rates& r, double b);
/// MGF of T_p ~ Exp(q1); requires b < q1.
double mgf_tp(const Rates& r, double b);
/// rho*M_Tb(b) + (1-rho)*M_Tp(b).
double mgf_mixture(const Rates& r, double b);

/// g(b) = b - (p1+p2)(mu(b) - 1) - p2(mu(b)^2 - 1) with mu the MGF mixture.
double g_of_b(const Rates& r, double b);
double g_prime(const Rates& r, double b);

/// h(b) = (p1+p2)(e^b - 1) + p2(e^{2b} - 1).
double h_of_b(const Rates& r, double b);

/// Exponents (a', b', c', d') of the coupled exponential martingale at b.
struct Coupling {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;
};

Coupling coupled_params(const Rates& r, double b);

/// Residuals of  b = -p2(e^c' - 1),  b = -q1(e^d' - 1),  b' = -d',  c' = -a' - d'.
std::array<double, 4> coupling_residuals(const Rates& r, double b, const Coupling& c);

struct MgfPoint {
  double b = 0.0;
  double m_tb = 0.0;
  double m_tp = 0.0;
  double mixture = 0.0;
  double g = 0.0;
  Coupling coupling;
  double h = 0.0;
};

std::vector<MgfPoint> mgf_curve(const Rates& r, std::span<const double> b_grid);

/// Maximiser of g on (-inf, min(p2, q1)); g is concave there.
double g_argmax(const Rates& r);

/// sup_b g(b): exponential moments E[e^{c tau}] are finite below this value.
double tau_exponential_radius(const Rates& r);

/// Solves g(b) = c on the increasing branch b < g_argmax(r) by bisection (tolerance 1e-10).
double solve_g(const Rates& r, double c);

/// E[tau] = 1/(m - w). Throws RegimeError unless m > w.
double expected_tau(const Rates& r);
/// E[X_tau] = m/(m - w).
double expected_x_tau(const Rates& r);

struct MgfTauCheck {
  double b = 0.0;
  double g = 0.0;
  std::size_t n = 0;
  double mean = 0.0;
  double se = 0.0;
  double target = 0.0;
  double z = 0.0;
};

/// Empirical E[exp(g(b) tau)] against rho*M_Tb(b) + (1-rho)*M_Tp(b).
MgfTauCheck mgf_tau_check(std::span<const psi::RegenCycle> cycles, const Rates& r, double b);

struct CltSigma {
  double sigma2 = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

/// Renewal-reward variance Var(X_tau - m*tau)/E[tau] with a delta-method SE.
/// Needs at least 1000 cycles and m > w.
CltSigma clt_sigma(std::span<const psi::RegenCycle> cycles, const Rates& r);

}  // namespace tagsep::analytics
