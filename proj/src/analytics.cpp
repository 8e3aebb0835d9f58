#include "tagsep/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "tagsep/errors.hpp"
#include "tagsep/stats.hpp"

namespace tagsep::analytics {

MarginalSolution marginal_solve(const Rates& r) {
  validate(r);
  Eigen::Matrix3d a;
  // Unknown order: (nu_w, nu_b, nu_p).
  a << r.rho * r.q1, -r.p2, 0.0,
       r.p2, r.p2, -r.q1,
       1.0, 1.0, 1.0;
  const Eigen::Vector3d rhs(0.0, 0.0, 1.0);
  const Eigen::Vector3d x = a.fullPivLu().solve(rhs);
  return MarginalSolution{x(0), x(1), x(2)};
}

std::array<double, 3> marginal_residuals(const Rates& r, const MarginalSolution& s) {
  return {r.rho * r.q1 * s.nu_w - r.p2 * s.nu_b,
          r.p2 * (s.nu_w + s.nu_b) - r.q1 * s.nu_p,
          s.nu_w + s.nu_b + s.nu_p - 1.0};
}

MarginalSolution closed_form_candidate(const Rates& r) {
  validate(r);
  const double den = (r.q1 + r.p2) * (r.p2 + r.rho * r.q1);
  return MarginalSolution{r.p2 * (r.q1 - r.p2) / den, r.rho * r.q1 * (r.q1 - r.p2) / den,
                          2.0 * r.p2 / (r.q1 + r.p2)};
}

double speed_from_marginals(const Rates& r, const MarginalSolution& s) {
  return r.q1 * s.nu_p + (1.0 - r.rho) * r.q1 * s.nu_w;
}

double mgf_tb(const Rates& r, double b) {
  validate(r);
  if (!(b < std::min(r.p2, r.q1)))
    throw DomainError("M_Tb(b) needs b < min(p2, q1), got b=" + std::to_string(b));
  return r.p2 / (r.p2 - b) * (r.q1 / (r.q1 - b));
}

double mgf_tp(const Rates& r, double b) {
  validate(r);
  if (!(b < r.q1)) throw DomainError("M_Tp(b) needs b < q1, got b=" + std::to_string(b));
  return r.q1 / (r.q1 - b);
}

double mgf_mixture(const Rates& r, double b) {
  // M_Tb's domain is the binding one even when rho = 0.
  return r.rho * mgf_tb(r, b) + (1.0 - r.rho) * mgf_tp(r, b);
}

double g_of_b(const Rates& r, double b) {
  const double mu = mgf_mixture(r, b);
  return b - (r.p1 + r.p2) * (mu - 1.0) - r.p2 * (mu * mu - 1.0);
}

double g_prime(const Rates& r, double b) {
  const double tb = mgf_tb(r, b);
  const double tp = mgf_tp(r, b);
  const double dtb = tb * (1.0 / (r.p2 - b) + 1.0 / (r.q1 - b));
  const double dtp = tp / (r.q1 - b);
  const double mu = r.rho * tb + (1.0 - r.rho) * tp;
  const double dmu = r.rho * dtb + (1.0 - r.rho) * dtp;
  return 1.0 - (r.p1 + r.p2) * dmu - 2.0 * r.p2 * mu * dmu;
}

double h_of_b(const Rates& r, double b) {
  validate(r);
  return (r.p1 + r.p2) * std::expm1(b) + r.p2 * std::expm1(2.0 * b);
}

Coupling coupled_params(const Rates& r, double b) {
  Coupling c;
  c.a = std::log(mgf_tb(r, b));
  c.b = std::log(mgf_tp(r, b));
  c.c = std::log1p(-b / r.p2);
  c.d = -c.b;
  return c;
}

std::array<double, 4> coupling_residuals(const Rates& r, double b, const Coupling& c) {
  return {b + r.p2 * std::expm1(c.c), b + r.q1 * std::expm1(c.d), c.b + c.d, c.c + c.a + c.d};
}

std::vector<MgfPoint> mgf_curve(const Rates& r, std::span<const double> b_grid) {
  std::vector<MgfPoint> out;
  out.reserve(b_grid.size());
  for (double b : b_grid) {
    MgfPoint p;
    p.b = b;
    p.m_tb = mgf_tb(r, b);
    p.m_tp = mgf_tp(r, b);
    p.mixture = r.rho * p.m_tb + (1.0 - r.rho) * p.m_tp;
    p.g = g_of_b(r, b);
    p.coupling = coupled_params(r, b);
    p.h = h_of_b(r, b);
    out.push_back(p);
  }
  return out;
}

double g_argmax(const Rates& r) {
  validate(r);
  const double pole = std::min(r.p2, r.q1);
  // g' decreases from 1 at -inf to -inf at the pole.
  double lo = -1.0;
  while (g_prime(r, lo) <= 0.0) lo *= 2.0;
  double hi = pole;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid >= pole || g_prime(r, mid) < 0.0)
      hi = mid;
    else
      lo = mid;
  }
  return lo;
}

double tau_exponential_radius(const Rates& r) { return g_of_b(r, g_argmax(r)); }

double solve_g(const Rates& r, double c) {
  const double top = g_argmax(r);
  const double gmax = g_of_b(r, top);
  if (c > gmax) throw DomainError("g(b) = c has no solution above the maximum of g");
  double lo = std::min(-1.0, top - 1.0);
  while (g_of_b(r, lo) > c) lo = 2.0 * lo - 1.0;
  double hi = top;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (g_of_b(r, mid) < c)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

namespace {

void require_clt(const Rates& r, const char* what) {
  const auto d = derive(r);
  if (!d.clt_regime)
    throw RegimeError(std::string(what) + " requires speed m > drift w (m=" +
                      std::to_string(d.m) + ", w=" + std::to_string(d.w) + ")");
}

}  // namespace

double expected_tau(const Rates& r) {
  require_clt(r, "a finite mean regeneration time");
  return 1.0 / (speed(r) - drift(r));
}

double expected_x_tau(const Rates& r) { return speed(r) * expected_tau(r); }

MgfTauCheck mgf_tau_check(std::span<const psi::RegenCycle> cycles, const Rates& r, double b) {
  require_clt(r, "the regeneration-time MGF identity");
  MgfTauCheck out;
  out.b = b;
  out.g = g_of_b(r, b);
  out.target = mgf_mixture(r, b);
  stats::Accumulator acc;
  for (const auto& c : cycles) acc.add(std::exp(out.g * c.tau));
  out.n = acc.count();
  out.mean = acc.mean();
  out.se = acc.standard_error();
  out.z = stats::z_score(out.mean, out.se, out.target);
  return out;
}

CltSigma clt_sigma(std::span<const psi::RegenCycle> cycles, const Rates& r) {
  require_clt(r, "the regenerative CLT variance");
  if (cycles.size() < 1000) throw DomainError("clt_sigma needs at least 1000 cycles");
  const double m = speed(r);
  const double n = static_cast<double>(cycles.size());

  stats::Accumulator y_acc, tau_acc;
  for (const auto& c : cycles) {
    y_acc.add(static_cast<double>(c.x_tau) - m * c.tau);
    tau_acc.add(c.tau);
  }
  const double ybar = y_acc.mean();
  const double mean_tau = tau_acc.mean();
  const double var_y = y_acc.variance();

  CltSigma out;
  out.n = cycles.size();
  out.sigma2 = var_y / mean_tau;
  // Ratio of means Z/tau with Z_i = (Y_i - Ybar)^2 * n/(n-1).
  stats::Accumulator lin;
  const double bessel = n / (n - 1.0);
  for (const auto& c : cycles) {
    const double dy = static_cast<double>(c.x_tau) - m * c.tau - ybar;
    lin.add(dy * dy * bessel - out.sigma2 * c.tau);
  }
  out.se = std::sqrt(lin.variance() / n) / mean_tau;
  return out;
}

}  // namespace tagsep::analytics
