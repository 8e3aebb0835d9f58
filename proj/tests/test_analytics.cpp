#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "tagsep/analytics.hpp"
#include "tagsep/errors.hpp"

using namespace tagsep;
using namespace tagsep::analytics;

namespace {

const Rates kRegen{0.1, 0.1, 5.0, 0.1};

double max_abs(const std::array<double, 3>& a) {
  return std::max({std::abs(a[0]), std::abs(a[1]), std::abs(a[2])});
}

}  // namespace

TEST_CASE("site-1 marginals") {
  auto s = marginal_solve({1.0, 1.0, 2.0, 0.5});
  CHECK(s.nu_w == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(s.nu_b == doctest::Approx(1.0 / 3).epsilon(1e-14));
  CHECK(s.nu_p == doctest::Approx(1.0 / 3).epsilon(1e-14));

  s = marginal_solve({0.0, 1.0, 1.0, 1.0});
  CHECK(s.nu_w == doctest::Approx(0.25));
  CHECK(s.nu_b == doctest::Approx(0.25));
  CHECK(s.nu_p == doctest::Approx(0.5));

  const Rates z{0.0, 1.5, 4.0, 0.0};
  s = marginal_solve(z);
  CHECK(s.nu_w == doctest::Approx(4.0 / 5.5));
  CHECK(s.nu_b == doctest::Approx(0.0));
  CHECK(s.nu_p == doctest::Approx(1.5 / 5.5));
}

TEST_CASE("marginals on a random grid") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> rate(0.01, 20.0), dens(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const Rates r{rate(gen), rate(gen), rate(gen), dens(gen)};
    const auto s = marginal_solve(r);
    CHECK(max_abs(marginal_residuals(r, s)) < 1e-12);
    CHECK(s.nu_w >= 0.0);
    CHECK(s.nu_b >= 0.0);
    CHECK(s.nu_p >= 0.0);
    CHECK(speed_from_marginals(r, s) == doctest::Approx(speed(r)).epsilon(1e-12));
  }
}

TEST_CASE("speed identity examples") {
  const Rates a{1.0, 1.0, 2.0, 0.5};
  CHECK(speed_from_marginals(a, marginal_solve(a)) == doctest::Approx(1.0));
  const Rates b{0.0, 1.0, 3.0, 0.0};
  CHECK(speed_from_marginals(b, marginal_solve(b)) == doctest::Approx(3.0));
  const Rates c{0.0, 1.0, 3.0, 1.0};
  CHECK(c.q1 * marginal_solve(c).nu_p == doctest::Approx(speed(c)));
}

TEST_CASE("the closed-form candidate violates the balance system") {
  const Rates r{1.0, 1.0, 2.0, 0.5};
  const auto cand = closed_form_candidate(r);
  CHECK(cand.nu_p == doctest::Approx(2.0 / 3.0));
  CHECK(max_abs(marginal_residuals(r, cand)) > 1e-3);
}

TEST_CASE("holding-time MGFs") {
  const Rates r{0.0, 1.0, 2.0, 0.5};
  CHECK(mgf_tb(r, 0.0) == 1.0);
  CHECK(mgf_tp(r, 0.0) == 1.0);
  CHECK(mgf_tb(r, -1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const double h = 1e-5;
  CHECK((mgf_tb(r, h) - mgf_tb(r, -h)) / (2 * h) == doctest::Approx(1.0 / r.p2 + 1.0 / r.q1).epsilon(1e-8));
  CHECK((mgf_tp(r, h) - mgf_tp(r, -h)) / (2 * h) == doctest::Approx(1.0 / r.q1).epsilon(1e-8));
  CHECK_THROWS_AS(mgf_tb(r, 1.0), DomainError);
  CHECK_THROWS_AS(mgf_tp(r, 2.0), DomainError);
  const Rates z{0.0, 1.0, 2.0, 0.0};
  CHECK(mgf_mixture(z, -0.3) == mgf_tp(z, -0.3));
}

TEST_CASE("g and its derivative") {
  CHECK(g_of_b(kRegen, 0.0) == 0.0);
  CHECK(g_prime(kRegen, 0.0) == doctest::Approx(0.52).epsilon(1e-13));
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> rate(0.05, 10.0), dens(0.0, 1.0);
  for (int k = 0; k < 300; ++k) {
    const Rates r{rate(gen), rate(gen), rate(gen), dens(gen)};
    const double h = 1e-5;
    const double fd = (g_of_b(r, h) - g_of_b(r, -h)) / (2 * h);
    CHECK(std::abs(fd - (1.0 - drift(r) / speed(r))) < 1e-6 * std::max(1.0, std::abs(fd)));
    CHECK(g_prime(r, 0.0) == doctest::Approx(1.0 - drift(r) / speed(r)).epsilon(1e-10));
    // Concavity on a few points of the domain.
    const double top = std::min(r.p2, r.q1);
    for (double b : {-2.0, -0.5, 0.0, 0.5 * top}) {
      const double e = 1e-4;
      CHECK(g_of_b(r, b + e) + g_of_b(r, b - e) - 2 * g_of_b(r, b) <= 1e-9);
    }
  }
}

TEST_CASE("h") {
  CHECK(h_of_b({1.0, 1.0, 2.0, 0.5}, 0.0) == 0.0);
  CHECK(h_of_b({1.0, 1.0, 2.0, 0.5}, std::log(2.0)) == doctest::Approx(5.0));
  const Rates r{0.3, 0.7, 1.0, 0.5};
  const double h = 1e-6;
  CHECK((h_of_b(r, h) - h_of_b(r, -h)) / (2 * h) == doctest::Approx(drift(r)).epsilon(1e-8));
}

TEST_CASE("coupled exponents satisfy the coupling system") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> rate(0.05, 10.0), dens(0.0, 1.0), frac(-3.0, 0.99);
  for (int k = 0; k < 1000; ++k) {
    const Rates r{rate(gen), rate(gen), rate(gen), dens(gen)};
    const double b = frac(gen) * std::min(r.p2, r.q1);
    const auto c = coupled_params(r, b);
    for (double v : coupling_residuals(r, b, c)) CHECK(std::abs(v) < 1e-12 * std::max(1.0, std::abs(b)));
    CHECK(c.a == doctest::Approx(std::log(mgf_tb(r, b))));
    CHECK(c.b == doctest::Approx(std::log(mgf_tp(r, b))));
  }
}

TEST_CASE("mgf curve rows") {
  const std::array<double, 3> grid{-0.02, -0.05, -0.1};
  const auto pts = mgf_curve(kRegen, grid);
  REQUIRE(pts.size() == 3);
  for (const auto& p : pts) {
    CHECK(p.mixture == doctest::Approx(kRegen.rho * p.m_tb + (1 - kRegen.rho) * p.m_tp));
    CHECK(p.g == doctest::Approx(g_of_b(kRegen, p.b)));
    CHECK(p.g < 0.0);
  }
  CHECK(pts[1].mixture == doctest::Approx(0.9570957095709571).epsilon(1e-14));
  CHECK(pts[1].g == doctest::Approx(-0.033022361642104814).epsilon(1e-13));
}

TEST_CASE("g inversion and radius") {
  const double bstar = g_argmax(kRegen);
  CHECK(bstar > 0.0);
  CHECK(bstar < std::min(kRegen.p2, kRegen.q1));
  CHECK(std::abs(g_prime(kRegen, bstar)) < 1e-8);
  const double radius = tau_exponential_radius(kRegen);
  CHECK(radius > 0.0);
  for (double c : {-0.5, -0.033022361642104814, 0.0, 0.5 * radius}) {
    const double b = solve_g(kRegen, c);
    CHECK(b <= bstar);
    CHECK(g_of_b(kRegen, b) == doctest::Approx(c).epsilon(1e-8));
  }
  CHECK(solve_g(kRegen, g_of_b(kRegen, -0.05)) == doctest::Approx(-0.05).epsilon(1e-8));
  CHECK_THROWS_AS(solve_g(kRegen, radius + 1.0), DomainError);
}

TEST_CASE("regeneration moments") {
  CHECK(expected_tau(kRegen) == doctest::Approx(1.0 / (5.0 / 6.0 - 0.4)).epsilon(1e-14));
  CHECK(expected_tau(kRegen) == doctest::Approx(2.3076923076923).epsilon(1e-12));
  CHECK(expected_x_tau(kRegen) == doctest::Approx(1.9230769230769).epsilon(1e-12));
  CHECK_THROWS_AS(expected_tau({1.0, 1.0, 2.0, 0.5}), RegimeError);
  // Blows up as m approaches w from above.
  const Rates near{1.0, 1.0, 4.000001, 0.0};
  CHECK(expected_tau(near) > 1e5);
  // E tau is also -1/g'(0) scaled by 1/m.
  CHECK(expected_tau(kRegen) == doctest::Approx(1.0 / (speed(kRegen) * g_prime(kRegen, 0.0))));
}

TEST_CASE("mgf check and CLT variance on simulated cycles") {
  const auto run = psi::run_cycles(kRegen, 50'000, 21);
  const auto zero = mgf_tau_check(run.cycles, kRegen, 0.0);
  CHECK(zero.mean == 1.0);
  CHECK(zero.target == 1.0);
  CHECK(zero.se == 0.0);
  for (double b : {-0.02, -0.05, -0.1}) {
    const auto chk = mgf_tau_check(run.cycles, kRegen, b);
    CHECK(std::abs(chk.z) < 3.0);
    CHECK(chk.target == doctest::Approx(mgf_mixture(kRegen, b)));
  }
  const Rates z{0.1, 0.1, 5.0, 0.0};
  const auto run0 = psi::run_cycles(z, 2000, 4);
  CHECK(mgf_tau_check(run0.cycles, z, -0.05).target == doctest::Approx(mgf_tp(z, -0.05)));

  const auto s1 = clt_sigma(run.cycles, kRegen);
  CHECK(s1.sigma2 > 0.0);
  CHECK(s1.se > 0.0);
  const auto other = psi::run_cycles(kRegen, 50'000, 22);
  const auto s2 = clt_sigma(other.cycles, kRegen);
  CHECK(std::abs(s1.sigma2 - s2.sigma2) < 3.0 * std::hypot(s1.se, s2.se));

  std::vector<psi::RegenCycle> few(run.cycles.begin(), run.cycles.begin() + 999);
  CHECK_THROWS_AS(clt_sigma(few, kRegen), DomainError);
  CHECK_THROWS_AS(clt_sigma(run.cycles, {1.0, 1.0, 2.0, 0.5}), RegimeError);
}
