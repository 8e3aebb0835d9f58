#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "tagsep/errors.hpp"
#include "tagsep/kernel.hpp"
#include "tagsep/parallel.hpp"
#include "tagsep/stats.hpp"

using namespace tagsep;

namespace {

// |mean - target| < 3 SE
void check_mean(const stats::Accumulator& acc, double target) {
  INFO("mean " << acc.mean() << " se " << acc.standard_error() << " target " << target);
  CHECK(std::abs(acc.mean() - target) < 3.0 * acc.standard_error());
}

}  // namespace

TEST_CASE("exponential holding times") {
  RngStream rng(11, 0);
  stats::Accumulator two, one;
  for (int k = 0; k < 1'000'000; ++k) two.add(sample_exponential(rng, 2.0));
  check_mean(two, 0.5);

  // Variance of Exp(1) is 1; the SE of the sample variance uses the fourth
  // central moment 9.
  for (int k = 0; k < 1'000'000; ++k) one.add(sample_exponential(rng, 1.0));
  const double se_var = std::sqrt((9.0 - 1.0) / 1e6);
  CHECK(std::abs(one.variance() - 1.0) < 3.0 * se_var);

  CHECK_THROWS_AS(sample_exponential(rng, 0.0), DomainError);
  CHECK_THROWS_AS(sample_exponential(rng, -1.0), DomainError);
}

TEST_CASE("fixed seed reproduces the draw sequence") {
  RngStream a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  bool differs_stream = false, differs_seed = false;
  for (int k = 0; k < 1000; ++k) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    differs_stream |= x != c.uniform();
    differs_seed |= x != d.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
  }
  CHECK(differs_stream);
  CHECK(differs_seed);
}

TEST_CASE("uniform integers below n") {
  RngStream rng(5, 0);
  std::array<std::uint64_t, 7> counts{};
  for (int k = 0; k < 70'000; ++k) ++counts[rng.below(7)];
  const std::vector<double> probs(7, 1.0 / 7.0);
  CHECK(stats::chi_square_gof(counts, probs).p_value > 1e-3);
}

TEST_CASE("bernoulli reveals") {
  RngStream rng(9, 1);
  for (int k = 0; k < 10'000; ++k) {
    CHECK_FALSE(sample_bernoulli(rng, 0.0));
    CHECK(sample_bernoulli(rng, 1.0));
  }
  stats::Accumulator acc;
  for (int k = 0; k < 1'000'000; ++k) acc.add(sample_bernoulli(rng, 0.3) ? 1.0 : 0.0);
  check_mean(acc, 0.3);
}

TEST_CASE("event catalog selection") {
  RngStream rng(17, 2);
  SUBCASE("equal rates split evenly") {
    EventCatalog<char> cat;
    cat.add('A', 1.0);
    cat.add('B', 1.0);
    stats::Accumulator a;
    for (int k = 0; k < 1'000'000; ++k) a.add(sample_event(rng, cat) == 'A' ? 1.0 : 0.0);
    check_mean(a, 0.5);
  }
  SUBCASE("proportional to rate") {
    EventCatalog<char> cat;
    cat.add('A', 3.0);
    cat.add('B', 1.0);
    stats::Accumulator a;
    for (int k = 0; k < 1'000'000; ++k) a.add(sample_event(rng, cat) == 'A' ? 1.0 : 0.0);
    check_mean(a, 0.75);
  }
  SUBCASE("single entry") {
    EventCatalog<std::string> cat;
    cat.add("only", 0.25);
    for (int k = 0; k < 1000; ++k) CHECK(sample_event(rng, cat) == "only");
  }
  SUBCASE("zero rates are dropped and an empty catalog refuses") {
    EventCatalog<int> cat;
    cat.add(1, 0.0);
    CHECK(cat.empty());
    CHECK(cat.total_rate() == 0.0);
    CHECK_THROWS_AS(sample_event(rng, cat), NoActiveEventsError);
  }
}

TEST_CASE("parallel_map is ordered and thread-count invariant") {
  auto fn = [](std::size_t i) {
    RngStream rng(99, i);
    double s = 0.0;
    for (int k = 0; k < 100; ++k) s += rng.uniform();
    return s;
  };
  const auto one = parallel_map(257, 1, fn);
  const auto four = parallel_map(257, 4, fn);
  const auto seven = parallel_map(257, 7, fn);
  CHECK(one == four);
  CHECK(one == seven);
  CHECK(parallel_map(0, 3, fn).empty());

  auto boom = [](std::size_t i) -> int {
    if (i == 5 || i == 9) throw std::runtime_error("item " + std::to_string(i));
    return static_cast<int>(i);
  };
  try {
    parallel_map(20, 4, boom);
    FAIL("expected an exception");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()) == "item 5");
  }
}

TEST_CASE("accumulator merge equals sequential") {
  stats::Accumulator all, a, b;
  for (int k = 0; k < 100; ++k) {
    const double x = std::sin(k * 0.7) + k * 0.01;
    all.add(x);
    (k < 37 ? a : b).add(x);
  }
  a.merge(b);
  CHECK(a.count() == all.count());
  CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-14));
  CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
}

// Reference values below come from scipy.stats.
TEST_CASE("chi-square goodness of fit") {
  const std::array<std::uint64_t, 4> obs{18, 22, 30, 30};
  const std::array<double, 4> p{0.25, 0.25, 0.25, 0.25};
  const auto r = stats::chi_square_gof(obs, p);
  CHECK(r.statistic == doctest::Approx(4.32).epsilon(1e-12));
  CHECK(r.dof == 3);
  CHECK(r.p_value == doctest::Approx(0.22891886433610517).epsilon(1e-10));

  const std::array<std::uint64_t, 3> obs2{5, 15, 30};
  const std::array<double, 3> p2{0.2, 0.3, 0.5};
  const auto r2 = stats::chi_square_gof(obs2, p2);
  CHECK(r2.statistic == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(r2.p_value == doctest::Approx(0.1737739434504451).epsilon(1e-10));

  const std::array<std::uint64_t, 2> bad{1, 3};
  const std::array<double, 2> pbad{0.0, 1.0};
  CHECK(stats::chi_square_gof(bad, pbad).p_value == 0.0);
}

TEST_CASE("normality and KS tests") {
  std::vector<double> xs;
  for (int i = 0; i < 50; ++i) xs.push_back(((i * 37) % 101) / 101.0 - 0.5);
  const auto k2 = stats::dagostino_pearson(xs);
  CHECK(k2.skew_z == doctest::Approx(-0.01967573940698716).epsilon(1e-9));
  CHECK(k2.kurtosis_z == doctest::Approx(-3.512363907237177).epsilon(1e-9));
  CHECK(k2.statistic == doctest::Approx(12.337087351583621).epsilon(1e-9));
  CHECK(k2.p_value == doctest::Approx(0.002094283736835133).epsilon(1e-8));

  std::vector<double> ys;
  for (int i = 0; i < 60; ++i) ys.push_back(std::sin(i * 1.3) + 0.1 * i / 60.0);
  CHECK(stats::dagostino_pearson(ys).statistic == doctest::Approx(55.00618179598754).epsilon(1e-9));
  CHECK_THROWS(stats::dagostino_pearson(std::vector<double>(10, 1.0)));

  std::vector<double> scaled;
  for (double x : xs) scaled.push_back(2 * x);
  const auto ks = stats::ks_test(scaled, stats::normal_cdf);
  CHECK(ks.statistic == doctest::Approx(0.1634941909034049).epsilon(1e-12));
  // Asymptotic p-value with the small-sample correction; scipy's exact value is 0.1232.
  CHECK(ks.p_value == doctest::Approx(0.1232190903312087).epsilon(0.1));

  std::vector<double> a, b;
  for (int i = 0; i < 40; ++i) a.push_back(((i * 13) % 29) / 29.0);
  for (int i = 0; i < 50; ++i) b.push_back(((i * 7) % 31) / 31.0 + 0.1);
  const auto ks2 = stats::ks_two_sample(a, b);
  CHECK(ks2.statistic == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(ks2.p_value == doctest::Approx(0.6512648950824622).epsilon(0.05));
}

TEST_CASE("z scores and the normal cdf") {
  CHECK(stats::z_score(1.3, 0.1, 1.0) == doctest::Approx(3.0));
  CHECK(stats::z_score(1.0, 0.0, 1.0) == 0.0);
  CHECK(std::isinf(stats::z_score(1.1, 0.0, 1.0)));
  CHECK(stats::normal_cdf(0.0) == doctest::Approx(0.5));
  CHECK(stats::normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
}
