#include "tagsep/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace tagsep::stats {

void Accumulator::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void Accumulator::merge(const Accumulator& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double na = static_cast<double>(n_);
  const double nb = static_cast<double>(other.n_);
  const double delta = other.mean_ - mean_;
  const double n = na + nb;
  mean_ += delta * nb / n;
  m2_ += other.m2_ + delta * delta * na * nb / n;
  n_ += other.n_;
}

double Accumulator::variance() const {
  return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0;
}

double Accumulator::standard_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

Summary summarize(std::span<const double> xs) {
  Accumulator acc;
  for (double x : xs) acc.add(x);
  return Summary{acc.count(), acc.mean(), acc.variance(), acc.standard_error()};
}

double z_score(double estimate, double se, double target) {
  if (se > 0.0) return (estimate - target) / se;
  return estimate == target ? 0.0 : std::copysign(INFINITY, estimate - target);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> probabilities) {
  if (observed.size() != probabilities.size() || observed.empty())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  std::uint64_t total = 0;
  for (auto c : observed) total += c;
  ChiSquareResult res;
  if (total == 0) return res;
  int cells = 0;
  for (std::size_t k = 0; k < observed.size(); ++k) {
    const double expected = probabilities[k] * static_cast<double>(total);
    if (expected <= 0.0) {
      if (observed[k] != 0) {
        res.statistic = INFINITY;
        res.p_value = 0.0;
        res.dof = std::max(cells - 1, 0);
        return res;
      }
      continue;
    }
    const double diff = static_cast<double>(observed[k]) - expected;
    res.statistic += diff * diff / expected;
    ++cells;
  }
  res.dof = cells - 1;
  if (res.dof <= 0) {
    res.p_value = 1.0;
    return res;
  }
  boost::math::chi_squared dist(res.dof);
  res.p_value = boost::math::cdf(boost::math::complement(dist, res.statistic));
  return res;
}

double kolmogorov_survival(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-18) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_test: no samples");
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  const double sn = std::sqrt(n);
  return KsResult{d, kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d)};
}

NormalityResult dagostino_pearson(std::span<const double> xs) {
  const double n = static_cast<double>(xs.size());
  if (xs.size() < 20) throw std::invalid_argument("dagostino_pearson: need at least 20 samples");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  if (!(m2 > 0.0)) throw std::invalid_argument("dagostino_pearson: zero variance");

  // Skewness (D'Agostino 1970).
  const double skew = m3 / std::pow(m2, 1.5);
  double y = skew * std::sqrt((n + 1) * (n + 3) / (6 * (n - 2)));
  const double beta2 = 3 * (n * n + 27 * n - 70) * (n + 1) * (n + 3) /
                       ((n - 2) * (n + 5) * (n + 7) * (n + 9));
  const double w2 = -1 + std::sqrt(2 * (beta2 - 1));
  const double delta = 1 / std::sqrt(0.5 * std::log(w2));
  const double alpha = std::sqrt(2 / (w2 - 1));
  if (y == 0.0) y = 1.0;
  const double zs = delta * std::log(y / alpha + std::sqrt((y / alpha) * (y / alpha) + 1));

  // Kurtosis (Anscombe-Glynn 1983).
  const double b2 = m4 / (m2 * m2);
  const double e = 3 * (n - 1) / (n + 1);
  const double var_b2 = 24 * n * (n - 2) * (n - 3) / ((n + 1) * (n + 1) * (n + 3) * (n + 5));
  const double x = (b2 - e) / std::sqrt(var_b2);
  const double sqrt_beta1 = 6 * (n * n - 5 * n + 2) / ((n + 7) * (n + 9)) *
                            std::sqrt(6 * (n + 3) * (n + 5) / (n * (n - 2) * (n - 3)));
  const double a = 6 + 8 / sqrt_beta1 * (2 / sqrt_beta1 + std::sqrt(1 + 4 / (sqrt_beta1 * sqrt_beta1)));
  const double term1 = 1 - 2 / (9 * a);
  const double denom = 1 + x * std::sqrt(2 / (a - 4));
  const double term2 = denom == 0.0 ? 99.0
                                    : std::copysign(std::cbrt((1 - 2 / a) / std::abs(denom)), denom);
  const double zk = (term1 - term2) / std::sqrt(2 / (9 * a));

  NormalityResult r;
  r.skew_z = zs;
  r.kurtosis_z = zk;
  r.statistic = zs * zs + zk * zk;
  r.p_value = std::exp(-0.5 * r.statistic);  // chi-square with 2 dof
  return r;
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return KsResult{d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

}  // namespace tagsep::stats
