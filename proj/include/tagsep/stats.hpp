#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tagsep::stats {

/// Streaming mean/variance (Welford), mergeable across replicas.
class Accumulator {
 public:
  void add(double x);
  void merge(const Accumulator& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance; 0 with fewer than two samples.
  double variance() const;
  double standard_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct Summary {
  std::size_t n = 0;
  double mean = 0.0;
  double variance = 0.0;
  double se = 0.0;
};

Summary summarize(std::span<const double> xs);

double z_score(double estimate, double se, double target);

double normal_cdf(double x);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit of observed counts against cell probabilities.
/// Cells with zero expected probability must have zero count.
ChiSquareResult chi_square_gof(std::span<const std::uint64_t> observed,
                               std::span<const double> probabilities);

/// Upper tail of the Kolmogorov distribution, P(K > x).
double kolmogorov_survival(double x);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against a continuous cdf.
KsResult ks_test(std::vector<double> samples, const std::function<double(double)>& cdf);

struct NormalityResult {
  double skew_z = 0.0;
  double kurtosis_z = 0.0;
  double statistic = 0.0;  // skew_z^2 + kurtosis_z^2
  double p_value = 1.0;
};

/// D'Agostino-Pearson omnibus test of normality (location and scale free).
/// Needs at least 20 samples.
NormalityResult dagostino_pearson(std::span<const double> xs);

/// Two-sample Kolmogorov-Smirnov test.
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

}  // namespace tagsep::stats
