#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace gradphi {

struct Moments {
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double fourth = 0.0;    // fourth central moment (biased)
  std::size_t n = 0;
  double std_error() const;
};

// Sequential two-pass moments; the order of `x` fixes the rounding.
Moments moments(std::span<const double> x);
double covariance(std::span<const double> x, std::span<const double> y);
double quantile_sorted(std::span<const double> sorted, double p);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample Kolmogorov-Smirnov against a continuous cdf.
KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

// Pearson chi-square of counts against a common Poisson mean.
struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 1.0;
};
ChiSquareResult poisson_dispersion_test(std::span<const double> counts, double expected);

// Delete-one-block jackknife standard error of a statistic of per-replica data.
// `stat` receives the indices of retained replicas.
double jackknife_stderr(std::size_t replicas, std::size_t blocks,
                        const std::function<double(const std::vector<std::size_t>&)>& stat);

struct ProjectedTv {
  double value = 0.0;
  double std_error = 0.0;
  double bin_width = 0.0;
  std::size_t bins = 0;
};

// Histogram TV distance between two samples with a Freedman-Diaconis bin width
// on the pooled data; bootstrap standard error with a seeded generator.
ProjectedTv projected_tv(std::span<const double> a, std::span<const double> b, std::uint64_t seed = 0,
                         int bootstrap = 200);

}  // namespace gradphi
