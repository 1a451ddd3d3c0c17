#include "gradphi/stats.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gradphi/error.hpp"
#include "gradphi/rng.hpp"
#include "gradphi/special.hpp"

namespace gradphi {

double Moments::std_error() const { return n > 0 ? std::sqrt(variance / static_cast<double>(n)) : 0.0; }

Moments moments(std::span<const double> x) {
  Moments m;
  m.n = x.size();
  if (x.empty()) return m;
  m.mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double s2 = 0.0, s4 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    s2 += d * d;
    s4 += d * d * d * d;
  }
  m.variance = x.size() > 1 ? s2 / static_cast<double>(x.size() - 1) : 0.0;
  m.fourth = s4 / static_cast<double>(x.size());
  return m;
}

double covariance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) fail(ErrorCode::kInsufficientData, "covariance needs two paired samples");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - mx) * (y[i] - my);
  return s / static_cast<double>(x.size() - 1);
}

double quantile_sorted(std::span<const double> s, double p) {
  if (s.empty()) fail(ErrorCode::kInsufficientData, "quantile of an empty sample");
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= s.size()) return s.back();
  return s[i] + (pos - static_cast<double>(i)) * (s[i + 1] - s[i]);
}

KsResult ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf) {
  if (x.empty()) fail(ErrorCode::kInsufficientData, "KS test on an empty sample");
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double rn = std::sqrt(n);
  return {d, kolmogorov_survival((rn + 0.12 + 0.11 / rn) * d)};
}

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kInsufficientData, "KS test on an empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  const double ne = std::sqrt(na * nb / (na + nb));
  return {d, kolmogorov_survival((ne + 0.12 + 0.11 / ne) * d)};
}

ChiSquareResult poisson_dispersion_test(std::span<const double> counts, double expected) {
  if (counts.size() < 2 || !(expected > 0.0)) fail(ErrorCode::kInsufficientData, "dispersion test needs >= 2 counts");
  ChiSquareResult r;
  for (double c : counts) r.statistic += (c - expected) * (c - expected) / expected;
  r.dof = static_cast<double>(counts.size());
  r.p_value = chi_square_survival(r.statistic, r.dof);
  return r;
}

double jackknife_stderr(std::size_t replicas, std::size_t blocks,
                        const std::function<double(const std::vector<std::size_t>&)>& stat) {
  blocks = std::min(blocks, replicas);
  if (blocks < 2) fail(ErrorCode::kInsufficientData, "jackknife needs at least two blocks");
  std::vector<double> est(blocks);
  std::vector<std::size_t> keep;
  keep.reserve(replicas);
  for (std::size_t b = 0; b < blocks; ++b) {
    keep.clear();
    for (std::size_t r = 0; r < replicas; ++r)
      if (r % blocks != b) keep.push_back(r);
    est[b] = stat(keep);
  }
  const Moments m = moments(est);
  const double g = static_cast<double>(blocks);
  return std::sqrt((g - 1.0) / g * m.variance * (g - 1.0));
}

namespace {

double histogram_tv(std::span<const double> a, std::span<const double> b, double lo, double width, std::size_t bins,
                    std::vector<double>& ha, std::vector<double>& hb) {
  ha.assign(bins, 0.0);
  hb.assign(bins, 0.0);
  auto bin = [&](double v) {
    const double s = std::floor((v - lo) / width);
    return static_cast<std::size_t>(std::clamp(s, 0.0, static_cast<double>(bins - 1)));
  };
  for (double v : a) ha[bin(v)] += 1.0;
  for (double v : b) hb[bin(v)] += 1.0;
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < bins; ++i) tv += std::abs(ha[i] / na - hb[i] / nb);
  return 0.5 * tv;
}

}  // namespace

ProjectedTv projected_tv(std::span<const double> a, std::span<const double> b, std::uint64_t seed, int bootstrap) {
  constexpr std::size_t kMinSamples = 100;
  if (a.size() < kMinSamples || b.size() < kMinSamples)
    fail(ErrorCode::kInsufficientData,
         fmt::format("projected TV needs at least {} samples per side, got {} and {}", kMinSamples, a.size(), b.size()));
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  std::sort(pooled.begin(), pooled.end());
  const double iqr = quantile_sorted(pooled, 0.75) - quantile_sorted(pooled, 0.25);
  const double lo = pooled.front(), hi = pooled.back();
  ProjectedTv r;
  if (hi == lo) {
    r.bins = 1;
    r.bin_width = 0.0;
    return r;
  }
  double width = 2.0 * iqr / std::cbrt(static_cast<double>(pooled.size()));
  if (!(width > 0.0)) width = (hi - lo) / std::sqrt(static_cast<double>(pooled.size()));
  r.bins = std::min<std::size_t>(static_cast<std::size_t>(std::ceil((hi - lo) / width)) + 1, 1'000'000);
  width = std::max(width, (hi - lo) / static_cast<double>(r.bins - 1));
  r.bin_width = width;
  std::vector<double> ha, hb;
  r.value = histogram_tv(a, b, lo, width, r.bins, ha, hb);
  if (bootstrap > 1) {
    CounterRng rng(derive_seed(seed, "bootstrap", 0));
    std::vector<double> ra(a.size()), rb(b.size()), est(static_cast<std::size_t>(bootstrap));
    for (auto& e : est) {
      for (auto& v : ra) v = a[rng.below(a.size())];
      for (auto& v : rb) v = b[rng.below(b.size())];
      e = histogram_tv(ra, rb, lo, width, r.bins, ha, hb);
    }
    r.std_error = std::sqrt(moments(est).variance);
  }
  return r;
}

}  // namespace gradphi
