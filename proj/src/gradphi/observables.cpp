#include "gradphi/observables.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

#include "gradphi/error.hpp"

namespace gradphi {

SpectralProfile::SpectralProfile(int n) : n_(n) {
  if (n < 2) fail(ErrorCode::kInvalidArgument, fmt::format("spectral profile needs N >= 2, got {}", n));
  const auto un = static_cast<std::size_t>(n);
  eigen_.resize(un);
  basis_.assign(un * (un + 1), 0.0);
  const double scale = std::sqrt(2.0 / n);
  for (int j = 0; j < n; ++j) {
    eigen_[static_cast<std::size_t>(j)] = 1.0 - std::cos(j * std::numbers::pi / n);
    for (int k = 1; k < n; ++k)
      basis_[static_cast<std::size_t>(j) * (un + 1) + static_cast<std::size_t>(k)] =
          scale * std::sin(static_cast<double>(j) * k * std::numbers::pi / n);
  }
}

std::vector<double> SpectralProfile::project(const std::vector<double>& v) const {
  if (v.size() != static_cast<std::size_t>(n_) + 1) fail(ErrorCode::kInvalidArgument, "projection vector has wrong length");
  std::vector<double> a(static_cast<std::size_t>(n_), 0.0);
  for (int j = 1; j < n_; ++j) {
    double s = 0.0;
    for (int k = 1; k < n_; ++k) s += basis(j, k) * v[static_cast<std::size_t>(k)];
    a[static_cast<std::size_t>(j)] = s;
  }
  return a;
}

double spectral_gap(int n) {
  if (n < 2) fail(ErrorCode::kInvalidArgument, fmt::format("spectral gap needs N >= 2, got {}", n));
  // 1 - cos(x) = 2 sin^2(x/2) without cancellation
  const double s = std::sin(std::numbers::pi / (2.0 * n));
  return 2.0 * s * s;
}

double fourier_stat(const std::vector<double>& x, int j) {
  const int n = static_cast<int>(x.size()) - 1;
  if (n < 2) fail(ErrorCode::kInvalidArgument, "fourier_stat needs N >= 2");
  if (j < 1 || j > n - 1) fail(ErrorCode::kInvalidArgument, fmt::format("fourier_stat mode j={} outside 1..{}", j, n - 1));
  double s = 0.0;
  for (int k = 1; k < n; ++k) s += std::sin(static_cast<double>(j) * k * std::numbers::pi / n) * x[static_cast<std::size_t>(k)];
  return s;
}

double fourier_stat(const Interface& x, int j) {
  const auto h = x.heights();
  return fourier_stat(std::vector<double>(h.begin(), h.end()), j);
}

std::vector<double> heat_mean_solution(const SpectralProfile& profile, const Interface& x0, double t) {
  if (!(t >= 0.0)) fail(ErrorCode::kInvalidArgument, fmt::format("heat_mean_solution needs t >= 0, got {}", t));
  const int n = x0.size();
  if (profile.size() != n) fail(ErrorCode::kInvalidArgument, "spectral profile N does not match the interface");
  const auto g = x0.gauged();
  const auto a = profile.project(g);
  std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
  for (int j = 1; j < n; ++j) {
    const double c = a[static_cast<std::size_t>(j)] * std::exp(-profile.eigenvalue(j) * t);
    if (c == 0.0) continue;
    for (int k = 1; k < n; ++k) v[static_cast<std::size_t>(k)] += c * profile.basis(j, k);
  }
  for (int k = 0; k <= n; ++k) v[static_cast<std::size_t>(k)] += k * x0.tilt();
  v.front() = 0.0;
  v.back() = x0[n];
  return v;
}

std::vector<double> heat_mean_solution(const Interface& x0, double t) {
  return heat_mean_solution(SpectralProfile(x0.size()), x0, t);
}

double area_between(const Interface& x, const Interface& y) {
  if (x.size() != y.size())
    fail(ErrorCode::kInvalidArgument, fmt::format("area between interfaces with N={} and N={}", x.size(), y.size()));
  double a = 0.0;
  for (int k = 1; k < x.size(); ++k) a += x[k] - y[k];
  return a;
}

double sup_height(const Interface& x) {
  double m = 0.0;
  for (int k = 1; k < x.size(); ++k) m = std::max(m, std::abs(x[k]));
  return m;
}

double sup_gradient(const Interface& x) {
  double m = 0.0;
  for (int k = 1; k <= x.size(); ++k) m = std::max(m, std::abs(x[k] - x[k - 1]));
  return m;
}

}  // namespace gradphi
