#include "gradphi/interface.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gradphi/error.hpp"

namespace gradphi {

Interface::Interface(std::vector<double> heights, double tilt) : heights_(std::move(heights)), tilt_(tilt) {
  const int n = size();
  if (n < 2) fail(ErrorCode::kInvalidArgument, fmt::format("interface needs N >= 2, got {}", n));
  if (heights_.front() != 0.0)
    fail(ErrorCode::kInvalidArgument, fmt::format("interface must satisfy x_0 = 0, got {}", heights_.front()));
  const double end = tilt * n;
  if (std::abs(heights_.back() - end) > 1e-12 * (1.0 + std::abs(end)))
    fail(ErrorCode::kInvalidArgument, fmt::format("interface must satisfy x_N = h N = {}, got {}", end, heights_.back()));
  heights_.back() = end;
  for (double x : heights_)
    if (!std::isfinite(x)) fail(ErrorCode::kInvalidArgument, "interface heights must be finite");
}

Interface Interface::flat(int n, double level, double tilt) {
  if (n < 2) fail(ErrorCode::kInvalidArgument, fmt::format("interface needs N >= 2, got {}", n));
  std::vector<double> h(static_cast<std::size_t>(n) + 1);
  for (int k = 1; k < n; ++k) h[static_cast<std::size_t>(k)] = level + k * tilt;
  h.back() = tilt * n;
  return Interface(std::move(h), tilt);
}

Interface Interface::tent(int n, double peak, double tilt) {
  if (n < 2) fail(ErrorCode::kInvalidArgument, fmt::format("interface needs N >= 2, got {}", n));
  std::vector<double> h(static_cast<std::size_t>(n) + 1);
  for (int k = 1; k < n; ++k) h[static_cast<std::size_t>(k)] = peak * std::min(k, n - k) * (2.0 / n) + k * tilt;
  h.back() = tilt * n;
  return Interface(std::move(h), tilt);
}

Interface Interface::mode(int n, int j, double amplitude, double tilt) {
  if (n < 2) fail(ErrorCode::kInvalidArgument, fmt::format("interface needs N >= 2, got {}", n));
  std::vector<double> h(static_cast<std::size_t>(n) + 1);
  for (int k = 1; k < n; ++k)
    h[static_cast<std::size_t>(k)] = amplitude * std::sin(j * std::numbers::pi * k / n) + k * tilt;
  h.back() = tilt * n;
  return Interface(std::move(h), tilt);
}

std::vector<double> Interface::gauged() const {
  std::vector<double> g(heights_.begin(), heights_.end());
  for (std::size_t k = 0; k < g.size(); ++k) g[k] -= static_cast<double>(k) * tilt_;
  return g;
}

bool height_ordered(const Interface& x, const Interface& y, double tol) {
  if (x.size() != y.size()) return false;
  for (int k = 0; k <= x.size(); ++k)
    if (x[k] > y[k] + tol) return false;
  return true;
}

bool gradient_ordered(const Interface& x, const Interface& y, double tol) {
  if (x.size() != y.size()) return false;
  for (int k = 1; k <= x.size(); ++k)
    if (x[k] - x[k - 1] > y[k] - y[k - 1] + tol) return false;
  return true;
}

}  // namespace gradphi
