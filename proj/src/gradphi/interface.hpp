#pragma once

#include <span>
#include <vector>

namespace gradphi {

// Heights x_0..x_N pinned at x_0 = 0 and x_N = tilt * N.
class Interface {
 public:
  Interface() = default;
  // Validates the pinning; throws kInvalidArgument otherwise.
  Interface(std::vector<double> heights, double tilt);

  // Interior sites at level + k*tilt.
  static Interface flat(int n, double level, double tilt = 0.0);
  // Tent k ∧ (N-k) rescaled to the given peak, on top of the linear profile.
  static Interface tent(int n, double peak, double tilt = 0.0);
  // x_k = amplitude * sin(j pi k / N) on top of the linear profile.
  static Interface mode(int n, int j, double amplitude, double tilt = 0.0);

  int size() const noexcept { return static_cast<int>(heights_.size()) - 1; }
  double tilt() const noexcept { return tilt_; }
  double operator[](int k) const noexcept { return heights_[static_cast<std::size_t>(k)]; }
  double& at_interior(int k) noexcept { return heights_[static_cast<std::size_t>(k)]; }
  std::span<const double> heights() const noexcept { return heights_; }
  // x_k - k*tilt: the zero-boundary gauge.
  std::vector<double> gauged() const;

  friend bool operator==(const Interface&, const Interface&) = default;

 private:
  std::vector<double> heights_;
  double tilt_ = 0.0;
};

// x ≤ y coordinatewise (within tol).
bool height_ordered(const Interface& x, const Interface& y, double tol = 0.0);
// Increments of x dominated by increments of y (within tol).
bool gradient_ordered(const Interface& x, const Interface& y, double tol = 0.0);

}  // namespace gradphi
