#pragma once

#include <vector>

#include "gradphi/interface.hpp"

namespace gradphi {

// lambda^(j) = 1 - cos(j pi / N), j = 0..N-1, with the sine basis
// phi^(j)_k = sqrt(2/N) sin(j k pi / N), k = 0..N.
class SpectralProfile {
 public:
  explicit SpectralProfile(int n);
  int size() const noexcept { return n_; }
  double eigenvalue(int j) const { return eigen_.at(static_cast<std::size_t>(j)); }
  double basis(int j, int k) const {
    return basis_.at(static_cast<std::size_t>(j) * static_cast<std::size_t>(n_ + 1) + static_cast<std::size_t>(k));
  }
  // Coefficients <v, phi^(j)> for j = 1..N-1 (index 0 unused, set to 0).
  std::vector<double> project(const std::vector<double>& v) const;

 private:
  int n_;
  std::vector<double> eigen_;
  std::vector<double> basis_;
};

double spectral_gap(int n);

// sum_{k=1}^{N-1} sin(j pi k / N) x_k, on the raw heights.
double fourier_stat(const Interface& x, int j = 1);
double fourier_stat(const std::vector<double>& heights, int j = 1);

// Exact solution of d/dt v = (1/2) Laplacian v with the pinned boundary
// values of x0, returned as heights 0..N.
std::vector<double> heat_mean_solution(const Interface& x0, double t);
std::vector<double> heat_mean_solution(const SpectralProfile& profile, const Interface& x0, double t);

// sum_k (x_k - y_k)
double area_between(const Interface& x, const Interface& y);
// max over interior sites of |x_k|
double sup_height(const Interface& x);
// max over k = 1..N of |x_k - x_{k-1}|
double sup_gradient(const Interface& x);

}  // namespace gradphi
