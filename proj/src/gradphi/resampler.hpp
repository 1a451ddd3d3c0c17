#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "gradphi/potential.hpp"

namespace gradphi {

// Grid representation of rho_{b,c}, stored as the translate of the symmetric
// theta_a, a = (c-b)/2, centred at (b+c)/2.
class TabulatedDensity {
 public:
  static constexpr int kBaseCellsPerSide = 32;

  static TabulatedDensity build(const Potential& pot, double b, double c, double tail_tol = kDefaultTailTol);

  double center() const noexcept { return center_; }
  double half_gap() const noexcept { return half_gap_; }
  double norm() const noexcept { return norm_; }
  double window() const noexcept { return window_; }
  int cells_per_side() const noexcept { return static_cast<int>(nodes_.size()) - 1; }
  const Potential& potential() const noexcept { return pot_; }

  // Absolute abscissae across the full window and the matching -W_a and CDF values.
  std::vector<double> grid() const;
  std::vector<double> log_density() const;
  std::vector<double> cdf() const;

  double pdf(double x) const noexcept;
  double cdf_at(double x) const;
  double quantile(double p) const;
  double sample(double u) const { return quantile(u); }

 private:
  TabulatedDensity() = default;
  double unnormalised(double u) const noexcept { return std::exp(-pot_.resampling(half_gap_, u)); }
  // u >= 0 with tail(u) = q, tail = mass of theta_a beyond u.
  double solve_tail(double q) const;

  Potential pot_ = Potential::gaussian();
  double center_ = 0.0;
  double half_gap_ = 0.0;
  double norm_ = 1.0;
  double window_ = 0.0;
  std::vector<double> nodes_;  // centred half grid on [0, window]
  std::vector<double> tail_;   // normalised mass beyond each node
};

struct GaussianMoments {
  double mean;
  double sd;
};

// Mean and standard deviation of rho_{b,c} for V(u) = u^2/2.
GaussianMoments gaussian_oracle(const Potential& pot, double b, double c);

// ν1, ν2, ν3 of the maximal coupling of two densities: normalised
// (dA - dB)_+, dA ∧ dB and (dB - dA)_+, each sampled by inverse CDF.
class OverlapDecomposition {
 public:
  double p() const noexcept { return p_; }
  double first_mass() const noexcept { return totals_[0]; }
  double third_mass() const noexcept { return totals_[2]; }
  bool first_degenerate() const noexcept { return p_ >= 1.0 - 1e-12; }
  bool common_degenerate() const noexcept { return p_ <= 1e-12; }

  double sample_first(double u) const { return sample_part(0, u); }
  double sample_common(double u) const { return sample_part(1, u); }
  double sample_third(double u) const { return sample_part(2, u); }

  // Unnormalised part densities (dA-dB)_+, dA∧dB, (dB-dA)_+ at x.
  std::array<double, 3> parts_at(double x) const;
  std::span<const double> nodes() const noexcept { return nodes_; }

 private:
  friend OverlapDecomposition overlap_decompose(const TabulatedDensity&, const TabulatedDensity&);
  double part_density(int part, double x) const;
  double sample_part(int part, double u) const;

  const TabulatedDensity* a_ = nullptr;
  const TabulatedDensity* b_ = nullptr;
  std::vector<double> nodes_;
  std::vector<std::array<double, 3>> cum_;  // cumulative part masses at nodes
  std::array<double, 3> totals_{};
  double p_ = 0.0;
};

// The returned object refers to `a` and `b`; they must outlive it.
OverlapDecomposition overlap_decompose(const TabulatedDensity& a, const TabulatedDensity& b);

// Closed-form overlap of two equal-variance normals: 2 Φ(-|μ1-μ2| / (2σ)).
double normal_overlap(double mean1, double mean2, double sd);

struct StickyDraw {
  double x;
  double y;
  bool coupled;
  double p;
};

struct SamplerOptions {
  double tail_tol = kDefaultTailTol;
  bool force_tabulated = false;
};

// Per-update conditional sampling used by every dynamics. Gaussian and SOS
// potentials use closed forms unless force_tabulated is set.
class ConditionalSampler {
 public:
  enum class Path { kGaussian, kSos, kTabulated };

  explicit ConditionalSampler(Potential pot, SamplerOptions options = {});

  const Potential& potential() const noexcept { return pot_; }
  Path path() const noexcept { return path_; }

  // F^{-1}_{b,c}(p).
  double quantile(double b, double c, double p) const;
  // Overlap ∫ rho_{bx,cx} ∧ rho_{by,cy}.
  double overlap(double bx, double cx, double by, double cy) const;
  // One maximal-coupling update: couple iff u[0] < p; ν1 from u[1], ν2 from
  // u[2], ν3 from u[3].
  StickyDraw sticky(double bx, double cx, double by, double cy, const std::array<double, 4>& u) const;

 private:
  Potential pot_;
  SamplerOptions options_;
  Path path_;
};

}  // namespace gradphi
