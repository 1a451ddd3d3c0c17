#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "gradphi/error.hpp"
#include "gradphi/quadrature.hpp"
#include "gradphi/resampler.hpp"

namespace gradphi {

namespace {

constexpr double kGridStretch = 3.0;
constexpr int kMaxDepth = 48;
constexpr double kSelfConsistency = 1e-11;

std::vector<double> half_nodes(double window, int cells, std::span<const double> kinks) {
  std::vector<double> nodes;
  nodes.reserve(static_cast<std::size_t>(cells) + 1 + kinks.size());
  const double denom = std::sinh(kGridStretch);
  for (int i = 0; i <= cells; ++i)
    nodes.push_back(window * std::sinh(kGridStretch * i / cells) / denom);
  nodes.back() = window;
  for (double k : kinks)
    if (k > 0.0 && k < window) nodes.push_back(k);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end(),
                          [window](double x, double y) { return std::abs(x - y) <= 1e-15 * window; }),
              nodes.end());
  return nodes;
}

}  // namespace

TabulatedDensity TabulatedDensity::build(const Potential& pot, double b, double c, double tail_tol) {
  if (!(tail_tol > 0.0 && tail_tol <= 1e-6))
    fail(ErrorCode::kInvalidArgument, fmt::format("tail_tol must lie in (0, 1e-6], got {}", tail_tol));
  if (!std::isfinite(b) || !std::isfinite(c))
    fail(ErrorCode::kInvalidArgument, fmt::format("non-finite neighbour heights ({}, {})", b, c));
  TabulatedDensity d;
  d.pot_ = pot;
  d.center_ = 0.5 * (b + c);
  d.half_gap_ = 0.5 * (c - b);
  d.window_ = resampling_window(pot, d.half_gap_, tail_tol);

  std::vector<double> kinks;
  for (double k : pot.kinks()) kinks.push_back(std::abs(k - d.half_gap_));

  const auto f = [&d](double u) { return d.unnormalised(u); };
  const auto base = half_nodes(d.window_, kBaseCellsPerSide, kinks);
  std::vector<quad::GaussKronrod7::Result> first(base.size() - 1);
  double estimate = 0.0;
  for (std::size_t i = 0; i + 1 < base.size(); ++i) {
    first[i] = quad::GaussKronrod7::integrate(f, base[i], base[i + 1]);
    estimate += first[i].kronrod;
  }
  // Cells are bisected until |K - G| fits an error budget proportional to width.
  const double budget = kSelfConsistency * estimate / d.window_;
  std::vector<double> cells_mass;
  d.nodes_.assign(1, 0.0);
  auto refine = [&](auto&& self, double lo, double hi, const quad::GaussKronrod7::Result& r, int depth) -> void {
    if (std::abs(r.kronrod - r.gauss) <= budget * (hi - lo) || depth >= kMaxDepth) {
      d.nodes_.push_back(hi);
      cells_mass.push_back(r.kronrod);
      return;
    }
    const double mid = 0.5 * (lo + hi);
    self(self, lo, mid, quad::GaussKronrod7::integrate(f, lo, mid), depth + 1);
    self(self, mid, hi, quad::GaussKronrod7::integrate(f, mid, hi), depth + 1);
  };
  for (std::size_t i = 0; i + 1 < base.size(); ++i) refine(refine, base[i], base[i + 1], first[i], 0);
  double half = 0.0;
  for (double m : cells_mass) half += m;
  d.norm_ = 2.0 * half;
  if (!(d.norm_ > 0.0) || !std::isfinite(d.norm_))
    fail(ErrorCode::kQuadratureFailure, fmt::format("degenerate normalisation {} for a={}", d.norm_, d.half_gap_));
  d.tail_.assign(d.nodes_.size(), 0.0);
  double acc = 0.0;
  for (std::size_t i = cells_mass.size(); i-- > 0;) {
    acc += cells_mass[i];
    d.tail_[i] = acc / d.norm_;
  }
  d.tail_[0] = 0.5;
  return d;
}

std::vector<double> TabulatedDensity::grid() const {
  std::vector<double> g;
  g.reserve(2 * nodes_.size() - 1);
  for (std::size_t i = nodes_.size(); i-- > 1;) g.push_back(center_ - nodes_[i]);
  for (double u : nodes_) g.push_back(center_ + u);
  return g;
}

std::vector<double> TabulatedDensity::log_density() const {
  std::vector<double> g;
  g.reserve(2 * nodes_.size() - 1);
  for (std::size_t i = nodes_.size(); i-- > 1;) g.push_back(-pot_.resampling(half_gap_, nodes_[i]));
  for (double u : nodes_) g.push_back(-pot_.resampling(half_gap_, u));
  return g;
}

std::vector<double> TabulatedDensity::cdf() const {
  std::vector<double> g;
  g.reserve(2 * nodes_.size() - 1);
  for (std::size_t i = nodes_.size(); i-- > 1;) g.push_back(tail_[i]);
  for (double t : tail_) g.push_back(1.0 - t);
  return g;
}

double TabulatedDensity::pdf(double x) const noexcept {
  const double u = x - center_;
  if (std::abs(u) > window_) return 0.0;
  return unnormalised(u) / norm_;
}

double TabulatedDensity::cdf_at(double x) const {
  const double u = std::abs(x - center_);
  double tail = 0.0;
  if (u < window_) {
    const auto it = std::upper_bound(nodes_.begin(), nodes_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    const auto f = [this](double s) { return unnormalised(s); };
    tail = tail_[i] - quad::GaussKronrod7::kronrod_only(f, nodes_[i], u) / norm_;
    tail = std::max(tail, 0.0);
  }
  return x < center_ ? tail : 1.0 - tail;
}

double TabulatedDensity::solve_tail(double q) const {
  // tail_ decreases from 0.5 at node 0 to 0 at the window edge.
  const auto it = std::lower_bound(tail_.begin(), tail_.end(), q, [](double t, double v) { return t > v; });
  std::size_t j = static_cast<std::size_t>(it - tail_.begin());
  if (j == 0) return 0.0;
  if (j >= tail_.size()) j = tail_.size() - 1;
  const std::size_t i = j - 1;  // tail_[i] > q >= tail_[i+1]
  const double lo0 = nodes_[i], hi0 = nodes_[i + 1];
  const double excess = tail_[i] - q;  // mass to cover inside the cell
  const auto f = [this](double s) { return unnormalised(s); };
  const auto residual = [&](double u) { return quad::GaussKronrod7::kronrod_only(f, lo0, u) / norm_ - excess; };
  double lo = lo0, hi = hi0;
  const double cell_mass = tail_[i] - tail_[i + 1];
  double u = cell_mass > 0.0 ? lo0 + (hi0 - lo0) * (excess / cell_mass) : 0.5 * (lo0 + hi0);
  for (int it_count = 0; it_count < 60; ++it_count) {
    const double r = residual(u);
    if (r > 0.0)
      hi = u;
    else
      lo = u;
    if (std::abs(r) <= 1e-16 || hi - lo <= 1e-15 * (1.0 + hi)) break;
    const double slope = unnormalised(u) / norm_;
    double next = slope > 0.0 ? u - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    u = next;
  }
  return u;
}

double TabulatedDensity::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::kInvalidArgument, fmt::format("quantile level {} outside (0,1)", p));
  if (p == 0.5) return center_;
  if (p < 0.5) return center_ - solve_tail(p);
  return center_ + solve_tail(1.0 - p);
}

GaussianMoments gaussian_oracle(const Potential& pot, double b, double c) {
  if (pot.closed_form() != ClosedForm::kGaussian)
    fail(ErrorCode::kInvalidArgument, fmt::format("gaussian_oracle called for potential '{}'", pot.name()));
  return {0.5 * (b + c), std::sqrt(0.5)};
}

}  // namespace gradphi
