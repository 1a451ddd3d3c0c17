#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "gradphi/error.hpp"
#include "gradphi/quadrature.hpp"
#include "gradphi/resampler.hpp"

namespace gradphi {

namespace {

double difference(const TabulatedDensity& a, const TabulatedDensity& b, double x) { return a.pdf(x) - b.pdf(x); }

}  // namespace

OverlapDecomposition overlap_decompose(const TabulatedDensity& a, const TabulatedDensity& b) {
  OverlapDecomposition out;
  out.a_ = &a;
  out.b_ = &b;

  std::vector<double> nodes = a.grid();
  const std::vector<double> gb = b.grid();
  nodes.insert(nodes.end(), gb.begin(), gb.end());
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  // Split cells where dA - dB changes sign so every cell has a definite order.
  std::vector<double> split;
  split.reserve(nodes.size() + 8);
  split.push_back(nodes.front());
  double d_prev = difference(a, b, nodes.front());
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double d_next = difference(a, b, nodes[i]);
    if ((d_prev > 0.0 && d_next < 0.0) || (d_prev < 0.0 && d_next > 0.0)) {
      double lo = nodes[i - 1], hi = nodes[i];
      const bool rising = d_next > 0.0;
      for (int it = 0; it < 80 && hi - lo > 1e-15 * (1.0 + std::abs(hi)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((difference(a, b, mid) > 0.0) == rising)
          hi = mid;
        else
          lo = mid;
      }
      const double root = 0.5 * (lo + hi);
      if (root > split.back() && root < nodes[i]) split.push_back(root);
    }
    split.push_back(nodes[i]);
    d_prev = d_next;
  }
  out.nodes_ = std::move(split);

  const auto fa = [&a](double x) { return a.pdf(x); };
  const auto fb = [&b](double x) { return b.pdf(x); };
  out.cum_.assign(out.nodes_.size(), {0.0, 0.0, 0.0});
  std::array<double, 3> acc{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i + 1 < out.nodes_.size(); ++i) {
    const double lo = out.nodes_[i], hi = out.nodes_[i + 1];
    const double ia = quad::GaussKronrod7::kronrod_only(fa, lo, hi);
    const double ib = quad::GaussKronrod7::kronrod_only(fb, lo, hi);
    const double dmid = difference(a, b, 0.5 * (lo + hi));
    if (dmid > 0.0) {
      acc[0] += std::max(ia - ib, 0.0);
      acc[1] += ib;
    } else if (dmid < 0.0) {
      acc[1] += ia;
      acc[2] += std::max(ib - ia, 0.0);
    } else {
      acc[1] += std::min(ia, ib);
    }
    out.cum_[i + 1] = acc;
  }
  out.totals_ = acc;
  out.p_ = std::clamp(acc[1], 0.0, 1.0);
  return out;
}

std::array<double, 3> OverlapDecomposition::parts_at(double x) const {
  const double pa = a_->pdf(x), pb = b_->pdf(x);
  return {std::max(pa - pb, 0.0), std::min(pa, pb), std::max(pb - pa, 0.0)};
}

double OverlapDecomposition::part_density(int part, double x) const { return parts_at(x)[static_cast<std::size_t>(part)]; }

double OverlapDecomposition::sample_part(int part, double u) const {
  if (!(u > 0.0 && u < 1.0)) fail(ErrorCode::kInvalidArgument, fmt::format("uniform {} outside (0,1)", u));
  const std::size_t k = static_cast<std::size_t>(part);
  if ((part == 1 && common_degenerate()) || (part != 1 && first_degenerate())) return 0.0;
  const double total = totals_[k];
  if (!(total > 0.0)) return 0.0;
  const double target = u * total;
  // First node whose cumulative mass reaches the target.
  std::size_t lo_idx = 0, hi_idx = nodes_.size() - 1;
  while (hi_idx - lo_idx > 1) {
    const std::size_t mid = (lo_idx + hi_idx) / 2;
    if (cum_[mid][k] < target)
      lo_idx = mid;
    else
      hi_idx = mid;
  }
  const double x0 = nodes_[lo_idx], x1 = nodes_[hi_idx];
  const double need = target - cum_[lo_idx][k];
  const auto f = [this, part](double x) { return part_density(part, x); };
  const double cell = cum_[hi_idx][k] - cum_[lo_idx][k];
  double lo = x0, hi = x1;
  double x = cell > 0.0 ? x0 + (x1 - x0) * std::clamp(need / cell, 0.0, 1.0) : 0.5 * (x0 + x1);
  for (int it = 0; it < 60; ++it) {
    const double r = quad::GaussKronrod7::kronrod_only(f, x0, x) - need;
    if (r > 0.0)
      hi = x;
    else
      lo = x;
    if (std::abs(r) <= 1e-16 || hi - lo <= 1e-15 * (1.0 + std::abs(hi))) break;
    const double slope = f(x);
    double next = slope > 0.0 ? x - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

}  // namespace gradphi
