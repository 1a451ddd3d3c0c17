#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "gradphi/error.hpp"
#include "gradphi/resampler.hpp"
#include "gradphi/special.hpp"

namespace gradphi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const double kGaussSd = std::sqrt(0.5);

void check_level(double p) {
  if (!(p > 0.0 && p < 1.0)) fail(ErrorCode::kInvalidArgument, fmt::format("quantile level {} outside (0,1)", p));
}

// Solves F(x) = target for an increasing F on [lo, hi] with derivative dF,
// Newton steps safeguarded by bisection.
template <class F, class D>
double invert_monotone(const F& cdf, const D& density, double target, double lo, double hi, double x) {
  for (int it = 0; it < 100; ++it) {
    const double r = cdf(x) - target;
    if (r > 0.0)
      hi = x;
    else
      lo = x;
    if (r == 0.0 || hi - lo <= 1e-15 * (1.0 + std::abs(lo) + std::abs(hi))) break;
    const double slope = density(x);
    double next = slope > 0.0 ? x - r / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

// ---- gaussian: rho_{b,c} = Normal((b+c)/2, 1/2) ----------------------------

double gaussian_quantile(double b, double c, double p) { return 0.5 * (b + c) + kGaussSd * normal_quantile(p); }

// Mass of Normal(lo) - Normal(hi) (both sd σ) on (-inf, x], x <= midpoint.
double lower_part_cdf(double lo, double hi, double x) {
  return normal_cdf((x - lo) / kGaussSd) - normal_cdf((x - hi) / kGaussSd);
}

// Inverse CDF of the normalised positive part of N(lo) - N(hi) (lo < hi).
double lower_part_quantile(double lo, double hi, double q, double excess_mass) {
  const double mid = 0.5 * (lo + hi);
  const double target = q * excess_mass;
  const double left = lo + kGaussSd * normal_quantile(std::max(target, 1e-300));
  const auto cdf = [&](double x) { return lower_part_cdf(lo, hi, x); };
  const auto dens = [&](double x) {
    return (normal_pdf((x - lo) / kGaussSd) - normal_pdf((x - hi) / kGaussSd)) / kGaussSd;
  };
  return invert_monotone(cdf, dens, target, std::min(left, mid), mid, std::min(left, mid));
}

StickyDraw gaussian_sticky(double mx, double my, const std::array<double, 4>& u) {
  if (mx == my) {
    const double v = mx + kGaussSd * normal_quantile(u[2]);
    return {v, v, true, 1.0};
  }
  const double lo = std::min(mx, my), hi = std::max(mx, my);
  const double mid = 0.5 * (lo + hi);
  const double d = (hi - lo) / (2.0 * kGaussSd);
  const double half_p = normal_cdf(-d);
  const double p = 2.0 * half_p;
  if (u[0] < p) {
    // dA ∧ dB is symmetric about the midpoint; its left half is N(hi)'s left tail.
    const double v = u[2] * p;
    const double w = u[2] <= 0.5 ? hi + kGaussSd * normal_quantile(v)
                                 : lo - kGaussSd * normal_quantile((1.0 - u[2]) * p);
    return {w, w, true, p};
  }
  const double excess = 1.0 - p;
  const auto low_draw = [&](double q) { return lower_part_quantile(lo, hi, q, excess); };
  // The high part is the mirror image of the low part about the midpoint.
  const auto high_draw = [&](double q) { return 2.0 * mid - lower_part_quantile(lo, hi, 1.0 - q, excess); };
  if (mx < my) return {low_draw(u[1]), high_draw(u[3]), false, p};
  return {high_draw(u[1]), low_draw(u[3]), false, p};
}

// ---- sos: plateau on [min(b,c), max(b,c)] with rate-2 exponential tails ----

double sos_quantile(double b, double c, double p) {
  const double center = 0.5 * (b + c);
  const double a = 0.5 * std::abs(c - b);
  const double z = 2.0 * a + 1.0;
  const double q = std::min(p, 1.0 - p);
  const double tail0 = 0.5 / z;  // mass beyond one end of the plateau
  double dist;
  if (q <= tail0)
    dist = a - 0.5 * std::log(2.0 * z * q);
  else
    dist = a - (q - tail0) * z;
  if (p == 0.5) return center;
  return p < 0.5 ? center - dist : center + dist;
}

// f(x) = value * exp(slope * (x - ref)) on [lo, hi].
struct ExpPiece {
  double lo, hi, ref, value, slope;
};

double exp_mass(double value, double slope, double ref, double lo, double hi) {
  if (hi <= lo) return 0.0;
  if (slope == 0.0) return value * (hi - lo);
  if (lo == -kInf) return value * std::exp(slope * (hi - ref)) / slope;
  if (hi == kInf) return -value * std::exp(slope * (lo - ref)) / slope;
  return value * std::exp(slope * (lo - ref)) * std::expm1(slope * (hi - lo)) / slope;
}

// Inverse of x -> exp_mass(value, slope, ref, lo, x).
double exp_inverse(double value, double slope, double ref, double lo, double hi, double target) {
  double x;
  if (slope == 0.0)
    x = lo + target / value;
  else if (lo == -kInf)
    x = ref + std::log(target * slope / value) / slope;
  else
    x = lo + std::log1p(target * slope / (value * std::exp(slope * (lo - ref)))) / slope;
  return std::clamp(x, lo, hi);
}

struct SosDensity {
  double left, right, height;

  explicit SosDensity(double b, double c)
      : left(std::min(b, c)), right(std::max(b, c)), height(1.0 / (std::max(b, c) - std::min(b, c) + 1.0)) {}

  // The exponential piece governing the open interval (lo, hi).
  ExpPiece piece_on(double lo, double hi, double ref) const {
    const double probe = lo == -kInf ? hi - 1.0 : (hi == kInf ? lo + 1.0 : 0.5 * (lo + hi));
    double slope = 0.0;
    if (probe < left) slope = 2.0;
    if (probe > right) slope = -2.0;
    return {lo, hi, ref, eval(ref), slope};
  }

  double eval(double x) const {
    if (x < left) return height * std::exp(2.0 * (x - left));
    if (x > right) return height * std::exp(-2.0 * (x - right));
    return height;
  }
};

struct SosSegment {
  ExpPiece a, b;
  int sign;  // +1 where A > B, -1 where A < B
  std::array<double, 3> mass;
};

std::vector<SosSegment> sos_segments(const SosDensity& da, const SosDensity& db) {
  std::vector<double> breaks = {da.left, da.right, db.left, db.right};
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  std::vector<double> bounds = {-kInf};
  bounds.insert(bounds.end(), breaks.begin(), breaks.end());
  bounds.push_back(kInf);

  std::vector<SosSegment> segs;
  const auto push = [&](double lo, double hi) {
    const double ref = lo == -kInf ? hi : lo;
    SosSegment s{da.piece_on(lo, hi, ref), db.piece_on(lo, hi, ref), 0, {0.0, 0.0, 0.0}};
    const double probe = lo == -kInf ? hi - 1.0 : (hi == kInf ? lo + 1.0 : 0.5 * (lo + hi));
    const double fa = s.a.value * std::exp(s.a.slope * (probe - ref));
    const double fb = s.b.value * std::exp(s.b.slope * (probe - ref));
    s.sign = fa > fb ? 1 : (fa < fb ? -1 : 0);
    const double ma = exp_mass(s.a.value, s.a.slope, ref, lo, hi);
    const double mb = exp_mass(s.b.value, s.b.slope, ref, lo, hi);
    if (s.sign > 0)
      s.mass = {ma - mb, mb, 0.0};
    else if (s.sign < 0)
      s.mass = {0.0, ma, mb - ma};
    else
      s.mass = {0.0, ma, 0.0};
    segs.push_back(s);
  };
  for (std::size_t i = 0; i + 1 < bounds.size(); ++i) {
    const double lo = bounds[i], hi = bounds[i + 1];
    const double ref = lo == -kInf ? hi : lo;
    const ExpPiece pa = da.piece_on(lo, hi, ref), pb = db.piece_on(lo, hi, ref);
    double cross = kInf;
    if (pa.slope != pb.slope && pa.value > 0.0 && pb.value > 0.0) {
      cross = ref + std::log(pb.value / pa.value) / (pa.slope - pb.slope);
    }
    if (cross > lo && cross < hi) {
      push(lo, cross);
      push(cross, hi);
    } else {
      push(lo, hi);
    }
  }
  return segs;
}

double sos_sample_part(const std::vector<SosSegment>& segs, int part, double u) {
  const std::size_t k = static_cast<std::size_t>(part);
  double total = 0.0;
  for (const auto& s : segs) total += s.mass[k];
  double target = u * total;
  const SosSegment* chosen = nullptr;
  for (const auto& s : segs) {
    if (s.mass[k] <= 0.0) continue;
    chosen = &s;
    if (target <= s.mass[k]) break;
    target -= s.mass[k];
  }
  if (chosen == nullptr) return 0.0;
  const SosSegment& s = *chosen;
  target = std::min(target, s.mass[k]);
  const double lo = s.a.lo, hi = s.a.hi, ref = s.a.ref;
  // Single-exponential cases: the common part, or tails where both slopes agree.
  if (part == 1) {
    const ExpPiece& pc = s.sign > 0 ? s.b : s.a;
    return exp_inverse(pc.value, pc.slope, ref, lo, hi, target);
  }
  const ExpPiece& big = part == 0 ? s.a : s.b;
  const ExpPiece& small = part == 0 ? s.b : s.a;
  if (big.slope == small.slope) return exp_inverse(big.value - small.value, big.slope, ref, lo, hi, target);
  const auto cdf = [&](double x) {
    return exp_mass(big.value, big.slope, ref, lo, x) - exp_mass(small.value, small.slope, ref, lo, x);
  };
  const auto dens = [&](double x) {
    return big.value * std::exp(big.slope * (x - ref)) - small.value * std::exp(small.slope * (x - ref));
  };
  return invert_monotone(cdf, dens, target, lo, hi, 0.5 * (lo + hi));
}

StickyDraw sos_sticky(double bx, double cx, double by, double cy, const std::array<double, 4>& u) {
  const SosDensity dx(bx, cx), dy(by, cy);
  if (dx.left == dy.left && dx.right == dy.right) {
    const double v = sos_quantile(bx, cx, u[2]);
    return {v, v, true, 1.0};
  }
  const auto segs = sos_segments(dx, dy);
  double p = 0.0;
  for (const auto& s : segs) p += s.mass[1];
  p = std::clamp(p, 0.0, 1.0);
  if (u[0] < p) {
    const double v = sos_sample_part(segs, 1, u[2]);
    return {v, v, true, p};
  }
  return {sos_sample_part(segs, 0, u[1]), sos_sample_part(segs, 2, u[3]), false, p};
}

double sos_overlap(double bx, double cx, double by, double cy) {
  const SosDensity dx(bx, cx), dy(by, cy);
  if (dx.left == dy.left && dx.right == dy.right) return 1.0;
  double p = 0.0;
  for (const auto& s : sos_segments(dx, dy)) p += s.mass[1];
  return std::clamp(p, 0.0, 1.0);
}

}  // namespace

double normal_overlap(double mean1, double mean2, double sd) {
  return std::erfc(std::abs(mean1 - mean2) / (2.0 * sd) / std::numbers::sqrt2);
}

ConditionalSampler::ConditionalSampler(Potential pot, SamplerOptions options)
    : pot_(std::move(pot)), options_(options), path_(Path::kTabulated) {
  if (!options_.force_tabulated) {
    if (pot_.closed_form() == ClosedForm::kGaussian) path_ = Path::kGaussian;
    if (pot_.closed_form() == ClosedForm::kSos) path_ = Path::kSos;
  }
}

double ConditionalSampler::quantile(double b, double c, double p) const {
  switch (path_) {
    case Path::kGaussian:
      check_level(p);
      return gaussian_quantile(b, c, p);
    case Path::kSos:
      check_level(p);
      return sos_quantile(b, c, p);
    case Path::kTabulated:
      break;
  }
  return TabulatedDensity::build(pot_, b, c, options_.tail_tol).quantile(p);
}

double ConditionalSampler::overlap(double bx, double cx, double by, double cy) const {
  if (bx == by && cx == cy) return 1.0;
  switch (path_) {
    case Path::kGaussian:
      return normal_overlap(0.5 * (bx + cx), 0.5 * (by + cy), kGaussSd);
    case Path::kSos:
      return sos_overlap(bx, cx, by, cy);
    case Path::kTabulated:
      break;
  }
  const auto da = TabulatedDensity::build(pot_, bx, cx, options_.tail_tol);
  const auto db = TabulatedDensity::build(pot_, by, cy, options_.tail_tol);
  return overlap_decompose(da, db).p();
}

StickyDraw ConditionalSampler::sticky(double bx, double cx, double by, double cy, const std::array<double, 4>& u) const {
  switch (path_) {
    case Path::kGaussian:
      return gaussian_sticky(0.5 * (bx + cx), 0.5 * (by + cy), u);
    case Path::kSos:
      return sos_sticky(bx, cx, by, cy, u);
    case Path::kTabulated:
      break;
  }
  if (bx == by && cx == cy) {
    const double v = quantile(bx, cx, u[2]);
    return {v, v, true, 1.0};
  }
  const auto da = TabulatedDensity::build(pot_, bx, cx, options_.tail_tol);
  const auto db = TabulatedDensity::build(pot_, by, cy, options_.tail_tol);
  const auto ov = overlap_decompose(da, db);
  if (u[0] < ov.p()) {
    const double v = ov.sample_common(u[2]);
    return {v, v, true, ov.p()};
  }
  return {ov.sample_first(u[1]), ov.sample_third(u[3]), false, ov.p()};
}

}  // namespace gradphi
