#pragma once

#include <array>
#include <cmath>
#include <span>

namespace gradphi::quad {

namespace detail {

template <class F>
double simpson_step(const F& f, double a, double fa, double b, double fb, double m, double fm, double whole,
                    double eps, int depth) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * eps) return left + right + delta / 15.0;
  return simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * eps, depth - 1) +
         simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * eps, depth - 1);
}

}  // namespace detail

// Adaptive Simpson with Richardson correction on [a,b].
template <class F>
double adaptive_simpson(const F& f, double a, double b, double eps, int max_depth = 48) {
  if (b <= a) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::simpson_step(f, a, fa, b, fb, m, fm, whole, eps, max_depth);
}

// Adaptive Simpson over [a,b] split at the sorted breakpoints lying inside it.
template <class F>
double adaptive_simpson(const F& f, double a, double b, std::span<const double> breaks, double eps) {
  double total = 0.0;
  double lo = a;
  int pieces = 1;
  for (double x : breaks)
    if (x > a && x < b) ++pieces;
  for (double x : breaks) {
    if (x <= lo || x >= b) continue;
    total += adaptive_simpson(f, lo, x, eps / pieces);
    lo = x;
  }
  return total + adaptive_simpson(f, lo, b, eps / pieces);
}

// 7-point Kronrod extension of 3-point Gauss-Legendre.
struct GaussKronrod7 {
  static constexpr std::array<double, 4> kNodes = {0.9604912687080202834235070925, 0.7745966692414833770358530799,
                                                   0.4342437493468025580020715029, 0.0};
  static constexpr std::array<double, 4> kKronrod = {0.1046562260264672651938238563, 0.2684880898683334407285692803,
                                                     0.4013974147759622229050518186, 0.4509165386584741423451382658};
  static constexpr std::array<double, 2> kGauss = {0.5555555555555555555555555556, 0.8888888888888888888888888889};

  struct Result {
    double kronrod;
    double gauss;
  };

  template <class F>
  static Result integrate(const F& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const double f0p = f(mid + half * kNodes[0]), f0m = f(mid - half * kNodes[0]);
    const double f1p = f(mid + half * kNodes[1]), f1m = f(mid - half * kNodes[1]);
    const double f2p = f(mid + half * kNodes[2]), f2m = f(mid - half * kNodes[2]);
    const double fc = f(mid);
    const double k = kKronrod[0] * (f0p + f0m) + kKronrod[1] * (f1p + f1m) + kKronrod[2] * (f2p + f2m) + kKronrod[3] * fc;
    const double g = kGauss[0] * (f1p + f1m) + kGauss[1] * fc;
    return {half * k, half * g};
  }

  template <class F>
  static double kronrod_only(const F& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = kKronrod[3] * f(mid);
    for (int i = 0; i < 3; ++i) s += kKronrod[i] * (f(mid + half * kNodes[i]) + f(mid - half * kNodes[i]));
    return half * s;
  }
};

}  // namespace gradphi::quad
