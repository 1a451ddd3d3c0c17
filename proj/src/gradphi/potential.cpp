#include "gradphi/potential.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gradphi/error.hpp"
#include "gradphi/quadrature.hpp"

namespace gradphi {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    fail(ErrorCode::kInvalidArgument, fmt::format("cannot parse {} from '{}'", what, text));
  }
  if (used != text.size()) fail(ErrorCode::kInvalidArgument, fmt::format("trailing characters in {} '{}'", what, text));
  return v;
}

}  // namespace

Potential Potential::gaussian() {
  Potential p;
  p.kind_ = ClosedForm::kGaussian;
  p.name_ = "gaussian";
  p.exponent_ = 2.0;
  p.growth_hint_ = 2;
  p.slope_minus_ = -kInf;
  p.slope_plus_ = kInf;
  return p;
}

Potential Potential::sos() {
  Potential p;
  p.kind_ = ClosedForm::kSos;
  p.name_ = "sos";
  p.exponent_ = 1.0;
  p.growth_hint_ = 1;
  p.kinks_ = {0.0};
  p.slope_minus_ = -1.0;
  p.slope_plus_ = 1.0;
  return p;
}

Potential Potential::power(double exponent) {
  if (!(exponent >= 1.0) || !std::isfinite(exponent))
    fail(ErrorCode::kInvalidArgument, fmt::format("power potential needs p >= 1, got {}", exponent));
  Potential p;
  p.kind_ = ClosedForm::kPower;
  p.name_ = fmt::format("power:{}", exponent);
  p.exponent_ = exponent;
  p.growth_hint_ = static_cast<int>(std::ceil(exponent));
  p.kinks_ = {0.0};
  p.slope_minus_ = exponent == 1.0 ? -1.0 : -kInf;
  p.slope_plus_ = exponent == 1.0 ? 1.0 : kInf;
  return p;
}

Potential Potential::table(std::vector<double> u, std::vector<double> v, std::string name) {
  if (u.size() != v.size() || u.size() < 2)
    fail(ErrorCode::kInvalidArgument, "table potential needs at least two (u, V(u)) pairs");
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i]) || !std::isfinite(v[i]))
      fail(ErrorCode::kInvalidArgument, "table potential contains non-finite values");
    if (i > 0 && !(u[i] > u[i - 1]))
      fail(ErrorCode::kInvalidArgument, fmt::format("table abscissae must increase strictly (row {})", i + 1));
  }
  Potential p;
  p.kind_ = ClosedForm::kNone;
  p.name_ = std::move(name);
  p.growth_hint_ = 1;
  p.exponent_ = 1.0;
  p.kinks_ = u;
  const std::size_t n = u.size();
  p.slope_minus_ = (v[1] - v[0]) / (u[1] - u[0]);
  p.slope_plus_ = (v[n - 1] - v[n - 2]) / (u[n - 1] - u[n - 2]);
  p.table_ = std::make_shared<const Table>(Table{std::move(u), std::move(v)});
  return p;
}

double Potential::eval_power(double r) const noexcept {
  if (exponent_ == 1.0) return r;
  if (exponent_ == 2.0) return r * r;
  if (exponent_ == 1.5) return r * std::sqrt(r);
  if (exponent_ == 3.0) return r * r * r;
  if (exponent_ == 4.0) {
    const double r2 = r * r;
    return r2 * r2;
  }
  return std::pow(r, exponent_);
}

double Potential::eval_table(double x) const noexcept {
  const auto& u = table_->u;
  const auto& v = table_->v;
  if (x <= u.front()) return v.front() + slope_minus_ * (x - u.front());
  if (x >= u.back()) return v.back() + slope_plus_ * (x - u.back());
  const auto it = std::upper_bound(u.begin(), u.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - u.begin());
  const double w = (x - u[i - 1]) / (u[i] - u[i - 1]);
  return v[i - 1] + w * (v[i] - v[i - 1]);
}

PotentialReport verify_potential(const Potential& pot) {
  PotentialReport report;

  std::vector<double> grid;
  for (int i = 0; i <= 160; ++i) grid.push_back(-20.0 + 0.25 * i);
  for (double r : {50.0, 100.0, 1000.0}) {
    grid.push_back(r);
    grid.push_back(-r);
  }
  const auto knots = pot.kinks();
  for (std::size_t i = 0; i < knots.size(); ++i) {
    grid.push_back(knots[i]);
    grid.push_back(knots[i] - 0.5);
    grid.push_back(knots[i] + 0.5);
    if (i + 1 < knots.size()) grid.push_back(0.5 * (knots[i] + knots[i + 1]));
  }
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  // (i) midpoint convexity over all grid pairs
  report.convexity.name = "convexity";
  std::size_t violations = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double vi = pot(grid[i]);
    for (std::size_t j = i + 1; j < grid.size(); ++j) {
      const double vj = pot(grid[j]);
      const double mid = pot(0.5 * (grid[i] + grid[j]));
      const double tol = 1e-12 * (1.0 + std::abs(vi) + std::abs(vj));
      if (mid > 0.5 * (vi + vj) + tol) {
        if (violations == 0) report.convexity.witness = {grid[i], grid[j]};
        ++violations;
      }
    }
  }
  report.convexity.passed = violations == 0;
  report.convexity.detail =
      violations == 0 ? fmt::format("midpoint inequality holds on {} grid pairs", grid.size() * (grid.size() - 1) / 2)
                      : fmt::format("{} midpoint violations; first at u={}, v={}", violations,
                                    report.convexity.witness[0], report.convexity.witness[1]);

  // (ii) polynomial growth with exponent hint K
  report.polynomial_growth.name = "polynomial_growth";
  const int k = pot.growth_exponent_hint();
  double c_fit = 0.0;
  bool finite = true;
  for (double u : grid) {
    if (std::abs(u) > 100.0) continue;
    const double r = std::abs(pot(u)) / std::pow(1.0 + std::abs(u), k);
    if (!std::isfinite(r)) finite = false;
    c_fit = std::max(c_fit, r);
  }
  report.fitted_growth_constant = c_fit;
  report.polynomial_growth.passed = finite;
  for (double u = 100.0; u <= 1e4 * 1.0001 && report.polynomial_growth.passed; u *= std::pow(10.0, 0.125)) {
    for (double s : {u, -u}) {
      const double r = std::abs(pot(s)) / std::pow(1.0 + std::abs(s), k);
      if (!std::isfinite(r) || r > 2.0 * c_fit + 1e-12) {
        report.polynomial_growth.passed = false;
        report.polynomial_growth.witness = {s};
        break;
      }
    }
  }
  report.polynomial_growth.detail =
      report.polynomial_growth.passed
          ? fmt::format("|V(u)| <= C (1+|u|)^{} with fitted C = {:.6g} up to |u| = 1e4", k, c_fit)
          : fmt::format("growth exceeds (1+|u|)^{} bound (fitted C = {:.6g})", k, c_fit);

  // (iii) non-affine: slope gap between +R and -R
  report.non_affine.name = "non_affine";
  const double r = kNonAffineRadius;
  const double slope_plus = 0.5 * (pot(r + 1.0) - pot(r - 1.0));
  const double slope_minus = 0.5 * (pot(-r + 1.0) - pot(-r - 1.0));
  const double gap = slope_plus - slope_minus;
  report.non_affine.passed = gap > kNonAffineThreshold;
  if (!report.non_affine.passed) report.non_affine.witness = {-r, r};
  report.non_affine.detail = fmt::format("slope(+{0}) - slope(-{0}) = {1:.6g}", r, gap);
  return report;
}

std::string describe(const PotentialReport& report) {
  std::ostringstream out;
  for (const AssumptionCheck* c : {&report.convexity, &report.polynomial_growth, &report.non_affine})
    out << c->name << ": " << (c->passed ? "pass" : "FAIL") << " (" << c->detail << ")\n";
  return out.str();
}

Potential load_table_potential(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kIo, fmt::format("cannot open potential table '{}'", path));
  std::vector<double> u, v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    double a = 0.0, b = 0.0;
    if (!(fields >> a)) continue;
    if (!(fields >> b)) fail(ErrorCode::kInvalidArgument, fmt::format("{}:{}: expected two columns", path, lineno));
    std::string extra;
    if (fields >> extra) fail(ErrorCode::kInvalidArgument, fmt::format("{}:{}: more than two columns", path, lineno));
    u.push_back(a);
    v.push_back(b);
  }
  return Potential::table(std::move(u), std::move(v), "table:" + path);
}

Potential make_potential(std::string_view spec_in) {
  const std::string spec = trim(spec_in);
  Potential pot = Potential::gaussian();
  if (spec == "gaussian") {
    pot = Potential::gaussian();
  } else if (spec == "sos") {
    pot = Potential::sos();
  } else if (spec.rfind("power:", 0) == 0) {
    pot = Potential::power(parse_number(trim(spec.substr(6)), "power exponent"));
  } else if (spec.rfind("power(", 0) == 0 && spec.back() == ')') {
    pot = Potential::power(parse_number(trim(spec.substr(6, spec.size() - 7)), "power exponent"));
  } else if (spec.rfind("table:", 0) == 0) {
    pot = load_table_potential(trim(spec.substr(6)));
  } else {
    fail(ErrorCode::kInvalidArgument,
         fmt::format("unknown potential '{}' (expected gaussian, sos, power:p or table:path)", spec));
  }
  const PotentialReport report = verify_potential(pot);
  if (!report.all_passed())
    fail(ErrorCode::kInvalidPotential, fmt::format("potential '{}' rejected:\n{}", spec, describe(report)));
  return pot;
}

double resampling_window(const Potential& pot, double a, double tail_tol) {
  const auto w = [&](double u) { return pot.resampling(a, u); };
  double start = 1.0;
  for (double k : pot.kinks()) start = std::max(start, 1.0 + std::abs(k - a));
  // Lower bound on the half-integral: the rectangle under exp(-W) on [0, x].
  double half_mass_lower = 0.0;
  const auto tail_ok = [&](double len) {
    const double wl = w(len);
    half_mass_lower = std::max(half_mass_lower, len * std::exp(-w(0.5 * len)) * 0.5);
    const double slope = (wl - w(0.5 * len)) / (0.5 * len);
    if (!(slope > 0.0)) return false;
    // Convexity: the tail beyond len is at most exp(-W(len)) / slope.
    return std::exp(-wl) / slope <= 0.5 * tail_tol * half_mass_lower;
  };
  double len = start;
  while (!tail_ok(len)) {
    len *= 2.0;
    if (len > 1e8)
      fail(ErrorCode::kQuadratureFailure,
           fmt::format("no exponential tail detected for W_a (a={}) within window 1e8; potential is near-affine", a));
  }
  double lo = std::max(start, 0.5 * len);
  double hi = len;
  if (lo < hi && !tail_ok(lo)) {
    for (int it = 0; it < 12; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (tail_ok(mid))
        hi = mid;
      else
        lo = mid;
    }
  }
  return hi;
}

double partition(const Potential& pot, double a, double tail_tol) {
  if (!(tail_tol > 0.0 && tail_tol <= 1e-6))
    fail(ErrorCode::kInvalidArgument, fmt::format("tail_tol must lie in (0, 1e-6], got {}", tail_tol));
  const double len = resampling_window(pot, a, tail_tol);
  std::vector<double> breaks;
  for (double k : pot.kinks()) breaks.push_back(std::abs(k - a));
  std::sort(breaks.begin(), breaks.end());
  const auto f = [&](double u) { return std::exp(-pot.resampling(a, u)); };
  return 2.0 * quad::adaptive_simpson(f, 0.0, len, breaks, 0.1 * tail_tol);
}

namespace {

struct TiltedMoments {
  double mass;
  double mean;
};

TiltedMoments tilted_moments(const Potential& pot, double lambda) {
  const auto g = [&](double u) { return pot(u) - lambda * u; };
  // Bracket the minimiser of the convex function g.
  double lo = -1.0, hi = 1.0;
  for (int it = 0; it < 200 && g(lo - 1e-6 * (1 + std::abs(lo))) < g(lo); ++it) lo = 2.0 * lo - 1.0;
  for (int it = 0; it < 200 && g(hi + 1e-6 * (1 + std::abs(hi))) < g(hi); ++it) hi = 2.0 * hi + 1.0;
  constexpr double kGolden = 0.6180339887498949;
  double x1 = hi - kGolden * (hi - lo), x2 = lo + kGolden * (hi - lo);
  double g1 = g(x1), g2 = g(x2);
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
    if (g1 <= g2) {
      hi = x2;
      x2 = x1;
      g2 = g1;
      x1 = hi - kGolden * (hi - lo);
      g1 = g(x1);
    } else {
      lo = x1;
      x1 = x2;
      g1 = g2;
      x2 = lo + kGolden * (hi - lo);
      g2 = g(x2);
    }
  }
  const double mode = 0.5 * (lo + hi);
  const double gmin = g(mode);
  const auto reach = [&](double dir) {
    double step = 1.0;
    for (int it = 0; it < 80; ++it) {
      const double x = mode + dir * step;
      const double rise = g(x) - gmin;
      const double slope = (rise - (g(mode + 0.5 * dir * step) - gmin)) / (0.5 * step);
      if (slope > 0.0 && rise > 40.0 && std::exp(-rise) / slope < 1e-16) return x;
      step *= 2.0;
    }
    fail(ErrorCode::kQuadratureFailure, fmt::format("tilted density at lambda={} has no detectable tail", lambda));
  };
  const double left = reach(-1.0);
  const double right = reach(1.0);
  std::vector<double> breaks(pot.kinks().begin(), pot.kinks().end());
  breaks.push_back(mode);
  std::sort(breaks.begin(), breaks.end());
  const auto w = [&](double u) { return std::exp(-(g(u) - gmin)); };
  const auto wu = [&](double u) { return (u - mode) * std::exp(-(g(u) - gmin)); };
  const double mass = quad::adaptive_simpson(w, left, right, breaks, 1e-13);
  const double first = quad::adaptive_simpson(wu, left, right, breaks, 1e-13 * (1.0 + right - left));
  return {mass, mode + first / mass};
}

}  // namespace

double tilted_mean(const Potential& pot, double lambda) {
  if (!(lambda > pot.slope_minus() && lambda < pot.slope_plus()))
    fail(ErrorCode::kInvalidArgument, fmt::format("tilt {} outside I = ({}, {})", lambda, pot.slope_minus(),
                                                  pot.slope_plus()));
  return tilted_moments(pot, lambda).mean;
}

TiltedFamily tilt_solve(const Potential& pot, double m, double tol) {
  const double smin = pot.slope_minus(), smax = pot.slope_plus();
  const auto inside_step = [](double x, double bound, double dir) {
    if (std::isinf(bound)) return x + dir * (1.0 + std::abs(x));
    return x + 0.5 * (bound - x);
  };
  double start = 0.0;
  if (!std::isinf(smin) && !std::isinf(smax))
    start = 0.5 * (smin + smax);
  else if (!std::isinf(smin))
    start = smin + 1.0;
  else if (!std::isinf(smax))
    start = smax - 1.0;
  double lo = start, hi = start;
  double mlo = tilted_mean(pot, lo);
  double mhi = mlo;
  for (int it = 0; it < 200 && mlo > m; ++it) {
    lo = inside_step(lo, smin, -1.0);
    mlo = tilted_mean(pot, lo);
  }
  for (int it = 0; it < 200 && mhi < m; ++it) {
    hi = inside_step(hi, smax, 1.0);
    mhi = tilted_mean(pot, hi);
  }
  if (mlo > m || mhi < m)
    fail(ErrorCode::kBracketNotFound,
         fmt::format("no tilt bracket for mean {} inside I = ({}, {}); reached [{}, {}] with means [{}, {}]", m, smin,
                     smax, lo, hi, mlo, mhi));
  double lambda = 0.5 * (lo + hi);
  double mean = tilted_mean(pot, lambda);
  for (int it = 0; it < 300 && std::abs(mean - m) > tol && hi - lo > 1e-15 * (1.0 + std::abs(lambda)); ++it) {
    if (mean < m)
      lo = lambda;
    else
      hi = lambda;
    lambda = 0.5 * (lo + hi);
    mean = tilted_mean(pot, lambda);
  }
  return {pot, lambda, mean};
}

}  // namespace gradphi
