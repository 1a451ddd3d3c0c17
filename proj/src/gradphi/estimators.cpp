#include "gradphi/estimators.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "gradphi/error.hpp"
#include "gradphi/observables.hpp"
#include "gradphi/parallel.hpp"
#include "gradphi/special.hpp"
#include "gradphi/stats.hpp"

namespace gradphi {

double EstimateReport::ci_low() const { return value - normal_quantile(0.5 + 0.5 * ci_level) * std_error; }
double EstimateReport::ci_high() const { return value + normal_quantile(0.5 + 0.5 * ci_level) * std_error; }

std::string make_digest(const std::string& method, std::uint64_t seed, const std::string& parameters) {
  return fmt::format("{}/{:016x}/{:016x}", method, seed, hash_label(parameters));
}

std::vector<double> EnsembleRecord::column(std::size_t i, std::size_t j) const {
  std::vector<double> c(replicas);
  for (std::size_t r = 0; r < replicas; ++r) c[r] = at(r, i, j);
  return c;
}

std::vector<double> geometric_grid(double lo, double hi, int points_per_decade) {
  if (!(lo > 0.0 && hi >= lo) || points_per_decade < 1)
    fail(ErrorCode::kInvalidArgument, fmt::format("bad geometric grid [{}, {}] with {} points per decade", lo, hi, points_per_decade));
  std::vector<double> g;
  for (int i = 0;; ++i) {
    const double t = lo * std::pow(10.0, static_cast<double>(i) / points_per_decade);
    if (t > hi * (1.0 + 1e-12)) break;
    g.push_back(t);
  }
  return g;
}

EnsembleRecord record_ensemble(const Ensemble& ens, const Interface& x0, std::span<const double> times,
                               std::size_t width, const StatVector& stat, const CensoringScheme& censor) {
  if (ens.replicas < 1) fail(ErrorCode::kInvalidArgument, "ensemble needs at least one replica");
  if (times.empty()) fail(ErrorCode::kInvalidArgument, "ensemble needs at least one observation time");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (!(times[i] >= 0.0) || (i > 0 && times[i] < times[i - 1]))
      fail(ErrorCode::kInvalidArgument, "observation times must be nonnegative and nondecreasing");
  EnsembleRecord rec;
  rec.replicas = ens.replicas;
  rec.times = times.size();
  rec.width = width;
  rec.values.assign(rec.replicas * rec.times * width, 0.0);
  std::vector<SingleStats> stats(ens.replicas);
  const double horizon = times.back();
  parallel_for(ens.replicas, ens.threads, [&](std::size_t r) {
    const EventStream ev(replica_seed(ens.seed, r), x0.size(), horizon);
    Observer obs;
    obs.times.assign(times.begin(), times.end());
    obs.at = [&](std::size_t i, const Interface& x) {
      stat(x, std::span<double>(rec.values.data() + (r * rec.times + i) * width, width));
    };
    run_single(ens.sampler, x0, ev, censor, &obs, &stats[r]);
  });
  for (const auto& st : stats) {
    rec.events += st.events;
    rec.censored += st.censored;
  }
  return rec;
}

MeanProfile mean_profile(const Ensemble& ens, const Interface& x0, std::span<const double> times) {
  const auto width = static_cast<std::size_t>(x0.size()) + 1;
  const auto rec = record_ensemble(ens, x0, times, width, [](const Interface& x, std::span<double> out) {
    std::copy(x.heights().begin(), x.heights().end(), out.begin());
  });
  MeanProfile p;
  p.times.assign(times.begin(), times.end());
  for (std::size_t i = 0; i < times.size(); ++i) {
    std::vector<double> m(width), s(width);
    for (std::size_t k = 0; k < width; ++k) {
      const Moments mo = moments(rec.column(i, k));
      m[k] = mo.mean;
      s[k] = mo.std_error();
    }
    p.mean.push_back(std::move(m));
    p.std_error.push_back(std::move(s));
  }
  return p;
}

namespace {

StatVector fourier_stat_vector() {
  return [](const Interface& x, std::span<double> out) { out[0] = fourier_stat(x.gauged(), 1); };
}

}  // namespace

std::vector<DecayPoint> fourier_decay(const Ensemble& ens, const Interface& x0, std::span<const double> times) {
  const auto rec = record_ensemble(ens, x0, times, 1, fourier_stat_vector());
  const double f0 = fourier_stat(x0.gauged(), 1);
  const double gap = spectral_gap(x0.size());
  std::vector<DecayPoint> pts;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Moments m = moments(rec.column(i, 0));
    pts.push_back({times[i], m.mean, m.std_error(), f0 * std::exp(-gap * times[i])});
  }
  return pts;
}

GapReport gap_from_decay(const Ensemble& ens, const Interface& x0, double horizon, int time_points) {
  const int n = x0.size();
  const double gap = spectral_gap(n);
  if (!(horizon >= 3.0 / gap * (1.0 - 1e-12)))
    fail(ErrorCode::kInvalidArgument, fmt::format("gap_from_decay needs horizon >= 3/gap = {}, got {}", 3.0 / gap, horizon));
  if (time_points < 3) fail(ErrorCode::kInvalidArgument, "gap_from_decay needs at least 3 time points");
  const double f0 = fourier_stat(x0.gauged(), 1);
  if (std::abs(f0) < 1e-12) fail(ErrorCode::kInvalidArgument, "gap_from_decay needs f_N(x0) != 0");

  std::vector<double> times;
  for (int i = 1; i <= time_points; ++i) times.push_back(horizon * i / time_points);
  const auto rec = record_ensemble(ens, x0, times, 1, fourier_stat_vector());

  GapReport rep;
  rep.theory = gap;
  std::vector<double> weights;
  std::vector<std::size_t> fit;
  bool open = true;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Moments m = moments(rec.column(i, 0));
    rep.points.push_back({times[i], m.mean, m.std_error(), f0 * std::exp(-gap * times[i])});
    const double se = m.std_error();
    if (open && m.mean * f0 > 0.0 && std::abs(m.mean) >= 5.0 * se && se > 0.0) {
      fit.push_back(i);
      weights.push_back((m.mean / se) * (m.mean / se));
    } else {
      open = false;
    }
  }
  if (fit.size() < 3)
    fail(ErrorCode::kInsufficientData,
         fmt::format("mean of f_N is within noise after {} of {} times; increase replicas or shorten the horizon",
                     fit.size(), times.size()));
  rep.fit_points = fit.size();

  auto slope = [&](const std::vector<std::size_t>& keep) {
    double num = 0.0, den = 0.0;
    for (std::size_t a = 0; a < fit.size(); ++a) {
      const std::size_t i = fit[a];
      double s = 0.0;
      for (std::size_t r : keep) s += rec.at(r, i, 0);
      const double mean = s / static_cast<double>(keep.size());
      const double y = std::log(std::max(std::abs(mean), 1e-300) / std::abs(f0));
      num += weights[a] * times[i] * y;
      den += weights[a] * times[i] * times[i];
    }
    return -num / den;
  };
  std::vector<std::size_t> all(ens.replicas);
  for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
  rep.estimate.value = slope(all);
  rep.estimate.std_error = jackknife_stderr(ens.replicas, 50, slope);
  rep.estimate.replicas = ens.replicas;
  rep.estimate.method = "gap_from_decay";
  rep.estimate.digest = make_digest("gap_from_decay", ens.seed,
                                    fmt::format("{}|N={}|h={}|horizon={}|points={}|R={}", ens.sampler.potential().name(), n,
                                                x0.tilt(), horizon, time_points, ens.replicas));
  rep.estimate.details = {{"theory", gap}, {"f0", f0}, {"fit_points", static_cast<double>(fit.size())}};
  return rep;
}

WilsonCurve wilson_lower_curve(const Ensemble& ens, int n, double tilt, std::span<const double> times,
                               std::size_t equilibrium_count, const EquilibriumOptions& eq) {
  if (equilibrium_count < 2) fail(ErrorCode::kInvalidArgument, "wilson_lower_curve needs >= 2 equilibrium draws");
  const double gap = spectral_gap(n);
  const Interface x0 = Interface::tent(n, 0.5 * n, tilt);
  WilsonCurve curve;
  curve.surrogate = fmt::format("tent peak {}", 0.5 * n);
  curve.start_stat = fourier_stat(x0.gauged(), 1);

  const auto batch = equilibrium_samples(ens.sampler, n, tilt, derive_seed(ens.seed, "wilson-eq", 0), equilibrium_count,
                                         eq, ens.threads);
  curve.certificate = batch.certificate;
  std::vector<double> fe;
  for (const auto& s : batch.samples) fe.push_back(fourier_stat(s.gauged(), 1));
  const Moments me = moments(fe);
  curve.v_pi = me.variance;
  const double var_vpi = std::max(0.0, (me.fourth - me.variance * me.variance) / static_cast<double>(me.n));
  curve.v_pi_std_error = std::sqrt(var_vpi);

  Ensemble run = ens;
  run.seed = derive_seed(ens.seed, "wilson", 0);
  const auto rec = record_ensemble(run, x0, times, 1, fourier_stat_vector());
  std::vector<double> cs;
  for (std::size_t i = 0; i < times.size(); ++i) {
    const Moments m = moments(rec.column(i, 0));
    WilsonPoint p;
    p.t = times[i];
    p.mean = m.mean;
    p.variance = m.variance;
    const double d = 2.0 * m.variance + 2.0 * curve.v_pi;
    if (!(d > 0.0)) {
      ++curve.clipped;
      p.bound = m.mean != 0.0 ? 1.0 : 0.0;
    } else {
      const double q = m.mean * m.mean / d;
      p.bound = 1.0 - 1.0 / (1.0 + q);
      const double var_m = m.variance / static_cast<double>(m.n);
      const double var_v = std::max(0.0, (m.fourth - m.variance * m.variance) / static_cast<double>(m.n));
      const double dq_dm = 2.0 * m.mean / d;
      const double dq_dv = 2.0 * m.mean * m.mean / (d * d);
      const double se_q = std::sqrt(dq_dm * dq_dm * var_m + dq_dv * dq_dv * (var_v + var_vpi));
      p.std_error = se_q / ((1.0 + q) * (1.0 + q));
      p.fitted_c = q * std::exp(2.0 * gap * p.t) / n;
      if (p.bound > 0.05 && p.bound < 0.95) cs.push_back(p.fitted_c);
    }
    curve.points.push_back(p);
  }
  if (!cs.empty()) {
    std::sort(cs.begin(), cs.end());
    curve.fitted_c = quantile_sorted(cs, 0.5);
  }
  return curve;
}

namespace {

void require_certificate(const EquilibriumCertificate& cert, const EquilibriumOptions& eq) {
  if (cert.bias_bound > eq.max_bias)
    fail(ErrorCode::kEstimator,
         fmt::format("equilibrium source bias bound {} exceeds tolerance {} (t_run={}); increase t_run", cert.bias_bound,
                     eq.max_bias, cert.t_run));
}

struct UpperContext {
  const Ensemble* ens;
  const std::vector<Interface>* partners;
  std::string label;
};

std::uint64_t upper_stream(const Ensemble& ens, const std::string& label, std::size_t r) {
  return derive_seed(ens.seed, label, r);
}

UpperPoint upper_at(const UpperContext& c, const Interface& x0, double t, double switch_time) {
  const Ensemble& ens = *c.ens;
  std::vector<char> hit(ens.replicas, 0);
  parallel_for(ens.replicas, ens.threads, [&](std::size_t r) {
    const EventStream ev(upper_stream(ens, c.label, r), x0.size(), t);
    StickyOptions o;
    o.switch_time = switch_time;
    o.assertions = AssertionLevel::kOff;
    o.stop_at_coalescence = true;
    hit[r] = run_sticky_pair(ens.sampler, x0, (*c.partners)[r], ev, o).coalesced_by(t);
  });
  std::size_t h = 0;
  for (char v : hit) h += static_cast<std::size_t>(v);
  UpperPoint p;
  p.t = t;
  p.switch_time = switch_time;
  p.upper = 1.0 - static_cast<double>(h) / static_cast<double>(ens.replicas);
  p.std_error = std::sqrt(p.upper * (1.0 - p.upper) / static_cast<double>(ens.replicas));
  return p;
}

std::vector<Interface> partner_draws(const Ensemble& ens, int n, double tilt, const EquilibriumCertificate& cert,
                                     const EquilibriumOptions& eq) {
  std::vector<Interface> out(ens.replicas);
  parallel_for(ens.replicas, ens.threads, [&](std::size_t r) {
    out[r] = equilibrium_draw(ens.sampler, n, tilt, derive_seed(ens.seed, "partner", r), cert, eq.max_retries);
  });
  return out;
}

}  // namespace

UpperCurve tv_upper_curve(const Ensemble& ens, const Interface& x0, std::span<const double> times, const SwitchRule& rule,
                          const EquilibriumOptions& eq, const std::string& label) {
  for (std::size_t i = 0; i < times.size(); ++i)
    if (!(times[i] >= 0.0)) fail(ErrorCode::kInvalidArgument, "upper curve times must be nonnegative");
  UpperCurve curve;
  curve.certificate =
      calibrate_equilibrium(ens.sampler, x0.size(), x0.tilt(), derive_seed(ens.seed, "upper-cal", 0), eq, ens.threads);
  require_certificate(curve.certificate, eq);
  const auto partners = partner_draws(ens, x0.size(), x0.tilt(), curve.certificate, eq);
  const UpperContext ctx{&ens, &partners, label};
  if (rule.kind == SwitchRule::Kind::kFixed && !times.empty()) {
    const double horizon = *std::max_element(times.begin(), times.end());
    std::vector<double> tc(ens.replicas);
    parallel_for(ens.replicas, ens.threads, [&](std::size_t r) {
      const EventStream ev(upper_stream(ens, label, r), x0.size(), horizon);
      StickyOptions o;
      o.switch_time = rule.fixed;
      o.assertions = AssertionLevel::kOff;
      o.stop_at_coalescence = true;
      tc[r] = run_sticky_pair(ens.sampler, x0, partners[r], ev, o).coalescence_time;
    });
    for (double t : times) {
      std::size_t h = 0;
      for (double c : tc) h += c <= t;
      UpperPoint p;
      p.t = t;
      p.switch_time = rule.fixed;
      p.upper = 1.0 - static_cast<double>(h) / static_cast<double>(ens.replicas);
      p.std_error = std::sqrt(p.upper * (1.0 - p.upper) / static_cast<double>(ens.replicas));
      curve.points.push_back(p);
    }
    return curve;
  }
  for (double t : times) curve.points.push_back(upper_at(ctx, x0, t, rule.at(t)));
  return curve;
}

namespace {

// Log-linear crossing of `eps` between grid points i (value a) and i+1 (value b).
double crossing(double t0, double t1, double a, double b, double eps) {
  if (a == b) return std::sqrt(t0 * t1);
  const double w = std::clamp((a - eps) / (a - b), 0.0, 1.0);
  return std::exp(std::log(t0) + w * (std::log(t1) - std::log(t0)));
}

}  // namespace

MixingStudy mixing_time_brackets(const ConditionalSampler& sampler, int n, double tilt,
                                 std::span<const double> epsilons, std::uint64_t seed, const BracketOptions& options,
                                 int threads) {
  for (double e : epsilons)
    if (!(e > 0.0 && e < 1.0)) fail(ErrorCode::kInvalidArgument, fmt::format("epsilon must lie in (0,1), got {}", e));
  MixingStudy study;
  study.n = n;
  const double gap = spectral_gap(n);
  const double predicted = std::log(static_cast<double>(n)) / (2.0 * gap);
  study.grid = geometric_grid(0.05 * predicted, 20.0 * predicted, options.points_per_decade);
  const auto& grid = study.grid;
  const std::size_t g = grid.size();

  Ensemble lower{sampler, derive_seed(seed, "lower", 0), options.lower_replicas, threads};
  study.lower = wilson_lower_curve(lower, n, tilt, grid, options.equilibrium_count, options.eq);

  Ensemble upper{sampler, derive_seed(seed, "upper", 0), options.upper_replicas, threads};
  study.certificate = calibrate_equilibrium(sampler, n, tilt, derive_seed(seed, "upper-cal", 0), options.eq, threads);
  require_certificate(study.certificate, options.eq);
  const auto partners = partner_draws(upper, n, tilt, study.certificate, options.eq);
  const Interface plus = Interface::flat(n, n, tilt), minus = Interface::flat(n, -n, tilt);
  const UpperContext cplus{&upper, &partners, "plus"}, cminus{&upper, &partners, "minus"};
  auto eval = [&](std::size_t i) -> UpperPoint {
    if (!study.upper_plus.count(i)) {
      study.upper_plus[i] = upper_at(cplus, plus, grid[i], options.rule.at(grid[i]));
      study.upper_minus[i] = upper_at(cminus, minus, grid[i], options.rule.at(grid[i]));
    }
    const auto& a = study.upper_plus[i];
    const auto& b = study.upper_minus[i];
    return a.upper >= b.upper ? a : b;
  };

  for (double eps : epsilons) {
    MixingBracket br;
    br.epsilon = eps;
    br.predicted = predicted;
    const auto& lp = study.lower.points;
    std::size_t last = g;
    for (std::size_t i = g; i-- > 0;)
      if (lp[i].bound >= eps) {
        last = i;
        break;
      }
    if (last == g) {
      br.t_lo = 0.0;
      br.lo_found = true;
    } else if (last + 1 < g) {
      br.t_lo = crossing(grid[last], grid[last + 1], lp[last].bound, lp[last + 1].bound, eps);
      const double drop = std::max(lp[last].bound - lp[last + 1].bound, 1e-12);
      br.t_lo_std_error = (grid[last + 1] - grid[last]) / drop * std::max(lp[last].std_error, lp[last + 1].std_error);
      br.lo_found = true;
    } else {
      br.t_lo = grid.back();
    }

    // smallest index with upper <= eps
    std::size_t start = 0;
    while (start + 1 < g && grid[start] < std::max(br.t_lo, predicted)) ++start;
    std::ptrdiff_t lo = -1, hi = -1;
    if (eval(start).upper <= eps) {
      hi = static_cast<std::ptrdiff_t>(start);
      std::ptrdiff_t step = 1;
      while (hi - step >= 0 && eval(static_cast<std::size_t>(hi - step)).upper <= eps) {
        hi -= step;
        step *= 2;
      }
      lo = std::max<std::ptrdiff_t>(hi - step, -1);
    } else {
      lo = static_cast<std::ptrdiff_t>(start);
      std::ptrdiff_t step = 1;
      while (lo + step < static_cast<std::ptrdiff_t>(g) && eval(static_cast<std::size_t>(lo + step)).upper > eps) {
        lo += step;
        step *= 2;
      }
      hi = lo + step;
      if (hi >= static_cast<std::ptrdiff_t>(g)) {
        hi = static_cast<std::ptrdiff_t>(g) - 1;
        if (eval(static_cast<std::size_t>(hi)).upper > eps) hi = -1;
      }
    }
    if (hi < 0) {
      br.t_hi = grid.back();
      br.hi_found = false;
    } else {
      while (hi - lo > 1) {
        const std::ptrdiff_t mid = lo + (hi - lo) / 2;
        (eval(static_cast<std::size_t>(mid)).upper <= eps ? hi : lo) = mid;
      }
      br.hi_found = true;
      const UpperPoint uh = eval(static_cast<std::size_t>(hi));
      if (lo < 0) {
        br.t_hi = grid[static_cast<std::size_t>(hi)];
      } else {
        const UpperPoint ul = eval(static_cast<std::size_t>(lo));
        br.t_hi = crossing(ul.t, uh.t, ul.upper, uh.upper, eps);
        const double drop = std::max(ul.upper - uh.upper, 1e-12);
        br.t_hi_std_error = (uh.t - ul.t) / drop * std::max({ul.std_error, uh.std_error, 1.0 / static_cast<double>(upper.replicas)});
      }
    }
    study.brackets.push_back(br);
  }
  return study;
}

std::vector<CutoffRow> cutoff_rows(const MixingStudy& study) {
  std::vector<CutoffRow> rows;
  const double n = study.n;
  const double scale = std::numbers::pi * std::numbers::pi / (n * n * std::log(n));
  for (const auto& b : study.brackets) {
    CutoffRow r;
    r.n = study.n;
    r.epsilon = b.epsilon;
    r.t_lo = b.t_lo;
    r.t_hi = b.t_hi;
    r.t_mid = b.t_mid();
    r.ratio = r.t_mid * scale;
    r.ratio_low = b.t_lo * scale;
    r.ratio_high = b.t_hi * scale;
    r.width_ratio = b.t_lo > 0.0 ? b.t_hi / b.t_lo : std::numeric_limits<double>::infinity();
    const double rl = b.t_lo > 0.0 ? b.t_lo_std_error / b.t_lo : 0.0;
    const double rh = b.t_hi > 0.0 ? b.t_hi_std_error / b.t_hi : 0.0;
    r.ratio_std_error = r.ratio * 0.5 * std::sqrt(rl * rl + rh * rh);
    rows.push_back(r);
  }
  return rows;
}

Statistic coordinate_statistic(int k) {
  return {fmt::format("x_{}", k), [k](const Interface& x) { return x[k]; }};
}

bool FkgReport::passed() const {
  return std::all_of(pairs.begin(), pairs.end(), [](const FkgPair& p) { return p.passed; });
}

FkgReport fkg_test(const Ensemble& ens, int n, double tilt, const std::vector<std::pair<Statistic, Statistic>>& pairs,
                   const EquilibriumOptions& eq) {
  const auto batch =
      equilibrium_samples(ens.sampler, n, tilt, derive_seed(ens.seed, "fkg-eq", 0), ens.replicas, eq, ens.threads);
  require_certificate(batch.certificate, eq);
  CounterRng rng(derive_seed(ens.seed, "fkg-monotone", 0));
  const std::size_t checks = std::min<std::size_t>(batch.samples.size(), 50);
  for (const auto& [f, g] : pairs) {
    for (const Statistic* s : {&f, &g}) {
      for (std::size_t i = 0; i < checks; ++i) {
        const Interface& x = batch.samples[i];
        std::vector<double> h(x.heights().begin(), x.heights().end());
        for (int k = 1; k < n; ++k) h[static_cast<std::size_t>(k)] += std::abs(rng.normal());
        const Interface y(std::move(h), x.tilt());
        if (s->f(x) > s->f(y) + 1e-12)
          fail(ErrorCode::kInvalidArgument, fmt::format("statistic {} is not increasing", s->name));
      }
    }
  }
  FkgReport rep;
  rep.certificate = batch.certificate;
  rep.replicas = batch.samples.size();
  for (const auto& [f, g] : pairs) {
    std::vector<double> a, b;
    for (const auto& x : batch.samples) {
      a.push_back(f.f(x));
      b.push_back(g.f(x));
    }
    FkgPair p;
    p.f = f.name;
    p.g = g.name;
    p.covariance = covariance(a, b);
    const double ma = moments(a).mean, mb = moments(b).mean;
    std::vector<double> prod(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
    p.std_error = moments(prod).std_error();
    p.passed = p.covariance >= -3.0 * p.std_error;
    rep.pairs.push_back(p);
  }
  return rep;
}

bool CensoringReport::passed() const {
  return censored >= uncensored - 3.0 * std::hypot(censored_std_error, uncensored_std_error);
}

CensoringReport censoring_compare(const Ensemble& ens, const Interface& x0, const CensoringScheme& scheme, double t,
                                  const EquilibriumOptions& eq) {
  const int n = x0.size();
  scheme.validate_for(n);
  const auto batch =
      equilibrium_samples(ens.sampler, n, x0.tilt(), derive_seed(ens.seed, "censor-eq", 0), ens.replicas, eq, ens.threads);
  require_certificate(batch.certificate, eq);
  std::vector<double> fe;
  for (const auto& s : batch.samples) fe.push_back(fourier_stat(s.gauged(), 1));
  const double tt[] = {t};
  Ensemble run = ens;
  run.seed = derive_seed(ens.seed, "censor-run", 0);
  const auto plain = record_ensemble(run, x0, tt, 1, fourier_stat_vector());
  const auto cens = record_ensemble(run, x0, tt, 1, fourier_stat_vector(), scheme);
  CensoringReport rep;
  rep.replicas = ens.replicas;
  rep.certificate = batch.certificate;
  const auto pu = projected_tv(plain.column(0, 0), fe, derive_seed(ens.seed, "censor-boot", 0));
  const auto pc = projected_tv(cens.column(0, 0), fe, derive_seed(ens.seed, "censor-boot", 1));
  const std::vector<double> init(ens.replicas, fourier_stat(x0.gauged(), 1));
  rep.initial = projected_tv(init, fe, 0, 0).value;
  rep.uncensored = pu.value;
  rep.uncensored_std_error = pu.std_error;
  rep.censored = pc.value;
  rep.censored_std_error = pc.std_error;
  rep.censored_events = cens.censored;
  return rep;
}

TailReport tail_report(const std::vector<Interface>& samples, std::vector<double> levels) {
  std::sort(levels.begin(), levels.end());
  TailReport rep;
  rep.replicas = samples.size();
  if (samples.empty()) fail(ErrorCode::kInsufficientData, "tail report needs samples");
  const double rn = std::sqrt(static_cast<double>(samples.front().size()));
  const double r = static_cast<double>(samples.size());
  for (double u : levels) {
    TailRow row;
    row.u = u;
    for (const auto& x : samples) {
      row.height += sup_height(x) >= u * rn;
      row.gradient += sup_gradient(x) >= u;
    }
    row.height /= r;
    row.gradient /= r;
    rep.rows.push_back(row);
  }
  rep.geometric = true;
  for (std::size_t i = 0; i + 1 < rep.rows.size(); ++i) {
    if (rep.rows[i].u <= 0.0) continue;
    for (auto get : {&TailRow::height, &TailRow::gradient}) {
      const double a = rep.rows[i].*get, b = rep.rows[i + 1].*get;
      if (b > 0.5 * a + 3.0 * std::sqrt(a * (1.0 - a) / r)) rep.geometric = false;
    }
  }
  return rep;
}

TailReport equilibrium_tail_check(const Ensemble& ens, int n, double tilt, std::vector<double> levels,
                                  const EquilibriumOptions& eq) {
  const auto batch =
      equilibrium_samples(ens.sampler, n, tilt, derive_seed(ens.seed, "tail-eq", 0), ens.replicas, eq, ens.threads);
  auto rep = tail_report(batch.samples, std::move(levels));
  rep.certificate = batch.certificate;
  return rep;
}

bool ContractionReport::passed() const {
  if (b0 == 0.0) return bt == 0.0;
  return ratio <= bound * (1.0 + 3.0 * ratio_std_error / ratio);
}

ContractionReport b_nu_contraction_check(const Ensemble& ens, const Interface& x0, double t,
                                         const EquilibriumOptions& eq) {
  if (!(t >= 0.0)) fail(ErrorCode::kInvalidArgument, "contraction time must be >= 0");
  const int n = x0.size();
  const auto cert =
      calibrate_equilibrium(ens.sampler, n, x0.tilt(), derive_seed(ens.seed, "contraction-cal", 0), eq, ens.threads);
  require_certificate(cert, eq);
  const auto w = static_cast<std::size_t>(n - 1);
  // per replica: |x0 - y0| (w), |X - Xpi| (w), Y - W (w)
  std::vector<double> data(ens.replicas * 3 * w);
  parallel_for(ens.replicas, ens.threads, [&](std::size_t r) {
    const Interface y0 =
        equilibrium_draw(ens.sampler, n, x0.tilt(), derive_seed(ens.seed, "contraction-eq", r), cert, eq.max_retries);
    std::vector<double> up(x0.heights().begin(), x0.heights().end()), down = up;
    for (int k = 0; k <= n; ++k) {
      up[static_cast<std::size_t>(k)] = std::max(x0[k], y0[k]);
      down[static_cast<std::size_t>(k)] = std::min(x0[k], y0[k]);
    }
    std::vector<Interface> chains{x0, y0, Interface(up, x0.tilt()), Interface(down, x0.tilt())};
    const EventStream ev(replica_seed(derive_seed(ens.seed, "contraction", 0), r), n, t);
    GrandOptions go;
    go.assertions = AssertionLevel::kSampled;
    const auto res = run_grand_coupled(ens.sampler, std::move(chains), ev, go);
    double* row = data.data() + r * 3 * w;
    for (int k = 1; k < n; ++k) {
      const auto j = static_cast<std::size_t>(k - 1);
      row[j] = std::abs(x0[k] - y0[k]);
      row[w + j] = std::abs(res.finals[0][k] - res.finals[1][k]);
      row[2 * w + j] = res.finals[2][k] - res.finals[3][k];
    }
  });
  auto norm_of_means = [&](const std::vector<std::size_t>& keep, std::size_t block) {
    double s = 0.0;
    for (std::size_t j = 0; j < w; ++j) {
      double m = 0.0;
      for (std::size_t r : keep) m += data[r * 3 * w + block * w + j];
      m /= static_cast<double>(keep.size());
      s += m * m;
    }
    return std::sqrt(s);
  };
  std::vector<std::size_t> all(ens.replicas);
  for (std::size_t r = 0; r < all.size(); ++r) all[r] = r;
  ContractionReport rep;
  rep.t = t;
  rep.replicas = ens.replicas;
  rep.b0 = norm_of_means(all, 0);
  rep.bt = norm_of_means(all, 1);
  rep.bt_envelope = norm_of_means(all, 2);
  rep.bound = std::exp(-spectral_gap(n) * t);
  if (rep.b0 > 0.0) {
    rep.ratio = rep.bt / rep.b0;
    rep.envelope_ratio = rep.bt_envelope / rep.b0;
    if (ens.replicas >= 2)
      rep.ratio_std_error = jackknife_stderr(ens.replicas, 50, [&](const std::vector<std::size_t>& keep) {
        return norm_of_means(keep, 1) / norm_of_means(keep, 0);
      });
  }
  return rep;
}

}  // namespace gradphi
