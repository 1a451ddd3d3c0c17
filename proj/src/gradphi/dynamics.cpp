#include "gradphi/dynamics.hpp"

#include <fmt/format.h>

#include <cmath>

#include "gradphi/error.hpp"
#include "gradphi/parallel.hpp"
#include "gradphi/rng.hpp"

namespace gradphi {

namespace {

[[noreturn]] void rethrow_with_event(const Error& e, const Event& ev) {
  fail(e.code(), fmt::format("{} (event t={:.17g}, site={}, u1={:.17g})", e.what(), ev.time, ev.site, ev.u[0]));
}

// Emits observations for all requested times strictly before `t`.
void flush_until(const Observer* obs, std::size_t& next, double t, const Interface& x, bool inclusive) {
  if (!obs || !obs->at) return;
  while (next < obs->times.size() && (inclusive ? obs->times[next] <= t : obs->times[next] < t)) {
    obs->at(next, x);
    ++next;
  }
}

void require_observer_times(const Observer* obs) {
  if (!obs) return;
  for (std::size_t i = 1; i < obs->times.size(); ++i)
    if (obs->times[i] < obs->times[i - 1]) fail(ErrorCode::kInvalidArgument, "observation times must be nondecreasing");
}

}  // namespace

Interface run_single(const ConditionalSampler& sampler, Interface x, const EventStream& events,
                     const CensoringScheme& censor, const Observer* observer, SingleStats* stats) {
  if (x.size() != events.size())
    fail(ErrorCode::kInvalidArgument, fmt::format("interface N={} does not match event stream N={}", x.size(), events.size()));
  censor.validate_for(x.size());
  require_observer_times(observer);
  SingleStats local;
  std::size_t next_obs = 0;
  auto cur = events.cursor(1);
  Event ev;
  while (cur.next(ev)) {
    flush_until(observer, next_obs, ev.time, x, false);
    if (!censor.empty() && censor.censored(ev.time, ev.site)) {
      ++local.censored;
      continue;
    }
    try {
      x.at_interior(ev.site) = sampler.quantile(x[ev.site - 1], x[ev.site + 1], ev.u[0]);
    } catch (const Error& e) {
      rethrow_with_event(e, ev);
    }
    ++local.events;
    if (observer && observer->on_event) observer->on_event(ev, x);
  }
  flush_until(observer, next_obs, std::numeric_limits<double>::infinity(), x, true);
  if (stats) *stats = local;
  return x;
}

namespace {

struct OrderedPair {
  std::size_t lo, hi;
  bool gradient;
};

std::string chain_trace(const std::vector<Interface>& chains, std::size_t i, int k) {
  const auto& c = chains[i];
  return fmt::format("chain {}: x[{}]={:.17g} x[{}]={:.17g} x[{}]={:.17g}", i, k - 1, c[k - 1], k, c[k], k + 1, c[k + 1]);
}

}  // namespace

GrandResult run_grand_coupled(const ConditionalSampler& sampler, std::vector<Interface> chains,
                              const EventStream& events, const GrandOptions& options, const Observer* observer) {
  if (chains.empty()) fail(ErrorCode::kInvalidArgument, "grand coupling needs at least one chain");
  const int n = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != n) fail(ErrorCode::kInvalidArgument, "grand coupling chains must share N");
  if (n != events.size()) fail(ErrorCode::kInvalidArgument, "event stream N does not match the chains");
  require_observer_times(observer);

  GrandResult res;
  std::vector<OrderedPair> pairs;
  if (options.assertions != AssertionLevel::kOff) {
    for (std::size_t i = 0; i < chains.size(); ++i)
      for (std::size_t j = 0; j < chains.size(); ++j) {
        if (i == j) continue;
        if (height_ordered(chains[i], chains[j]) && !(i > j && height_ordered(chains[j], chains[i]))) {
          pairs.push_back({i, j, false});
          ++res.height_pairs;
        }
        if (gradient_ordered(chains[i], chains[j]) && !(i > j && gradient_ordered(chains[j], chains[i]))) {
          pairs.push_back({i, j, true});
          ++res.gradient_pairs;
        }
      }
  }
  const double tol = options.tolerance;
  auto check_site = [&](const Event& ev, int k) {
    ++res.checks;
    for (const auto& p : pairs) {
      const auto& a = chains[p.lo];
      const auto& b = chains[p.hi];
      bool ok = true;
      if (!p.gradient) {
        ok = a[k] <= b[k] + tol;
      } else {
        for (int j = std::max(1, k); j <= std::min(n, k + 1); ++j)
          ok = ok && (a[j] - a[j - 1] <= b[j] - b[j - 1] + tol);
      }
      if (!ok)
        fail(ErrorCode::kOrderViolation,
             fmt::format("{} order violated after event t={:.17g} site={} u1={:.17g}; {}; {}",
                         p.gradient ? "gradient" : "height", ev.time, ev.site, ev.u[0], chain_trace(chains, p.lo, k),
                         chain_trace(chains, p.hi, k)));
    }
  };

  std::size_t next_obs = 0;
  auto cur = events.cursor(1);
  Event ev;
  while (cur.next(ev)) {
    flush_until(observer, next_obs, ev.time, chains.front(), false);
    const int k = ev.site;
    try {
      for (auto& c : chains) c.at_interior(k) = sampler.quantile(c[k - 1], c[k + 1], ev.u[0]);
    } catch (const Error& e) {
      rethrow_with_event(e, ev);
    }
    ++res.events;
    if (!pairs.empty() &&
        (options.assertions == AssertionLevel::kFull || res.events % std::max<std::size_t>(1, options.sample_every) == 0))
      check_site(ev, k);
  }
  flush_until(observer, next_obs, std::numeric_limits<double>::infinity(), chains.front(), true);
  if (!pairs.empty()) {
    Event last{events.horizon(), 0, {}};
    for (int k = 1; k < n; ++k) check_site(last, k);
  }
  res.finals = std::move(chains);
  return res;
}

StickyResult run_sticky_pair(const ConditionalSampler& sampler, Interface x, Interface y, const EventStream& events,
                             const StickyOptions& options) {
  const int n = x.size();
  if (y.size() != n || events.size() != n) fail(ErrorCode::kInvalidArgument, "sticky pair needs matching N");
  if (x.tilt() != y.tilt()) fail(ErrorCode::kInvalidArgument, "sticky pair needs matching tilt");
  if (!(options.switch_time >= 0.0)) fail(ErrorCode::kInvalidArgument, "switch_time must be >= 0");
  for (std::size_t i = 1; i < options.area_times.size(); ++i)
    if (options.area_times[i] < options.area_times[i - 1])
      fail(ErrorCode::kInvalidArgument, "area observation times must be nondecreasing");

  StickyResult res;
  res.ordered = height_ordered(x, y);
  int mismatched = 0;
  for (int k = 1; k < n; ++k) mismatched += x[k] != y[k];
  if (mismatched == 0) res.coalescence_time = 0.0;
  res.area_at.reserve(options.area_times.size());
  std::size_t next_obs = 0;
  auto observe_until = [&](double t, bool inclusive) {
    while (next_obs < options.area_times.size() &&
           (inclusive ? options.area_times[next_obs] <= t : options.area_times[next_obs] < t)) {
      res.area_at.push_back(mismatched == 0 ? 0.0 : area_between(y, x));
      ++next_obs;
    }
  };
  double area = area_between(y, x);
  const bool check = res.ordered && options.assertions != AssertionLevel::kOff;

  auto cur = events.cursor(4);
  Event ev;
  while (cur.next(ev)) {
    observe_until(ev.time, false);
    if (mismatched == 0 && options.stop_at_coalescence) break;
    const int k = ev.site;
    const bool monotone = ev.time < options.switch_time;
    try {
      if (mismatched == 0) {
        const double v = sampler.quantile(x[k - 1], x[k + 1], monotone ? ev.u[0] : ev.u[2]);
        x.at_interior(k) = v;
        y.at_interior(k) = v;
      } else {
        const double ox = x[k], oy = y[k];
        if (monotone) {
          x.at_interior(k) = sampler.quantile(x[k - 1], x[k + 1], ev.u[0]);
          y.at_interior(k) = sampler.quantile(y[k - 1], y[k + 1], ev.u[0]);
        } else {
          const StickyDraw d = sampler.sticky(x[k - 1], x[k + 1], y[k - 1], y[k + 1], ev.u);
          x.at_interior(k) = d.x;
          y.at_interior(k) = d.y;
          res.coupled_draws += d.coupled;
        }
        mismatched += (x[k] != y[k]) - (ox != oy);
        area += (y[k] - oy) - (x[k] - ox);
        if (mismatched == 0) {
          res.coalescence_time = ev.time;
          area = 0.0;
        }
        if (check && options.assertions == AssertionLevel::kFull && x[k] > y[k] + options.tolerance)
          fail(ErrorCode::kOrderViolation,
               fmt::format("sticky pair order violated at t={:.17g} site={}: x={:.17g} y={:.17g}", ev.time, k, x[k], y[k]));
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kOrderViolation) throw;
      rethrow_with_event(e, ev);
    }
    ++res.events;
    if (options.record_event_area) {
      res.event_times.push_back(ev.time);
      res.event_area.push_back(area);
    }
  }
  observe_until(std::numeric_limits<double>::infinity(), true);
  res.x = std::move(x);
  res.y = std::move(y);
  return res;
}

std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica) noexcept {
  return derive_seed(seed, "replica", replica);
}

Proportion coalescence_fraction(const ConditionalSampler& sampler, const Interface& x0, const Interface& y0,
                                std::uint64_t seed, std::size_t replicas, double t, double switch_time, int threads) {
  if (replicas < 1) fail(ErrorCode::kInvalidArgument, "coalescence_fraction needs at least one replica");
  std::vector<char> hit(replicas, 0);
  parallel_for(replicas, threads, [&](std::size_t r) {
    const EventStream ev(replica_seed(seed, r), x0.size(), t);
    StickyOptions o;
    o.switch_time = switch_time;
    o.assertions = AssertionLevel::kOff;
    hit[r] = run_sticky_pair(sampler, x0, y0, ev, o).coalesced_by(t);
  });
  std::size_t count = 0;
  for (char h : hit) count += static_cast<std::size_t>(h);
  Proportion p;
  p.replicas = replicas;
  p.value = static_cast<double>(count) / static_cast<double>(replicas);
  p.std_error = std::sqrt(p.value * (1.0 - p.value) / static_cast<double>(replicas));
  return p;
}

}  // namespace gradphi
