#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <sstream>

#include "gradphi/dynamics.hpp"
#include "gradphi/error.hpp"
#include "gradphi/estimators.hpp"
#include "gradphi/rng.hpp"
#include "oracles.hpp"

using namespace gradphi;

namespace {

const ConditionalSampler kGauss{Potential::gaussian()};
const ConditionalSampler kSos{Potential::sos()};

// Explicit Euler-free reference for d/dt a = (1/2) Delta a with fixed ends:
// classical RK4 with a small step.
std::vector<double> heat_rk4(std::vector<double> a, double t) {
  const int n = static_cast<int>(a.size()) - 1;
  const int steps = std::max(1, static_cast<int>(std::ceil(t / 0.01)));
  const double h = t / steps;
  auto rhs = [n](const std::vector<double>& v) {
    std::vector<double> d(v.size(), 0.0);
    for (int k = 1; k < n; ++k) d[k] = 0.5 * (v[k - 1] - 2.0 * v[k] + v[k + 1]);
    return d;
  };
  for (int s = 0; s < steps; ++s) {
    auto k1 = rhs(a);
    std::vector<double> b(a);
    for (int k = 0; k <= n; ++k) b[k] = a[k] + 0.5 * h * k1[k];
    auto k2 = rhs(b);
    for (int k = 0; k <= n; ++k) b[k] = a[k] + 0.5 * h * k2[k];
    auto k3 = rhs(b);
    for (int k = 0; k <= n; ++k) b[k] = a[k] + h * k3[k];
    auto k4 = rhs(b);
    for (int k = 0; k <= n; ++k) a[k] += h / 6.0 * (k1[k] + 2 * k2[k] + 2 * k3[k] + k4[k]);
  }
  return a;
}

}  // namespace

TEST_CASE("event stream basics") {
  CHECK(EventStream(1, 2, 0.0).materialise().empty());
  const auto a = EventStream(7, 8, 50.0).materialise();
  const auto b = EventStream(7, 8, 50.0).materialise();
  CHECK(a == b);
  CHECK(!a.empty());
  for (std::size_t i = 1; i < a.size(); ++i) CHECK(a[i - 1].time <= a[i].time);
  for (const auto& e : a) {
    CHECK(e.site >= 1);
    CHECK(e.site <= 7);
    for (double u : e.u) CHECK((u > 0.0 && u < 1.0));
  }
  SUBCASE("horizon extension agrees on the overlap") {
    const auto longer = EventStream(7, 8, 120.0).materialise();
    REQUIRE(longer.size() > a.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(longer[i] == a[i]);
    CHECK(longer[a.size()].time > 50.0);
  }
  SUBCASE("different seeds differ") { CHECK(EventStream(8, 8, 50.0).materialise() != a); }
  SUBCASE("single-uniform cursor matches the first uniform") {
    const EventStream s(7, 8, 50.0);
    auto cur = s.cursor(1);
    Event e;
    std::size_t i = 0;
    while (cur.next(e)) {
      CHECK(e.time == a[i].time);
      CHECK(e.u[0] == a[i].u[0]);
      CHECK(std::isnan(e.u[1]));
      ++i;
    }
    CHECK(i == a.size());
  }
}

TEST_CASE("per-site counts are Poisson") {
  const double horizon = 1e4;
  const auto ev = EventStream(1, 8, horizon).materialise();
  std::vector<double> counts(7, 0.0);
  for (const auto& e : ev) counts[e.site - 1] += 1.0;
  double chi2 = 0.0;
  for (double c : counts) {
    CHECK(std::abs(c - horizon) < 5.0 * std::sqrt(horizon));
    chi2 += (c - horizon) * (c - horizon) / horizon;
  }
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(7.0), chi2));
  CHECK(p > 0.001);
  CHECK(p < 0.999);
}

TEST_CASE("inter-arrival times are exponential") {
  const EventStream s(3, 4, 1.0);
  std::vector<double> gaps;
  for (std::uint64_t i = 0; i < 20000; ++i) gaps.push_back(s.interarrival(2, i));
  double mean = 0.0;
  for (double g : gaps) mean += g;
  mean /= gaps.size();
  CHECK(std::abs(mean - 1.0) < 4.0 / std::sqrt(20000.0));
  std::sort(gaps.begin(), gaps.end());
  double d = 0.0;
  for (std::size_t i = 0; i < gaps.size(); ++i) {
    const double f = 1.0 - std::exp(-gaps[i]);
    d = std::max({d, std::abs(f - double(i) / gaps.size()), std::abs(f - double(i + 1) / gaps.size())});
  }
  CHECK(d < 1.95 / std::sqrt(20000.0));
}

TEST_CASE("replay round trip") {
  const EventStream s(11, 6, 20.0);
  const auto ev = s.materialise();
  std::stringstream io;
  write_replay(io, ev);
  const auto back = read_replay(io);
  CHECK(back == ev);
  const auto replay = EventStream::from_events(6, 20.0, back);
  const Interface x0 = Interface::tent(6, 6.0);
  CHECK(run_single(kSos, x0, s) == run_single(kSos, x0, replay));

  std::vector<Event> bad = {{2.0, 1, {0.5, 0.5, 0.5, 0.5}}, {1.0, 1, {0.5, 0.5, 0.5, 0.5}}};
  CHECK_THROWS_AS(EventStream::from_events(6, 20.0, bad), Error);
  std::vector<Event> bad_site = {{1.0, 6, {0.5, 0.5, 0.5, 0.5}}};
  CHECK_THROWS_AS(EventStream::from_events(6, 20.0, bad_site), Error);
  std::stringstream garbage("1.0 1 0.5 x 0.5 0.5\n");
  CHECK_THROWS_AS(read_replay(garbage), Error);
}

TEST_CASE("single chain") {
  const Interface x0 = Interface::tent(8, 8.0, 0.5);
  SUBCASE("zero events") { CHECK(run_single(kGauss, x0, EventStream(1, 8, 0.0)) == x0); }
  SUBCASE("full censoring") {
    const auto scheme = CensoringScheme::sites_on({1, 2, 3, 4, 5, 6, 7}, 0.0, 100.0);
    SingleStats st;
    CHECK(run_single(kGauss, x0, EventStream(1, 8, 50.0), scheme, nullptr, &st) == x0);
    CHECK(st.events == 0);
    CHECK(st.censored == EventStream(1, 8, 50.0).materialise().size());
  }
  SUBCASE("pinning") {
    const auto x = run_single(kSos, x0, EventStream(2, 8, 30.0));
    CHECK(x[0] == 0.0);
    CHECK(x[8] == 4.0);
  }
  SUBCASE("mismatched sizes") { CHECK_THROWS_AS(run_single(kGauss, x0, EventStream(1, 6, 1.0)), Error); }
}

TEST_CASE("one update at N=2 draws from the conditional law") {
  const Interface x0({0.0, 5.0, 0.0}, 0.0);
  CounterRng rng(5);
  const int draws = 20000;
  double sum = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double u = rng.uniform();
    const auto s = EventStream::from_events(2, 1.0, {{0.5, 1, {u, 0.5, 0.5, 0.5}}});
    const double v = run_single(kGauss, x0, s)[1];
    CHECK(v == doctest::Approx(oracle::phi_inv(u) / std::sqrt(2.0)).epsilon(1e-9));
    sum += v;
  }
  CHECK(std::abs(sum / draws) < 4.0 * (1.0 / std::sqrt(2.0)) / std::sqrt(double(draws)));
}

TEST_CASE("censoring only removes censored events") {
  const Interface x0 = Interface::flat(8, 8.0);
  const EventStream s(4, 8, 40.0);
  const auto scheme = CensoringScheme::sites_on({4}, 10.0, 25.0);
  std::vector<Event> plain, cens;
  Observer a, b;
  a.on_event = [&](const Event& e, const Interface&) { plain.push_back(e); };
  b.on_event = [&](const Event& e, const Interface&) { cens.push_back(e); };
  run_single(kGauss, x0, s, {}, &a);
  run_single(kGauss, x0, s, scheme, &b);
  std::vector<Event> expected;
  for (const auto& e : plain)
    if (!(e.site == 4 && e.time >= 10.0 && e.time < 25.0)) expected.push_back(e);
  REQUIRE(cens.size() == expected.size());
  for (std::size_t i = 0; i < cens.size(); ++i) {
    CHECK(cens[i].time == expected[i].time);
    CHECK(cens[i].site == expected[i].site);
    CHECK(cens[i].u[0] == expected[i].u[0]);
  }
  CHECK(cens.size() < plain.size());

  CHECK_THROWS_AS(CensoringScheme({{0.0, 2.0, {1}}, {1.0, 3.0, {2}}}), Error);
  CHECK_THROWS_AS(CensoringScheme({{2.0, 1.0, {1}}}), Error);
  CHECK_THROWS_AS(CensoringScheme::sites_on({9}, 0.0, 1.0).validate_for(8), Error);
  const auto adjacent = CensoringScheme({{0.0, 1.0, {1}}, {1.0, 2.0, {2}}});
  CHECK(adjacent.censored(0.5, 1));
  CHECK(!adjacent.censored(1.0, 1));
  CHECK(adjacent.censored(1.0, 2));
}

TEST_CASE("observer sees the state at requested times") {
  const Interface x0 = Interface::tent(6, 3.0);
  const EventStream s(9, 6, 10.0);
  const auto ev = s.materialise();
  Observer obs;
  obs.times = {0.0, ev[3].time, 10.0};
  std::vector<Interface> seen(3);
  obs.at = [&](std::size_t i, const Interface& x) { seen[i] = x; };
  Interface x = x0;
  const auto fin = run_single(kGauss, x0, s, {}, &obs);
  CHECK(seen[0] == x0);
  for (int i = 0; i <= 3; ++i) x.at_interior(ev[i].site) = kGauss.quantile(x[ev[i].site - 1], x[ev[i].site + 1], ev[i].u[0]);
  CHECK(seen[1] == x);
  CHECK(seen[2] == fin);
}

TEST_CASE("grand coupling") {
  const int n = 12;
  CounterRng rng(17);
  for (const auto* sampler : {&kGauss, &kSos}) {
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> xs(n + 1, 0.0), ys(n + 1, 0.0), zs(n + 1, 0.0);
      double acc = 0.0;
      for (int k = 1; k < n; ++k) {
        xs[k] = xs[k - 1] + 2.0 * rng.normal();
        ys[k] = xs[k] + 5.0 * rng.uniform();
      }
      xs[n] = 0.0;
      ys[n] = 0.0;
      for (int k = 1; k <= n; ++k) {
        acc += rng.uniform();
        zs[k] = xs[k] + acc;
      }
      const Interface x(xs, 0.0), y(ys, 0.0), z(zs, zs[n] / n);
      REQUIRE(height_ordered(x, y));
      REQUIRE(gradient_ordered(x, z));
      const auto r = run_grand_coupled(*sampler, {x, y, z, x}, EventStream(100 + rep, n, 40.0));
      CHECK(r.height_pairs >= 1);
      CHECK(r.gradient_pairs >= 1);
      CHECK(height_ordered(r.finals[0], r.finals[1], kOrderTolerance));
      CHECK(gradient_ordered(r.finals[0], r.finals[2], kOrderTolerance));
      CHECK(r.finals[0] == r.finals[3]);
      CHECK(r.finals[0] == run_single(*sampler, x, EventStream(100 + rep, n, 40.0)));
    }
  }
  CHECK_THROWS_AS(run_grand_coupled(kGauss, {Interface::flat(4, 0.0), Interface::flat(6, 0.0)}, EventStream(1, 4, 1.0)),
                  Error);
}

TEST_CASE("grand coupling reports a violation with the event") {
  // A negative tolerance turns every check into a failure, which exercises
  // the reporting path without a broken sampler.
  GrandOptions opts;
  opts.tolerance = -10.0;
  const auto ev = EventStream::from_events(4, 1.0, {{0.5, 2, {0.5, 0.5, 0.5, 0.5}}});
  try {
    run_grand_coupled(kGauss, {Interface::flat(4, 0.0), Interface::flat(4, 1.0)}, ev, opts);
    FAIL("expected an order violation");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kOrderViolation);
    CHECK(std::string(e.what()).find("site=2") != std::string::npos);
  }
  opts.assertions = AssertionLevel::kOff;
  CHECK_NOTHROW(run_grand_coupled(kGauss, {Interface::flat(4, 0.0), Interface::flat(4, 1.0)}, ev, opts));
}

TEST_CASE("sticky pair") {
  SUBCASE("identical starts") {
    StickyOptions o;
    o.area_times = {0.0, 5.0, 10.0};
    const Interface x = Interface::tent(8, 4.0);
    const auto r = run_sticky_pair(kGauss, x, x, EventStream(1, 8, 10.0), o);
    CHECK(r.coalescence_time == 0.0);
    for (double a : r.area_at) CHECK(a == 0.0);
    CHECK(r.x == r.y);
  }
  SUBCASE("N=2 merges at the first update") {
    const Interface x({0.0, 4.0, 0.0}, 0.0), y({0.0, -4.0, 0.0}, 0.0);
    const EventStream s(3, 2, 10.0);
    const auto first = s.materialise().front().time;
    const auto r = run_sticky_pair(kGauss, x, y, s);
    CHECK(r.coalescence_time == first);
  }
  SUBCASE("ordered pairs stay ordered with nonnegative area, and merged pairs stay merged") {
    for (const auto* sampler : {&kGauss, &kSos}) {
      for (int rep = 0; rep < 20; ++rep) {
        StickyOptions o;
        o.record_event_area = true;
        o.assertions = AssertionLevel::kFull;
        o.switch_time = rep % 2 ? 5.0 : 0.0;
        const Interface x = Interface::flat(8, -8.0), y = Interface::flat(8, 8.0);
        const auto r = run_sticky_pair(*sampler, x, y, EventStream(rep, 8, 400.0), o);
        CHECK(r.ordered);
        for (double a : r.event_area) CHECK(a >= -1e-9);
        if (r.coalesced_by(400.0)) {
          CHECK(r.x == r.y);
          for (std::size_t i = 0; i < r.event_times.size(); ++i)
            if (r.event_times[i] >= r.coalescence_time) CHECK(r.event_area[i] == 0.0);
        }
      }
    }
  }
  SUBCASE("stopping at coalescence") {
    StickyOptions o;
    o.stop_at_coalescence = true;
    const auto r = run_sticky_pair(kGauss, Interface::flat(4, -2.0), Interface::flat(4, 2.0), EventStream(2, 4, 1e4), o);
    REQUIRE(r.coalesced_by(1e4));
    CHECK(r.x == r.y);
  }
}

TEST_CASE("coalescence fraction") {
  const Interface x({0.0, 4.0, 0.0}, 0.0), y({0.0, -4.0, 0.0}, 0.0);
  CHECK(coalescence_fraction(kGauss, x, y, 1, 100, 0.0, 0.0).value == 0.0);
  const auto one = coalescence_fraction(kGauss, x, y, 1, 1, 1.0, 0.0).value;
  CHECK((one == 0.0 || one == 1.0));
  const auto p = coalescence_fraction(kGauss, x, y, 2, 4000, 1.0, 0.0, 2);
  CHECK(std::abs(p.value - (1.0 - std::exp(-1.0))) < 4.0 * p.std_error);
}

TEST_CASE("replica results do not depend on the thread count") {
  const Interface x0 = Interface::tent(8, 8.0);
  const double times[] = {1.0, 5.0, 20.0};
  Ensemble e1{kSos, 42, 64, 1}, e3{kSos, 42, 64, 3};
  auto stat = [](const Interface& x, std::span<double> out) { out[0] = x[4]; };
  CHECK(record_ensemble(e1, x0, times, 1, stat).values == record_ensemble(e3, x0, times, 1, stat).values);
}

TEST_CASE("mean heights follow the discrete heat equation") {
  const int n = 6;
  const Interface x0({0.0, 3.0, -1.0, 4.0, 0.5, 2.0, 1.2}, 0.2);
  const double times[] = {0.5, 2.0, 6.0};
  for (const auto* sampler : {&kGauss, &kSos}) {
    const auto prof = mean_profile(Ensemble{*sampler, 8, 6000, 1}, x0, times);
    std::vector<double> h(x0.heights().begin(), x0.heights().end());
    for (std::size_t i = 0; i < 3; ++i) {
      const auto ref = heat_rk4(h, times[i]);
      for (int k = 1; k < n; ++k) CHECK(std::abs(prof.mean[i][k] - ref[k]) <= 4.5 * prof.std_error[i][k]);
    }
  }
}
