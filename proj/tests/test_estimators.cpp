#include <doctest.h>

#include <cmath>

#include "gradphi/equilibrium.hpp"
#include "gradphi/error.hpp"
#include "gradphi/estimators.hpp"
#include "gradphi/observables.hpp"
#include "gradphi/stats.hpp"
#include "oracles.hpp"

using namespace gradphi;

namespace {
const ConditionalSampler kGauss{Potential::gaussian()};
const ConditionalSampler kSos{Potential::sos()};

double variance_at(const std::vector<Interface>& s, int k) {
  std::vector<double> v;
  for (const auto& x : s) v.push_back(x[k] - k * x.tilt());
  return moments(v).variance;
}
}  // namespace

TEST_CASE("gaussian bridge law") {
  EquilibriumOptions eq;
  eq.mode = EquilibriumMode::kGaussianExact;
  const auto b = equilibrium_samples(kGauss, 16, 0.5, 3, 20000, eq);
  CHECK(b.certificate.mode == EquilibriumMode::kGaussianExact);
  CHECK(b.certificate.bias_bound == 0.0);
  for (const auto& x : b.samples) {
    CHECK(x[0] == 0.0);
    CHECK(x[16] == 8.0);
  }
  CHECK(std::abs(variance_at(b.samples, 8) - oracle::bridge_cov(8, 8, 16)) < 0.05 * 4.0);
  std::vector<double> a4, a12;
  for (const auto& x : b.samples) {
    a4.push_back(x[4] - 2.0);
    a12.push_back(x[12] - 6.0);
  }
  const double cov = covariance(a4, a12);
  CHECK(std::abs(cov - oracle::bridge_cov(4, 12, 16)) < 0.05);
  CHECK(std::abs(moments(a4).mean) < 4.0 * std::sqrt(3.0 / 20000.0));
  CHECK_THROWS_AS(equilibrium_samples(kSos, 8, 0.0, 1, 10, eq), Error);
}

TEST_CASE("sample i depends only on the seed and its index") {
  EquilibriumOptions eq;
  eq.mode = EquilibriumMode::kSandwich;
  eq.t_run = 200.0;
  const auto a = equilibrium_samples(kSos, 6, 0.0, 9, 6, eq, 1);
  const auto b = equilibrium_samples(kSos, 6, 0.0, 9, 12, eq, 3);
  for (std::size_t i = 0; i < 6; ++i) CHECK(a.samples[i] == b.samples[i]);
}

TEST_CASE("sandwich sampler agrees with the exact bridge") {
  EquilibriumOptions sw;
  sw.mode = EquilibriumMode::kSandwich;
  const auto s = equilibrium_samples(kGauss, 8, 0.0, 4, 3000, sw);
  CHECK(s.certificate.mode == EquilibriumMode::kSandwich);
  CHECK(s.certificate.bias_bound <= sw.target_bias);
  CHECK(s.certificate.t_run > 0.0);
  EquilibriumOptions ex;
  ex.mode = EquilibriumMode::kGaussianExact;
  const auto e = equilibrium_samples(kGauss, 8, 0.0, 5, 3000, ex);
  std::vector<double> a, b;
  for (const auto& x : s.samples) a.push_back(x[4]);
  for (const auto& x : e.samples) b.push_back(x[4]);
  CHECK(ks_two_sample(a, b).p_value > 1e-3);
  CHECK(std::abs(variance_at(s.samples, 4) - 2.0) < 0.15 * 2.0);
}

TEST_CASE("equilibrium mode names") {
  for (auto m : {EquilibriumMode::kAuto, EquilibriumMode::kSandwich, EquilibriumMode::kGaussianExact})
    CHECK(parse_equilibrium_mode(to_string(m)) == m);
  CHECK_THROWS_AS(parse_equilibrium_mode("exactish"), Error);
}

TEST_CASE("gap from decay") {
  const auto g = gap_from_decay(Ensemble{kGauss, 1, 3000, 1}, Interface::tent(4, 4.0), 3.0 / spectral_gap(4));
  CHECK(g.theory == doctest::Approx(spectral_gap(4)));
  CHECK(std::abs(g.estimate.value - g.theory) < 4.0 * g.estimate.std_error);
  CHECK(g.fit_points >= 3);
  CHECK(g.estimate.method == "gap_from_decay");
  CHECK(!g.estimate.digest.empty());
  CHECK_THROWS_AS(gap_from_decay(Ensemble{kGauss, 1, 100, 1}, Interface::tent(4, 4.0), 1.0), Error);
}

TEST_CASE("eigen decay is exact in expectation") {
  const Interface x0 = Interface::mode(8, 1, 10.0);
  const double times[] = {1.0, 5.0, 10.0, 20.0, 40.0};
  for (const auto& p : fourier_decay(Ensemble{kSos, 2, 4000, 1}, x0, times)) {
    CHECK(p.theory == doctest::Approx(40.0 * std::exp(-spectral_gap(8) * p.t)));
    CHECK(std::abs(p.mean - p.theory) <= 4.0 * p.std_error);
  }
}

TEST_CASE("wilson lower curve") {
  const double times[] = {0.0, 5.0, 20.0, 60.0, 200.0};
  EquilibriumOptions eq;
  eq.mode = EquilibriumMode::kGaussianExact;
  const auto c = wilson_lower_curve(Ensemble{kGauss, 5, 1000, 1}, 8, 0.0, times, 2000, eq);
  REQUIRE(c.points.size() == 5);
  CHECK(c.points.front().bound > 0.5);
  CHECK(c.points.front().bound > c.points.back().bound);
  for (const auto& p : c.points) {
    CHECK(p.bound >= 0.0);
    CHECK(p.bound <= 1.0);
  }
  CHECK(c.points.back().bound < 0.2);
  CHECK(c.v_pi > 0.0);
}

TEST_CASE("upper curve at N=2 is the no-update probability") {
  const double times[] = {0.5, 1.0, 2.0};
  const Interface x0({0.0, 3.0, 0.0}, 0.0);
  const auto u = tv_upper_curve(Ensemble{kGauss, 3, 4000, 1}, x0, times);
  for (const auto& p : u.points) CHECK(std::abs(p.upper - std::exp(-p.t)) <= 4.0 * p.std_error);
  SwitchRule fixed;
  fixed.kind = SwitchRule::Kind::kFixed;
  fixed.fixed = 0.0;
  const auto f = tv_upper_curve(Ensemble{kGauss, 3, 4000, 1}, x0, times, fixed);
  for (const auto& p : f.points) CHECK(std::abs(p.upper - std::exp(-p.t)) <= 4.0 * p.std_error);
}

TEST_CASE("geometric grid") {
  const auto g = geometric_grid(1.0, 100.0, 12);
  CHECK(g.front() == doctest::Approx(1.0));
  CHECK(g.back() == doctest::Approx(100.0));
  CHECK(g.size() == 25);
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(10.0, 1.0 / 12)));
}

TEST_CASE("cutoff rows") {
  MixingStudy s;
  s.n = 16;
  MixingBracket b;
  b.epsilon = 0.25;
  b.t_lo = 50.0;
  b.t_hi = 200.0;
  b.lo_found = b.hi_found = true;
  s.brackets = {b};
  const auto rows = cutoff_rows(s);
  REQUIRE(rows.size() == 1);
  const double scale = std::numbers::pi * std::numbers::pi / (256.0 * std::log(16.0));
  CHECK(rows[0].t_mid == doctest::Approx(100.0));
  CHECK(rows[0].ratio == doctest::Approx(100.0 * scale));
  CHECK(rows[0].ratio_low == doctest::Approx(50.0 * scale));
  CHECK(rows[0].ratio_high == doctest::Approx(200.0 * scale));
  CHECK(rows[0].width_ratio == doctest::Approx(4.0));
}

TEST_CASE("fkg covariance") {
  EquilibriumOptions eq;
  eq.mode = EquilibriumMode::kGaussianExact;
  const auto r = fkg_test(Ensemble{kGauss, 6, 20000, 1}, 8, 0.0, {{coordinate_statistic(2), coordinate_statistic(6)}}, eq);
  REQUIRE(r.pairs.size() == 1);
  CHECK(r.passed());
  CHECK(std::abs(r.pairs[0].covariance - oracle::bridge_cov(2, 6, 8)) < 4.0 * r.pairs[0].std_error);
  Statistic decreasing{"-x4", [](const Interface& x) { return -x[4]; }};
  CHECK_THROWS_AS(fkg_test(Ensemble{kGauss, 6, 100, 1}, 8, 0.0, {{decreasing, coordinate_statistic(2)}}, eq), Error);
}

TEST_CASE("equilibrium tails") {
  EquilibriumOptions eq;
  eq.mode = EquilibriumMode::kGaussianExact;
  const auto r = equilibrium_tail_check(Ensemble{kGauss, 7, 4000, 1}, 64, 0.0, {0, 2, 4, 8}, eq);
  CHECK(r.rows[0].height == 1.0);
  CHECK(r.rows[0].gradient == 1.0);
  CHECK(r.rows[3].height <= r.rows[2].height / 4.0);
  CHECK(r.geometric);
}

TEST_CASE("contraction of the coupled distance") {
  EquilibriumOptions eq;
  eq.mode = EquilibriumMode::kGaussianExact;
  const Ensemble ens{kGauss, 8, 1000, 1};
  const Interface wedge = Interface::tent(8, 8.0);
  const auto r0 = b_nu_contraction_check(ens, wedge, 0.0, eq);
  CHECK(r0.ratio == doctest::Approx(1.0));
  const auto r = b_nu_contraction_check(ens, wedge, 2.0 / spectral_gap(8), eq);
  CHECK(r.bound == doctest::Approx(std::exp(-2.0)));
  CHECK(r.passed());
}

TEST_CASE("censoring never speeds up the flat start") {
  EquilibriumOptions eq;
  eq.mode = EquilibriumMode::kGaussianExact;
  const int n = 8;
  const double t = 0.5 * std::log(double(n)) / spectral_gap(n);
  const auto r = censoring_compare(Ensemble{kGauss, 9, 2000, 1}, Interface::flat(n, n),
                                   CensoringScheme::sites_on({n / 2}, 0.0, t), t, eq);
  CHECK(r.passed());
  CHECK(r.censored_events > 0);
  CHECK(r.initial == doctest::Approx(1.0));
}

TEST_CASE("digest") {
  CHECK(make_digest("m", 1, "a") == make_digest("m", 1, "a"));
  CHECK(make_digest("m", 1, "a") != make_digest("m", 2, "a"));
  CHECK(make_digest("m", 1, "a") != make_digest("m", 1, "b"));
}
