#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gradphi/error.hpp"
#include "gradphi/observables.hpp"
#include "gradphi/stats.hpp"
#include "gradphi/rng.hpp"
#include "oracles.hpp"

using namespace gradphi;

TEST_CASE("fourier statistic") {
  CHECK(fourier_stat(std::vector<double>(9, 0.0)) == 0.0);
  CHECK(fourier_stat(std::vector<double>{0, 1, 1, 1, 0}) == doctest::Approx(1.0 + std::numbers::sqrt2).epsilon(1e-14));
  for (int n : {5, 8, 13})
    for (int j = 1; j < n; ++j) {
      std::vector<double> x(n + 1, 0.0);
      for (int k = 1; k < n; ++k) x[k] = std::sin(j * std::numbers::pi * k / n);
      CHECK(fourier_stat(x, j) == doctest::Approx(n / 2.0).epsilon(1e-12));
      if (j + 1 < n) CHECK(std::abs(fourier_stat(x, j + 1)) < 1e-12);
    }
  CHECK_THROWS_AS(fourier_stat(std::vector<double>(5, 0.0), 0), Error);
  CHECK_THROWS_AS(fourier_stat(std::vector<double>(5, 0.0), 4), Error);
  const Interface tilted = Interface::mode(8, 1, 3.0, 1.5);
  CHECK(fourier_stat(tilted.gauged()) == doctest::Approx(3.0 * 4.0).epsilon(1e-12));
}

TEST_CASE("spectral gap") {
  CHECK(spectral_gap(2) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(spectral_gap(4) == doctest::Approx(1.0 - std::numbers::sqrt2 / 2.0).epsilon(1e-14));
  const double taylor = std::numbers::pi * std::numbers::pi / 2e6;
  CHECK(std::abs(spectral_gap(1000) - taylor) / taylor < 1e-3);
  for (int n : {3, 16, 1000, 100000}) CHECK(spectral_gap(n) == doctest::Approx(1.0 - std::cos(std::numbers::pi / n)).epsilon(1e-9));
  CHECK_THROWS_AS(spectral_gap(1), Error);
}

TEST_CASE("spectral profile") {
  for (int n : {2, 7, 16}) {
    const SpectralProfile p(n);
    CHECK(p.eigenvalue(0) == 0.0);
    for (int j = 1; j < n; ++j) {
      CHECK(p.eigenvalue(j) > p.eigenvalue(j - 1));
      CHECK(p.eigenvalue(j) == doctest::Approx(1.0 - std::cos(j * std::numbers::pi / n)).epsilon(1e-13));
    }
    for (int i = 1; i < n; ++i)
      for (int j = 1; j < n; ++j) {
        double s = 0.0;
        for (int k = 1; k < n; ++k) s += p.basis(i, k) * p.basis(j, k);
        CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-12);
      }
  }
}

TEST_CASE("heat mean solution") {
  const Interface x0({0.0, 2.0, -3.0, 5.0, 1.0, 0.0, 4.0, 2.5, 3.2}, 0.4);
  const auto at0 = heat_mean_solution(x0, 0.0);
  for (int k = 0; k <= 8; ++k) CHECK(at0[k] == doctest::Approx(x0[k]).epsilon(1e-12).scale(1.0));

  const Interface m = Interface::mode(8, 1, 1.0);
  for (double t : {0.3, 4.0, 50.0}) {
    const auto v = heat_mean_solution(m, t);
    for (int k = 1; k < 8; ++k)
      CHECK(v[k] == doctest::Approx(std::sin(std::numbers::pi * k / 8) * std::exp(-spectral_gap(8) * t)).epsilon(1e-12).scale(1.0));
  }

  double norm = 0.0;
  for (double h : x0.heights()) norm = std::max(norm, std::abs(h));
  const auto late = heat_mean_solution(x0, 1e6 / spectral_gap(8));
  for (int k = 0; k <= 8; ++k) CHECK(std::abs(late[k] - k * 0.4) <= 1e-6 * norm);

  // Semigroup: P_s P_t = P_{s+t}.
  const auto a = heat_mean_solution(x0, 1.7);
  const auto b = heat_mean_solution(Interface(a, 0.4), 2.3);
  const auto c = heat_mean_solution(x0, 4.0);
  for (int k = 0; k <= 8; ++k) CHECK(b[k] == doctest::Approx(c[k]).epsilon(1e-12).scale(1.0));

  // Generator check: d/dt v_k = (1/2)(v_{k-1} - 2 v_k + v_{k+1}).
  const double h = 1e-5;
  const auto vp = heat_mean_solution(x0, 1.0 + h), vm = heat_mean_solution(x0, 1.0 - h), v = heat_mean_solution(x0, 1.0);
  for (int k = 1; k < 8; ++k) CHECK((vp[k] - vm[k]) / (2 * h) == doctest::Approx(0.5 * (v[k - 1] - 2 * v[k] + v[k + 1])).epsilon(1e-6));
  CHECK_THROWS_AS(heat_mean_solution(x0, -1.0), Error);
}

TEST_CASE("area and sup norms") {
  const Interface x = Interface::tent(6, 3.0);
  CHECK(area_between(x, x) == 0.0);
  for (int n : {2, 5, 16}) CHECK(area_between(Interface::flat(n, n), Interface::flat(n, -n)) == 2.0 * n * (n - 1));
  CHECK_THROWS_AS(area_between(Interface::flat(4, 0.0), Interface::flat(5, 0.0)), Error);
  CHECK(sup_gradient(Interface::flat(7, 7.0)) == 7.0);
  CHECK(sup_height(Interface::flat(7, -3.0)) == 3.0);
  CHECK(sup_gradient(Interface::flat(4, 0.0, 0.5)) == 0.5);
}

TEST_CASE("interface validation and orders") {
  CHECK_THROWS_AS(Interface({0.0, 1.0}, 0.0), Error);
  CHECK_THROWS_AS(Interface({0.1, 1.0, 0.0}, 0.0), Error);
  CHECK_THROWS_AS(Interface({0.0, 1.0, 0.0}, 1.0), Error);
  CHECK_THROWS_AS(Interface({0.0, NAN, 0.0}, 0.0), Error);
  const Interface t = Interface::tent(8, 4.0, 0.25);
  CHECK(t[4] == doctest::Approx(4.0 + 1.0));
  CHECK(t[8] == 2.0);
  CHECK(height_ordered(Interface::flat(5, -1.0), Interface::flat(5, 1.0)));
  CHECK(!height_ordered(Interface::flat(5, 1.0), Interface::flat(5, -1.0)));
  CHECK(gradient_ordered(Interface::flat(5, 0.0, 0.0), Interface::flat(5, 0.0, 1.0)));
  CHECK(!gradient_ordered(Interface::flat(5, -1.0), Interface::flat(5, 1.0)));
}

TEST_CASE("statistics helpers") {
  const std::vector<double> v = {1.0, 2.0, 3.0, 4.0};
  const auto m = moments(v);
  CHECK(m.mean == 2.5);
  CHECK(m.variance == doctest::Approx(5.0 / 3.0));
  CHECK(m.std_error() == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  CHECK(covariance(v, v) == doctest::Approx(5.0 / 3.0));
  CHECK(quantile_sorted(v, 0.5) == doctest::Approx(2.5));

  CounterRng rng(3);
  std::vector<double> u(5000), w(5000), z(5000);
  for (auto& x : u) x = rng.uniform();
  for (auto& x : w) x = rng.uniform();
  for (auto& x : z) x = rng.uniform() * 0.8;
  CHECK(ks_one_sample(u, [](double x) { return std::clamp(x, 0.0, 1.0); }).p_value > 1e-3);
  CHECK(ks_two_sample(u, w).p_value > 1e-3);
  CHECK(ks_two_sample(u, z).p_value < 1e-6);

  std::vector<double> counts = {100, 95, 108, 97, 103};
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - 100.0) * (c - 100.0) / 100.0;
  CHECK(poisson_dispersion_test(counts, 100.0).statistic == doctest::Approx(chi2));

  // Jackknife of the mean over single-replica blocks is the classical error.
  std::vector<double> data(200);
  for (auto& x : data) x = rng.normal();
  const double jk = jackknife_stderr(data.size(), data.size(), [&](const std::vector<std::size_t>& keep) {
    double s = 0.0;
    for (auto i : keep) s += data[i];
    return s / keep.size();
  });
  CHECK(jk == doctest::Approx(moments(data).std_error()).epsilon(1e-9));
}

TEST_CASE("projected total variation") {
  CounterRng rng(11);
  std::vector<double> a(100000), b(100000);
  for (auto& x : a) x = rng.normal();
  for (auto& x : b) x = 2.0 + rng.normal();
  const auto shifted = projected_tv(a, b, 1);
  CHECK(std::abs(shifted.value - (2.0 * oracle::phi(1.0) - 1.0)) < 0.01);
  CHECK(shifted.std_error > 0.0);
  CHECK(projected_tv(a, a, 1).value == 0.0);
  std::vector<double> far(b);
  for (auto& x : far) x += 100.0;
  CHECK(projected_tv(a, far, 1).value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(projected_tv(std::vector<double>(10, 0.0), b, 1), Error);

  // Data processing: a coarser function of the statistic cannot increase TV.
  std::vector<double> ca(a), cb(b);
  for (auto& x : ca) x = std::floor(x);
  for (auto& x : cb) x = std::floor(x);
  const auto coarse = projected_tv(ca, cb, 1);
  CHECK(coarse.value <= shifted.value + 3.0 * std::hypot(coarse.std_error, shifted.std_error));
}
