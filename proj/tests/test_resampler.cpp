#include <doctest.h>

#include <cmath>
#include <numbers>

#include "gradphi/error.hpp"
#include "gradphi/resampler.hpp"
#include "gradphi/rng.hpp"
#include "oracles.hpp"

using namespace gradphi;

namespace {

const double kSd = 1.0 / std::numbers::sqrt2;

oracle::GridDensity brute(const Potential& pot, double b, double c) {
  const double lo = std::min(b, c) - 40, hi = std::max(b, c) + 40;
  return oracle::GridDensity([&](double u) { return std::exp(-(pot(u - b) + pot(c - u) - pot(0.5 * (c - b)) * 2)); }, lo,
                             hi, 400'000);
}

}  // namespace

TEST_CASE("gaussian tabulated density matches the normal law") {
  const auto d = TabulatedDensity::build(Potential::gaussian(), 0.0, 2.0);
  CHECK(d.center() == 1.0);
  CHECK(d.norm() == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-10));
  double worst = 0;
  const auto grid = d.grid();
  for (double x : grid) {
    const double ref = std::exp(-(x - 1) * (x - 1)) / std::sqrt(std::numbers::pi);
    worst = std::max(worst, std::abs(d.pdf(x) - ref));
  }
  CHECK(worst < 1e-9);
  CHECK(d.quantile(0.5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(d.quantile(0.841345) == doctest::Approx(1 + kSd * oracle::phi_inv(0.841345)).epsilon(1e-9));
  const auto cdf = d.cdf();
  CHECK(std::abs(cdf.front()) < 1e-12);
  CHECK(std::abs(cdf.back() - 1) < 1e-12);
  for (std::size_t i = 1; i < cdf.size(); ++i) CHECK(cdf[i] >= cdf[i - 1]);
}

TEST_CASE("sos tabulated density is flat on the gap") {
  const auto d = TabulatedDensity::build(Potential::sos(), 0.0, 6.0);
  CHECK(d.norm() == doctest::Approx(7.0).epsilon(1e-10));
  for (double x : {0.1, 1.0, 3.0, 5.9}) CHECK(d.pdf(x) == doctest::Approx(1.0 / 7.0).epsilon(1e-10));
  CHECK(d.pdf(7.0) / d.pdf(6.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-9));
  CHECK(d.pdf(-1.5) / d.pdf(0.0) == doctest::Approx(std::exp(-3.0)).epsilon(1e-9));
}

TEST_CASE("inverse cdf against brute force") {
  for (const auto& pot : {Potential::power(1.5), Potential::sos(), Potential::power(4.0)}) {
    for (auto bc : {std::pair{0.0, 0.0}, std::pair{-1.0, 2.5}, std::pair{3.0, -4.0}}) {
      const auto d = TabulatedDensity::build(pot, bc.first, bc.second);
      const auto ref = brute(pot, bc.first, bc.second);
      for (int i = 1; i < 100; ++i) {
        const double p = i / 100.0;
        const double q = d.quantile(p);
        CHECK(d.cdf_at(q) == doctest::Approx(p).epsilon(1e-8));
        CHECK(q == doctest::Approx(ref.quantile(p)).epsilon(1e-5));
      }
      CHECK(d.quantile(0.5) == doctest::Approx(0.5 * (bc.first + bc.second)).epsilon(1e-12));
    }
  }
}

TEST_CASE("analytic paths agree with tabulation") {
  for (const auto& pot : {Potential::gaussian(), Potential::sos()}) {
    ConditionalSampler fast(pot), slow(pot, SamplerOptions{kDefaultTailTol, true});
    CHECK(fast.path() != ConditionalSampler::Path::kTabulated);
    CHECK(slow.path() == ConditionalSampler::Path::kTabulated);
    CounterRng rng(5);
    for (int i = 0; i < 200; ++i) {
      const double b = rng.normal() * 3, c = rng.normal() * 3, p = rng.uniform();
      CHECK(fast.quantile(b, c, p) == doctest::Approx(slow.quantile(b, c, p)).epsilon(1e-9).scale(1));
      const double by = b + rng.normal(), cy = c + rng.normal();
      CHECK(fast.overlap(b, c, by, cy) == doctest::Approx(slow.overlap(b, c, by, cy)).epsilon(1e-8).scale(1));
    }
  }
}

TEST_CASE("quantile examples and monotonicity") {
  ConditionalSampler g(Potential::gaussian());
  CHECK(g.quantile(1.0, 1.0, 0.3) - g.quantile(0.0, 0.0, 0.3) == doctest::Approx(1.0).epsilon(1e-12));
  const auto m = gaussian_oracle(Potential::gaussian(), -3, 5);
  CHECK(m.mean == 1.0);
  CHECK(m.sd == doctest::Approx(0.7071068).epsilon(1e-7));
  CHECK_THROWS_AS(gaussian_oracle(Potential::sos(), 0, 0), Error);
  for (const auto& pot : {Potential::gaussian(), Potential::sos(), Potential::power(1.5)}) {
    ConditionalSampler s(pot);
    CounterRng rng(9);
    int height_bad = 0, gradient_bad = 0;
    for (int i = 0; i < 1000; ++i) {
      const double b = rng.normal() * 3, c = rng.normal() * 3, p = rng.uniform();
      const double b2 = b + std::abs(rng.normal()), c2 = c + std::abs(rng.normal());
      height_bad += s.quantile(b, c, p) > s.quantile(b2, c2, p) + 1e-9;
      // c-b <= c'-b': quantiles measured from b are ordered
      const double b3 = b + rng.normal(), c3 = b3 + (c - b) + std::abs(rng.normal());
      gradient_bad += s.quantile(b, c, p) - b > s.quantile(b3, c3, p) - b3 + 1e-9;
    }
    CHECK(height_bad == 0);
    CHECK(gradient_bad == 0);
  }
}

TEST_CASE("gaussian sampling mean") {
  ConditionalSampler g(Potential::gaussian());
  CounterRng rng(21);
  double s = 0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) s += g.quantile(0.0, 2.0, rng.uniform());
  CHECK(std::abs(s / n - 1.0) < 3 * kSd / std::sqrt(double(n)));
}

TEST_CASE("overlap decomposition") {
  const auto pot = Potential::power(1.5);
  const auto a = TabulatedDensity::build(pot, 0.0, 1.0);
  const auto same = overlap_decompose(a, a);
  CHECK(same.p() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(same.first_degenerate());

  for (double shift : {0.1, 1.0, 3.0}) {
    const auto ga = TabulatedDensity::build(Potential::gaussian(), -1.0, 1.0);
    const auto gb = TabulatedDensity::build(Potential::gaussian(), -1.0 + shift, 1.0 + shift);
    const auto ov = overlap_decompose(ga, gb);
    CHECK(ov.p() == doctest::Approx(2 * oracle::phi(-shift / (2 * kSd))).epsilon(1e-6));
    CHECK(normal_overlap(0.0, shift, kSd) == doctest::Approx(2 * oracle::phi(-shift / (2 * kSd))).epsilon(1e-14));
  }

  const auto b = TabulatedDensity::build(pot, 0.5, 2.0);
  const auto ov = overlap_decompose(a, b);
  CHECK(ov.p() + ov.first_mass() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(ov.p() + ov.third_mass() == doctest::Approx(1.0).epsilon(1e-9));
  double worst = 0;
  for (double x : ov.nodes()) {
    const auto parts = ov.parts_at(x);
    worst = std::max(worst, std::abs(parts[0] + parts[1] - a.pdf(x)));
    worst = std::max(worst, std::abs(parts[2] + parts[1] - b.pdf(x)));
  }
  CHECK(worst < 1e-12);
  const auto ref_a = brute(pot, 0.0, 1.0), ref_b = brute(pot, 0.5, 2.0);
  const double ref_p = oracle::trapezoid(
      [&](double x) {
        const double h = 1e-4;
        return std::min((ref_a.cdf_at(x + h) - ref_a.cdf_at(x - h)), (ref_b.cdf_at(x + h) - ref_b.cdf_at(x - h))) / (2 * h);
      },
      -30, 30, 600'000);
  CHECK(ov.p() == doctest::Approx(ref_p).epsilon(1e-4));
  // ordered neighbours: nu1 lives left of nu3
  CHECK(ov.sample_first(0.999) <= ov.sample_third(0.001) + 1e-9);

  const auto far1 = TabulatedDensity::build(Potential::gaussian(), -100.0, -100.0);
  const auto far2 = TabulatedDensity::build(Potential::gaussian(), 100.0, 100.0);
  const auto disjoint = overlap_decompose(far1, far2);
  CHECK(disjoint.p() < 1e-12);
  CHECK(disjoint.common_degenerate());
}

TEST_CASE("sticky draws reproduce the marginals") {
  for (const auto& pot : {Potential::gaussian(), Potential::sos(), Potential::power(1.5)}) {
    ConditionalSampler s(pot);
    const double bx = 0.0, cx = 1.0, by = 0.7, cy = 2.2;
    const int n = pot.closed_form() == ClosedForm::kPower ? 4000 : 40000;
    CounterRng rng(33);
    std::vector<double> xs, ys;
    int coupled = 0;
    for (int i = 0; i < n; ++i) {
      const auto d = s.sticky(bx, cx, by, cy, {rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform()});
      xs.push_back(d.x);
      ys.push_back(d.y);
      coupled += d.coupled;
      if (d.coupled) CHECK(d.x == d.y);
    }
    const double p = s.overlap(bx, cx, by, cy);
    CHECK(std::abs(coupled / double(n) - p) < 4 * std::sqrt(p * (1 - p) / n));
    // KS distance of each marginal against the brute-force law
    const auto ra = brute(pot, bx, cx), rb = brute(pot, by, cy);
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double dx = 0, dy = 0;
    for (int i = 0; i < n; ++i) {
      dx = std::max({dx, std::abs(ra.cdf_at(xs[i]) - double(i) / n), std::abs(ra.cdf_at(xs[i]) - double(i + 1) / n)});
      dy = std::max({dy, std::abs(rb.cdf_at(ys[i]) - double(i) / n), std::abs(rb.cdf_at(ys[i]) - double(i + 1) / n)});
    }
    // 1.95 / sqrt(n) is the 0.1% critical value
    CHECK(dx < 1.95 / std::sqrt(double(n)));
    CHECK(dy < 1.95 / std::sqrt(double(n)));
  }
  ConditionalSampler g(Potential::gaussian());
  const auto same = g.sticky(1.0, 2.0, 1.0, 2.0, {0.9, 0.1, 0.3, 0.7});
  CHECK(same.coupled);
  CHECK(same.p == 1.0);
}
