#include "gradphi/equilibrium.hpp"

#include <fmt/format.h>

#include <cmath>

#include "gradphi/dynamics.hpp"
#include "gradphi/error.hpp"
#include "gradphi/observables.hpp"
#include "gradphi/parallel.hpp"

namespace gradphi {

std::string to_string(EquilibriumMode mode) {
  switch (mode) {
    case EquilibriumMode::kAuto:
      return "auto";
    case EquilibriumMode::kSandwich:
      return "sandwich";
    case EquilibriumMode::kGaussianExact:
      return "gaussian_exact";
  }
  return "auto";
}

EquilibriumMode parse_equilibrium_mode(const std::string& s) {
  if (s == "auto") return EquilibriumMode::kAuto;
  if (s == "sandwich") return EquilibriumMode::kSandwich;
  if (s == "gaussian_exact") return EquilibriumMode::kGaussianExact;
  fail(ErrorCode::kConfig, fmt::format("unknown equilibrium mode '{}' (auto, sandwich, gaussian_exact)", s));
}

Interface gaussian_bridge(int n, double tilt, CounterRng& rng) {
  if (n < 2) fail(ErrorCode::kInvalidArgument, fmt::format("bridge needs N >= 2, got {}", n));
  std::vector<double> s(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 1; k <= n; ++k) s[static_cast<std::size_t>(k)] = s[static_cast<std::size_t>(k) - 1] + rng.normal();
  const double total = s.back();
  for (int k = 0; k <= n; ++k)
    s[static_cast<std::size_t>(k)] += k * tilt - static_cast<double>(k) / n * total;
  s.front() = 0.0;
  s.back() = tilt * n;
  return Interface(std::move(s), tilt);
}

namespace {

StickyResult sandwich_run(const ConditionalSampler& sampler, int n, double tilt, std::uint64_t seed, double t_run) {
  const EventStream ev(seed, n, t_run);
  StickyOptions o;
  o.switch_time = 0.5 * t_run;
  o.assertions = AssertionLevel::kOff;
  return run_sticky_pair(sampler, Interface::flat(n, -n, tilt), Interface::flat(n, n, tilt), ev, o);
}

double pilot_failure(const ConditionalSampler& sampler, int n, double tilt, std::uint64_t seed, double t_run,
                     std::size_t pilot, int threads) {
  std::vector<char> miss(pilot, 0);
  parallel_for(pilot, threads, [&](std::size_t i) {
    miss[i] = !sandwich_run(sampler, n, tilt, derive_seed(seed, "pilot", i), t_run).coalesced_by(t_run);
  });
  std::size_t m = 0;
  for (char c : miss) m += static_cast<std::size_t>(c);
  return static_cast<double>(m) / static_cast<double>(pilot);
}

}  // namespace

EquilibriumCertificate calibrate_equilibrium(const ConditionalSampler& sampler, int n, double tilt,
                                             std::uint64_t seed, const EquilibriumOptions& options, int threads) {
  EquilibriumCertificate cert;
  EquilibriumMode mode = options.mode;
  const bool gaussian = sampler.potential().closed_form() == ClosedForm::kGaussian;
  if (mode == EquilibriumMode::kAuto) mode = gaussian ? EquilibriumMode::kGaussianExact : EquilibriumMode::kSandwich;
  if (mode == EquilibriumMode::kGaussianExact && !gaussian)
    fail(ErrorCode::kInvalidArgument,
         fmt::format("gaussian_exact equilibrium requires the gaussian potential, got {}", sampler.potential().name()));
  cert.mode = mode;
  if (mode == EquilibriumMode::kGaussianExact) return cert;
  if (options.pilot < 1) fail(ErrorCode::kInvalidArgument, "sandwich calibration needs a pilot of at least 1 run");

  cert.pilot = options.pilot;
  const std::uint64_t pilot_seed = derive_seed(seed, "sandwich-pilot", 0);
  double t = options.t_run > 0.0 ? options.t_run : std::log(static_cast<double>(n)) / spectral_gap(n);
  double frac = pilot_failure(sampler, n, tilt, pilot_seed, t, options.pilot, threads);
  for (int d = 0; options.t_run <= 0.0 && frac > options.target_bias && d < options.max_doublings; ++d) {
    t *= 2.0;
    frac = pilot_failure(sampler, n, tilt, pilot_seed, t, options.pilot, threads);
  }
  cert.t_run = t;
  cert.bias_bound = frac;
  cert.bias_std_error = std::sqrt(std::max(frac * (1.0 - frac), 1.0 / static_cast<double>(options.pilot)) /
                                  static_cast<double>(options.pilot));
  return cert;
}

Interface equilibrium_draw(const ConditionalSampler& sampler, int n, double tilt, std::uint64_t seed,
                           const EquilibriumCertificate& cert, int max_retries, std::size_t* retries, bool* failed) {
  if (failed) *failed = false;
  if (cert.mode == EquilibriumMode::kGaussianExact) {
    CounterRng rng(derive_seed(seed, "bridge", 0));
    return gaussian_bridge(n, tilt, rng);
  }
  StickyResult r;
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    r = sandwich_run(sampler, n, tilt, derive_seed(seed, "sandwich", static_cast<std::uint64_t>(attempt)), cert.t_run);
    if (r.coalesced_by(cert.t_run)) return r.x;
    if (retries) ++*retries;
  }
  if (failed) *failed = true;
  return r.x;
}

EquilibriumBatch equilibrium_samples(const ConditionalSampler& sampler, int n, double tilt, std::uint64_t seed,
                                     std::size_t count, const EquilibriumOptions& options, int threads) {
  EquilibriumBatch batch;
  batch.certificate = calibrate_equilibrium(sampler, n, tilt, seed, options, threads);
  batch.samples.resize(count);
  std::vector<std::size_t> retries(count, 0);
  std::vector<char> failed(count, 0);
  parallel_for(count, threads, [&](std::size_t i) {
    bool f = false;
    batch.samples[i] = equilibrium_draw(sampler, n, tilt, derive_seed(seed, "equilibrium", i), batch.certificate,
                                        options.max_retries, &retries[i], &f);
    failed[i] = f;
  });
  for (std::size_t i = 0; i < count; ++i) {
    batch.certificate.retries += retries[i];
    batch.certificate.failures += static_cast<std::size_t>(failed[i]);
  }
  return batch;
}

}  // namespace gradphi
