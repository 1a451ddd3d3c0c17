#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gradphi/interface.hpp"
#include "gradphi/resampler.hpp"
#include "gradphi/rng.hpp"

namespace gradphi {

enum class EquilibriumMode { kAuto, kSandwich, kGaussianExact };

std::string to_string(EquilibriumMode mode);
EquilibriumMode parse_equilibrium_mode(const std::string& s);

struct EquilibriumOptions {
  EquilibriumMode mode = EquilibriumMode::kAuto;
  // Sandwich run length; 0 picks it by doubling from log(N)/gap until the
  // pilot non-coalescence fraction is at most target_bias.
  double t_run = 0.0;
  double target_bias = 0.01;
  // Sources whose certified bias exceeds this are refused by the estimators.
  double max_bias = 0.05;
  std::size_t pilot = 64;
  int max_retries = 8;
  int max_doublings = 10;
};

struct EquilibriumCertificate {
  EquilibriumMode mode = EquilibriumMode::kGaussianExact;
  double t_run = 0.0;
  double bias_bound = 0.0;  // pilot non-coalescence fraction (0 for the exact bridge)
  double bias_std_error = 0.0;
  std::size_t pilot = 0;
  std::size_t retries = 0;
  std::size_t failures = 0;  // draws that never coalesced within the retry cap
};

struct EquilibriumBatch {
  std::vector<Interface> samples;
  EquilibriumCertificate certificate;
};

// Exact draw for V(u) = u^2/2: i.i.d. N(0,1) increments minus the bridge
// correction k S_N / N, on top of the linear profile k h.
Interface gaussian_bridge(int n, double tilt, CounterRng& rng);

// Draws `count` configurations. Sample i depends only on (seed, i).
EquilibriumBatch equilibrium_samples(const ConditionalSampler& sampler, int n, double tilt, std::uint64_t seed,
                                     std::size_t count, const EquilibriumOptions& options = {}, int threads = 1);

// Resolves kAuto and, for the sandwich, the run length and its certificate.
EquilibriumCertificate calibrate_equilibrium(const ConditionalSampler& sampler, int n, double tilt,
                                             std::uint64_t seed, const EquilibriumOptions& options, int threads = 1);

// One draw under a calibrated certificate; retries are counted into `retries`.
Interface equilibrium_draw(const ConditionalSampler& sampler, int n, double tilt, std::uint64_t seed,
                           const EquilibriumCertificate& certificate, int max_retries, std::size_t* retries = nullptr,
                           bool* failed = nullptr);

}  // namespace gradphi
