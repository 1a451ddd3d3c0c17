#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "gradphi/events.hpp"
#include "gradphi/interface.hpp"
#include "gradphi/observables.hpp"
#include "gradphi/resampler.hpp"

namespace gradphi {

inline constexpr double kOrderTolerance = 1e-9;

// Called with (index into times, state at that time). State is constant
// between events, so the value at t includes every event with time <= t.
struct Observer {
  std::vector<double> times;
  std::function<void(std::size_t, const Interface&)> at;
  // Optional: called after every applied event.
  std::function<void(const Event&, const Interface&)> on_event;
};

struct SingleStats {
  std::size_t events = 0;
  std::size_t censored = 0;
};

Interface run_single(const ConditionalSampler& sampler, Interface x0, const EventStream& events,
                     const CensoringScheme& censor = {}, const Observer* observer = nullptr,
                     SingleStats* stats = nullptr);

enum class AssertionLevel { kOff, kSampled, kFull };

struct GrandOptions {
  AssertionLevel assertions = AssertionLevel::kFull;
  double tolerance = kOrderTolerance;
  std::size_t sample_every = 97;
};

struct GrandResult {
  std::vector<Interface> finals;
  std::size_t events = 0;
  std::size_t checks = 0;
  std::size_t height_pairs = 0;
  std::size_t gradient_pairs = 0;
};

// Every chain uses u[0] of each event through the same quantile map.
// Chains must share N; tilts may differ (the gradient order compares
// configurations with different endpoints). Throws kOrderViolation.
GrandResult run_grand_coupled(const ConditionalSampler& sampler, std::vector<Interface> initials,
                              const EventStream& events, const GrandOptions& options = {},
                              const Observer* observer_of_first = nullptr);

struct StickyOptions {
  // Monotone coupling strictly before this time, sticky from then on.
  double switch_time = 0.0;
  std::vector<double> area_times;
  bool record_event_area = false;
  // Stop at coalescence; x and y are then the common state at that time.
  bool stop_at_coalescence = false;
  AssertionLevel assertions = AssertionLevel::kSampled;
  double tolerance = kOrderTolerance;
};

struct StickyResult {
  double coalescence_time = std::numeric_limits<double>::infinity();
  std::vector<double> area_at;  // sum_k (y_k - x_k) at each of options.area_times
  std::vector<double> event_times;
  std::vector<double> event_area;
  Interface x;
  Interface y;
  std::size_t events = 0;
  std::size_t coupled_draws = 0;
  bool ordered = false;

  bool coalesced_by(double t) const noexcept { return coalescence_time <= t; }
};

StickyResult run_sticky_pair(const ConditionalSampler& sampler, Interface x0, Interface y0,
                             const EventStream& events, const StickyOptions& options = {});

struct Proportion {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t replicas = 0;
};

// Fraction of replica seeds whose sticky pair has coalesced by time t.
// Replica r uses derive_seed(seed, "replica", r).
Proportion coalescence_fraction(const ConditionalSampler& sampler, const Interface& x0, const Interface& y0,
                                std::uint64_t seed, std::size_t replicas, double t, double switch_time,
                                int threads = 1);

std::uint64_t replica_seed(std::uint64_t seed, std::size_t replica) noexcept;

}  // namespace gradphi
