#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gradphi/dynamics.hpp"
#include "gradphi/equilibrium.hpp"
#include "gradphi/events.hpp"
#include "gradphi/interface.hpp"
#include "gradphi/resampler.hpp"

namespace gradphi {

struct Ensemble {
  ConditionalSampler sampler;
  std::uint64_t seed = 0;
  std::size_t replicas = 1;
  int threads = 1;
};

struct EstimateReport {
  double value = 0.0;
  double std_error = 0.0;
  double ci_level = 0.95;
  std::size_t replicas = 0;
  std::string method;
  std::string digest;
  std::vector<std::pair<std::string, double>> details;

  double ci_low() const;
  double ci_high() const;
};

// "<method>/<seed hex>/<hash of parameters hex>"
std::string make_digest(const std::string& method, std::uint64_t seed, const std::string& parameters);

// values[(r * times + i) * width + j] = stat(X_r(times[i]))[j] for replica r.
struct EnsembleRecord {
  std::size_t replicas = 0, times = 0, width = 0;
  std::vector<double> values;
  std::size_t events = 0, censored = 0;  // totals over replicas
  double at(std::size_t r, std::size_t i, std::size_t j) const { return values[(r * times + i) * width + j]; }
  std::vector<double> column(std::size_t i, std::size_t j) const;
};

using StatVector = std::function<void(const Interface&, std::span<double>)>;

EnsembleRecord record_ensemble(const Ensemble& ens, const Interface& x0, std::span<const double> times,
                               std::size_t width, const StatVector& stat, const CensoringScheme& censor = {});

// Replica mean and standard error of every interior height at each time.
struct MeanProfile {
  std::vector<double> times;
  std::vector<std::vector<double>> mean;  // [time][k], k = 0..N
  std::vector<std::vector<double>> std_error;
};
MeanProfile mean_profile(const Ensemble& ens, const Interface& x0, std::span<const double> times);

// Replica mean of f_N (on the gauged heights) at each time.
struct DecayPoint {
  double t = 0.0;
  double mean = 0.0;
  double std_error = 0.0;
  double theory = 0.0;  // f_N(x0) exp(-gap t)
};
std::vector<DecayPoint> fourier_decay(const Ensemble& ens, const Interface& x0, std::span<const double> times);

struct GapReport {
  EstimateReport estimate;
  double theory = 0.0;
  std::vector<DecayPoint> points;
  std::size_t fit_points = 0;
  double relative_error() const { return std::abs(estimate.value - theory) / theory; }
};

// Weighted least squares of log|mean f_N(X(t))| through the exact t=0 value;
// jackknife standard error over replica blocks.
GapReport gap_from_decay(const Ensemble& ens, const Interface& x0, double horizon, int time_points = 40);

struct WilsonPoint {
  double t = 0.0;
  double mean = 0.0;
  double variance = 0.0;
  double bound = 0.0;
  double std_error = 0.0;
  double fitted_c = 0.0;
};

struct WilsonCurve {
  std::vector<WilsonPoint> points;
  double start_stat = 0.0;
  double v_pi = 0.0;
  double v_pi_std_error = 0.0;
  double fitted_c = 0.0;  // median over points with bound in (0.05, 0.95)
  std::string surrogate;
  EquilibriumCertificate certificate;
  std::size_t clipped = 0;
};

// Start: tent with peak N/2 on top of the tilt profile. v_pi from
// `equilibrium_count` equilibrium draws.
WilsonCurve wilson_lower_curve(const Ensemble& ens, int n, double tilt, std::span<const double> times,
                               std::size_t equilibrium_count, const EquilibriumOptions& eq = {});

struct SwitchRule {
  enum class Kind { kHalf, kFixed } kind = Kind::kHalf;
  double fixed = 0.0;
  double at(double t) const { return kind == Kind::kHalf ? 0.5 * t : fixed; }
};

struct UpperPoint {
  double t = 0.0;
  double upper = 1.0;
  double std_error = 0.0;
  double switch_time = 0.0;
};

struct UpperCurve {
  std::vector<UpperPoint> points;
  EquilibriumCertificate certificate;
};

// 1 - P(coalesced by t) for sticky pairs started at x0 and at an equilibrium
// draw. `label` separates the random streams of different starts.
UpperCurve tv_upper_curve(const Ensemble& ens, const Interface& x0, std::span<const double> times,
                          const SwitchRule& rule = {}, const EquilibriumOptions& eq = {}, const std::string& label = "x0");

struct BracketOptions {
  std::size_t lower_replicas = 2000;
  std::size_t upper_replicas = 200;
  std::size_t equilibrium_count = 4000;
  int points_per_decade = 12;
  SwitchRule rule;
  EquilibriumOptions eq;
};

struct MixingBracket {
  double epsilon = 0.0;
  double t_lo = 0.0, t_lo_std_error = 0.0;
  double t_hi = 0.0, t_hi_std_error = 0.0;
  bool lo_found = false, hi_found = false;
  double predicted = 0.0;  // log N / (2 gap)
  double t_mid() const { return std::sqrt(t_lo * t_hi); }
};

struct MixingStudy {
  int n = 0;
  std::vector<double> grid;
  WilsonCurve lower;
  std::map<std::size_t, UpperPoint> upper_plus, upper_minus;  // keyed by grid index
  std::vector<MixingBracket> brackets;
  EquilibriumCertificate certificate;
};

// t_lo: last grid time with Wilson bound >= eps (log-linear interpolation);
// t_hi: first grid time with max of the upper curves from flat +N and -N
// starts <= eps, located by bisection over grid indices.
MixingStudy mixing_time_brackets(const ConditionalSampler& sampler, int n, double tilt,
                                 std::span<const double> epsilons, std::uint64_t seed, const BracketOptions& options,
                                 int threads = 1);

struct CutoffRow {
  int n = 0;
  double epsilon = 0.0;
  double t_lo = 0.0, t_hi = 0.0, t_mid = 0.0;
  double ratio = 0.0;       // t_mid pi^2 / (N^2 log N)
  double ratio_low = 0.0;   // t_lo pi^2 / (N^2 log N)
  double ratio_high = 0.0;  // t_hi pi^2 / (N^2 log N)
  double width_ratio = 0.0; // t_hi / t_lo
  double ratio_std_error = 0.0;
};

std::vector<CutoffRow> cutoff_rows(const MixingStudy& study);

struct Statistic {
  std::string name;
  std::function<double(const Interface&)> f;
};
Statistic coordinate_statistic(int k);

struct FkgPair {
  std::string f, g;
  double covariance = 0.0;
  double std_error = 0.0;
  bool passed = false;
};

struct FkgReport {
  std::vector<FkgPair> pairs;
  EquilibriumCertificate certificate;
  std::size_t replicas = 0;
  bool passed() const;
};

// Statistics are spot-checked for monotonicity on ordered pairs first and
// rejected with kInvalidArgument if one decreases.
FkgReport fkg_test(const Ensemble& ens, int n, double tilt, const std::vector<std::pair<Statistic, Statistic>>& pairs,
                   const EquilibriumOptions& eq = {});

struct CensoringReport {
  double censored = 0.0, censored_std_error = 0.0;
  double uncensored = 0.0, uncensored_std_error = 0.0;
  double initial = 0.0;
  std::size_t replicas = 0;
  std::size_t censored_events = 0;
  EquilibriumCertificate certificate;
  bool passed() const;
};

// Projected TV (through f_N) of X(t) against equilibrium draws, with and
// without the censoring scheme, on identical event streams.
CensoringReport censoring_compare(const Ensemble& ens, const Interface& x0, const CensoringScheme& scheme, double t,
                                  const EquilibriumOptions& eq = {});

struct TailRow {
  double u = 0.0;
  double height = 0.0;    // P(sup |x_k| >= u sqrt(N))
  double gradient = 0.0;  // P(max |eta_k| >= u)
};

struct TailReport {
  std::vector<TailRow> rows;
  bool geometric = false;
  EquilibriumCertificate certificate;
  std::size_t replicas = 0;
};

TailReport equilibrium_tail_check(const Ensemble& ens, int n, double tilt, std::vector<double> levels = {0, 2, 4, 8},
                                  const EquilibriumOptions& eq = {});
TailReport tail_report(const std::vector<Interface>& samples, std::vector<double> levels);

struct ContractionReport {
  double t = 0.0;
  double b0 = 0.0;
  double bt = 0.0;           // chain from x0 against the equilibrium chain
  double bt_envelope = 0.0;  // upper minus lower envelope chains
  double ratio = 0.0;
  double ratio_std_error = 0.0;
  double envelope_ratio = 0.0;
  double bound = 0.0;  // exp(-gap t)
  std::size_t replicas = 0;
  bool passed() const;
};

// Four grand-coupled chains per replica: x0, an equilibrium draw, and their
// coordinatewise max and min.
ContractionReport b_nu_contraction_check(const Ensemble& ens, const Interface& x0, double t,
                                         const EquilibriumOptions& eq = {});

std::vector<double> geometric_grid(double lo, double hi, int points_per_decade);

}  // namespace gradphi
