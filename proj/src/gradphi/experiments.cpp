#include "gradphi/experiments.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <sstream>

#include "gradphi/error.hpp"
#include "gradphi/observables.hpp"
#include "gradphi/parallel.hpp"
#include "gradphi/rng.hpp"
#include "gradphi/special.hpp"
#include "gradphi/stats.hpp"

namespace gradphi {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

std::string num(double v) { return fmt::format("{:.17g}", v); }

class Csv {
 public:
  Csv& meta(const std::string& key, const std::string& value) {
    text_ += fmt::format("# {}={}\n", key, value);
    return *this;
  }
  Csv& meta(const std::string& key, double value) { return meta(key, num(value)); }
  Csv& columns(const std::vector<std::string>& names) {
    text_ += join(names) + "\n";
    return *this;
  }
  void row(const std::vector<std::string>& cells) { text_ += join(cells) + "\n"; }
  void row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(num(v));
    row(s);
  }
  const std::string& text() const { return text_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + v[i];
    return out;
  }
  std::string text_;
};

class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(ErrorCode::kIo, fmt::format("cannot create {}: {}", dir_.string(), ec.message()));
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << content;
    os.close();
    if (!os) fail(ErrorCode::kIo, fmt::format("cannot write {}", path.string()));
    files.push_back(name);
  }

  const fs::path& dir() const { return dir_; }
  std::vector<std::string> files;

 private:
  fs::path dir_;
};

struct Context {
  const ExperimentConfig& cfg;
  ConditionalSampler sampler;
  Output& out;
  Json summary;
  bool passed = true;

  Ensemble ensemble(std::size_t replicas, const std::string& label, std::uint64_t index = 0) const {
    return Ensemble{sampler, derive_seed(cfg.seed, label, index), replicas, cfg.threads};
  }

  Csv csv(int n) const {
    Csv c;
    c.meta("experiment", cfg.experiment)
        .meta("potential", cfg.potential)
        .meta("N", std::to_string(n))
        .meta("tilt_h", cfg.tilt)
        .meta("lambda_N", spectral_gap(n))
        .meta("seed", std::to_string(cfg.seed));
    return c;
  }

  void check(const std::string& name, bool ok) {
    summary["checks"][name] = ok;
    passed = passed && ok;
  }
};

Json to_json(const EstimateReport& r) {
  Json j;
  j["value"] = r.value;
  j["std_error"] = r.std_error;
  j["ci_level"] = r.ci_level;
  j["ci_low"] = r.ci_low();
  j["ci_high"] = r.ci_high();
  j["replicas"] = r.replicas;
  j["method"] = r.method;
  j["digest"] = r.digest;
  Json d = Json::object();
  for (const auto& [k, v] : r.details) d[k] = v;
  j["details"] = d;
  return j;
}

Json to_json(const EquilibriumCertificate& c) {
  return Json{{"mode", to_string(c.mode)},       {"t_run", c.t_run},   {"bias_bound", c.bias_bound},
              {"bias_std_error", c.bias_std_error}, {"pilot", c.pilot}, {"retries", c.retries},
              {"failures", c.failures}};
}

Interface start_profile(const ExperimentConfig& cfg, int n) {
  if (cfg.start == "flat") return Interface::flat(n, n, cfg.tilt);
  if (cfg.start == "mode") return Interface::mode(n, 1, n, cfg.tilt);
  return Interface::tent(n, n, cfg.tilt);
}

void write_trajectory(Context& ctx, const Interface& x0, double horizon) {
  const EventStream ev(replica_seed(ctx.ensemble(0, "gap").seed, 0), x0.size(), horizon);
  Csv traj = ctx.csv(x0.size());
  traj.meta("replica", "0").columns({"time", "site", "value"});
  Observer obs;
  obs.on_event = [&](const Event& e, const Interface& x) { traj.row({e.time, double(e.site), x[e.site]}); };
  run_single(ctx.sampler, x0, ev, {}, &obs);
  ctx.out.write("trajectory.csv", traj.text());
  std::ostringstream replay;
  write_replay(replay, ev.materialise());
  ctx.out.write("events_replica0.txt", replay.str());
}

void run_gap(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const int n = cfg.n;
  const double lambda = spectral_gap(n);
  const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 3.0 / lambda;
  const Interface x0 = start_profile(cfg, n);
  const GapReport g = gap_from_decay(ctx.ensemble(cfg.replicas, "gap"), x0, horizon, cfg.time_points);

  Csv csv = ctx.csv(n);
  csv.meta("start", cfg.start)
      .meta("estimate", g.estimate.value)
      .meta("estimate_std_error", g.estimate.std_error)
      .meta("fit_points", std::to_string(g.fit_points))
      .meta("units", "t in rate-1 clock time; f_N on gauged heights")
      .columns({"t", "mean_fN", "stderr_fN", "theory_fN"});
  for (const auto& p : g.points) csv.row({p.t, p.mean, p.std_error, p.theory});
  ctx.out.write("gap_decay.csv", csv.text());
  if (cfg.emit_plot_data) ctx.out.write("plot_data/gap_decay.csv", csv.text());
  if (cfg.trajectory) write_trajectory(ctx, x0, horizon);

  ctx.summary["estimate"] = to_json(g.estimate);
  ctx.summary["theory"] = g.theory;
  ctx.summary["relative_error"] = g.relative_error();
  ctx.summary["fit_points"] = g.fit_points;
  ctx.summary["horizon"] = horizon;
  ctx.check("theory_inside_4se", std::abs(g.estimate.value - g.theory) <= 4.0 * g.estimate.std_error + 1e-12);
}

BracketOptions bracket_options(const ExperimentConfig& cfg) {
  BracketOptions o;
  o.lower_replicas = cfg.lower_replicas;
  o.upper_replicas = cfg.upper_replicas;
  o.equilibrium_count = cfg.equilibrium_count;
  o.rule = cfg.rule;
  o.eq = cfg.eq;
  return o;
}

std::string tv_curves_csv(const Context& ctx, const MixingStudy& s) {
  Csv csv = ctx.csv(s.n);
  csv.meta("cutoff_time", std::log(double(s.n)) / (2.0 * spectral_gap(s.n)))
      .meta("fitted_c", s.lower.fitted_c)
      .meta("units", "t in rate-1 clock time; upper is empty where not evaluated")
      .columns({"t", "lower", "lower_stderr", "upper", "upper_stderr"});
  for (std::size_t i = 0; i < s.grid.size(); ++i) {
    const auto& w = s.lower.points[i];
    std::vector<std::string> row = {num(s.grid[i]), num(w.bound), num(w.std_error), "", ""};
    auto p = s.upper_plus.find(i);
    auto m = s.upper_minus.find(i);
    if (p != s.upper_plus.end() && m != s.upper_minus.end()) {
      const auto& hi = p->second.upper >= m->second.upper ? p->second : m->second;
      row[3] = num(hi.upper);
      row[4] = num(hi.std_error);
    }
    csv.row(row);
  }
  return csv.text();
}

void write_study(Context& ctx, const MixingStudy& s, const std::string& prefix) {
  Csv lower = ctx.csv(s.n);
  lower.meta("start", s.lower.surrogate)
      .meta("start_fN", s.lower.start_stat)
      .meta("v_pi", s.lower.v_pi)
      .meta("v_pi_std_error", s.lower.v_pi_std_error)
      .meta("fitted_c", s.lower.fitted_c)
      .columns({"t", "bound", "stderr", "mean_fN", "var_fN", "fitted_c"});
  for (const auto& w : s.lower.points) lower.row({w.t, w.bound, w.std_error, w.mean, w.variance, w.fitted_c});
  ctx.out.write(prefix + "tv_lower.csv", lower.text());

  Csv upper = ctx.csv(s.n);
  upper.meta("starts", "flat +N and flat -N against equilibrium")
      .columns({"grid_index", "t", "upper_plus", "stderr_plus", "upper_minus", "stderr_minus", "switch_time"});
  for (const auto& [i, p] : s.upper_plus) {
    const auto& m = s.upper_minus.at(i);
    upper.row({double(i), p.t, p.upper, p.std_error, m.upper, m.std_error, p.switch_time});
  }
  ctx.out.write(prefix + "tv_upper.csv", upper.text());

  Csv br = ctx.csv(s.n);
  br.columns({"epsilon", "t_lo", "t_lo_stderr", "lo_found", "t_hi", "t_hi_stderr", "hi_found", "t_mid", "predicted"});
  for (const auto& b : s.brackets)
    br.row({b.epsilon, b.t_lo, b.t_lo_std_error, double(b.lo_found), b.t_hi, b.t_hi_std_error, double(b.hi_found),
            b.t_mid(), b.predicted});
  ctx.out.write(prefix + "brackets.csv", br.text());
}

Json study_json(const MixingStudy& s) {
  Json j;
  j["N"] = s.n;
  j["fitted_c"] = s.lower.fitted_c;
  j["v_pi"] = s.lower.v_pi;
  j["certificate"] = to_json(s.certificate);
  j["upper_evaluations"] = s.upper_plus.size();
  Json brackets = Json::array();
  for (const auto& b : s.brackets)
    brackets.push_back(Json{{"epsilon", b.epsilon},
                            {"t_lo", b.t_lo},
                            {"t_lo_std_error", b.t_lo_std_error},
                            {"lo_found", b.lo_found},
                            {"t_hi", b.t_hi},
                            {"t_hi_std_error", b.t_hi_std_error},
                            {"hi_found", b.hi_found},
                            {"t_mid", b.t_mid()},
                            {"predicted", b.predicted}});
  j["brackets"] = brackets;
  return j;
}

bool brackets_consistent(const MixingStudy& s) {
  for (const auto& b : s.brackets)
    if (b.lo_found && b.hi_found && b.t_lo > b.t_hi + 3.0 * std::hypot(b.t_lo_std_error, b.t_hi_std_error))
      return false;
  return true;
}

void run_mix(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const MixingStudy s = mixing_time_brackets(ctx.sampler, cfg.n, cfg.tilt, cfg.epsilons,
                                             derive_seed(cfg.seed, "mix", 0), bracket_options(cfg), cfg.threads);
  write_study(ctx, s, "");
  if (cfg.emit_plot_data) ctx.out.write("plot_data/tv_curves.csv", tv_curves_csv(ctx, s));
  ctx.summary["study"] = study_json(s);
  ctx.check("t_lo_le_t_hi", brackets_consistent(s));
}

void run_cutoff(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const std::vector<int> ns = cfg.n_list.empty() ? std::vector<int>{cfg.n} : cfg.n_list;
  Csv prof;
  prof.meta("experiment", cfg.experiment)
      .meta("potential", cfg.potential)
      .meta("tilt_h", cfg.tilt)
      .meta("seed", std::to_string(cfg.seed))
      .meta("units", "ratio = t_mid pi^2 / (N^2 log N); times in rate-1 clock time")
      .columns({"N", "lambda_N", "epsilon", "t_lo", "t_hi", "t_mid", "ratio", "ratio_stderr", "ratio_low",
                "ratio_high", "width_ratio"});
  Json studies = Json::array();
  bool consistent = true;
  for (int n : ns) {
    const MixingStudy s = mixing_time_brackets(ctx.sampler, n, cfg.tilt, cfg.epsilons,
                                               derive_seed(cfg.seed, "cutoff", static_cast<std::uint64_t>(n)),
                                               bracket_options(cfg), cfg.threads);
    write_study(ctx, s, fmt::format("N{}/", n));
    if (cfg.emit_plot_data) ctx.out.write(fmt::format("plot_data/tv_curves_N{}.csv", n), tv_curves_csv(ctx, s));
    for (const auto& r : cutoff_rows(s))
      prof.row({double(r.n), spectral_gap(r.n), r.epsilon, r.t_lo, r.t_hi, r.t_mid, r.ratio, r.ratio_std_error,
                r.ratio_low, r.ratio_high, r.width_ratio});
    studies.push_back(study_json(s));
    consistent = consistent && brackets_consistent(s);
  }
  ctx.out.write("cutoff_profile.csv", prof.text());
  if (cfg.emit_plot_data) ctx.out.write("plot_data/cutoff_profile.csv", prof.text());
  ctx.summary["studies"] = studies;
  ctx.check("t_lo_le_t_hi", consistent);
}

void run_equilibrium(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const int n = cfg.n;
  const int mid = n / 2;
  const auto batch =
      equilibrium_samples(ctx.sampler, n, cfg.tilt, derive_seed(cfg.seed, "equilibrium", 0), cfg.replicas, cfg.eq,
                          cfg.threads);
  std::vector<double> xm;
  Csv samples = ctx.csv(n);
  samples.meta("mode", to_string(batch.certificate.mode))
      .meta("bias_bound", batch.certificate.bias_bound)
      .columns({"sample", "x_mid", "f_N", "sup_height", "sup_gradient"});
  for (std::size_t i = 0; i < batch.samples.size(); ++i) {
    const auto& x = batch.samples[i];
    const double g = x[mid] - mid * cfg.tilt;
    xm.push_back(g);
    samples.row({double(i), g, fourier_stat(x.gauged()), sup_height(x), sup_gradient(x)});
  }
  ctx.out.write("equilibrium_samples.csv", samples.text());

  const Moments m = moments(xm);
  const double var_se = std::sqrt(std::max(0.0, m.fourth - m.variance * m.variance) / double(m.n));
  ctx.summary["certificate"] = to_json(batch.certificate);
  ctx.summary["x_mid"] = Json{{"mean", m.mean}, {"variance", m.variance}, {"variance_std_error", var_se}};
  ctx.check("certified_bias", batch.certificate.bias_bound <= cfg.eq.max_bias);

  const bool gaussian = ctx.sampler.potential().closed_form() == ClosedForm::kGaussian;
  const double bridge_var = double(mid) * double(n - mid) / double(n);
  if (gaussian) {
    ctx.summary["x_mid"]["bridge_variance"] = bridge_var;
    ctx.check("variance_within_5pct", std::abs(m.variance - bridge_var) <= 0.05 * bridge_var);
    if (batch.certificate.mode != EquilibriumMode::kGaussianExact) {
      EquilibriumOptions exact = cfg.eq;
      exact.mode = EquilibriumMode::kGaussianExact;
      const auto ref = equilibrium_samples(ctx.sampler, n, cfg.tilt, derive_seed(cfg.seed, "equilibrium-exact", 0),
                                           cfg.replicas, exact, cfg.threads);
      std::vector<double> rm;
      for (const auto& x : ref.samples) rm.push_back(x[mid] - mid * cfg.tilt);
      const auto ks = ks_two_sample(xm, rm);
      ctx.summary["ks_vs_exact"] = Json{{"statistic", ks.statistic}, {"p_value", ks.p_value}};
      ctx.check("ks_vs_exact_p_above_1e-3", ks.p_value >= 1e-3);
    }
  }

  const TailReport tails = tail_report(batch.samples, {0.0, 2.0, 4.0, 8.0});
  Csv tcsv = ctx.csv(n);
  tcsv.meta("units", "height level u means sup|x_k| >= u sqrt(N); gradient level u means max|eta_k| >= u")
      .columns({"u", "height_freq", "gradient_freq"});
  for (const auto& r : tails.rows) tcsv.row({r.u, r.height, r.gradient});
  ctx.out.write("equilibrium_tails.csv", tcsv.text());
  ctx.summary["tails_geometric"] = tails.geometric;

  if (n >= 4) {
    const auto fkg = fkg_test(ctx.ensemble(cfg.replicas, "fkg"), n, cfg.tilt,
                              {{coordinate_statistic(n / 4), coordinate_statistic(3 * n / 4)}}, cfg.eq);
    Csv fcsv = ctx.csv(n);
    fcsv.columns({"f", "g", "covariance", "stderr", "passed"});
    for (const auto& p : fkg.pairs)
      fcsv.row({p.f, p.g, num(p.covariance), num(p.std_error), p.passed ? "1" : "0"});
    ctx.out.write("fkg.csv", fcsv.text());
    ctx.check("fkg", fkg.passed());
  }

  if (cfg.emit_plot_data) {
    std::vector<double> sorted = xm;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t bins = std::clamp<std::size_t>(std::size_t(std::sqrt(double(sorted.size()))), 5, 100);
    const double lo = sorted.front(), hi = sorted.back();
    const double width = hi > lo ? (hi - lo) / double(bins) : 1.0;
    std::vector<double> counts(bins, 0.0);
    for (double v : sorted) counts[std::min(bins - 1, std::size_t((v - lo) / width))] += 1.0;
    Csv hist = ctx.csv(n);
    hist.meta("statistic", fmt::format("x_{} - {} h", mid, mid))
        .meta("mode", to_string(batch.certificate.mode))
        .meta("samples", std::to_string(sorted.size()))
        .meta("bridge_variance", gaussian ? num(bridge_var) : std::string("nan"))
        .columns({"bin_low", "bin_high", "count", "density"});
    for (std::size_t b = 0; b < bins; ++b)
      hist.row({lo + double(b) * width, lo + double(b + 1) * width, counts[b],
                counts[b] / (double(sorted.size()) * width)});
    ctx.out.write("plot_data/equilibrium_hist.csv", hist.text());
  }
}

// A random configuration with x_0 = 0 and x_N = tilt N.
Interface random_profile(int n, double tilt, CounterRng& rng, double scale) {
  Interface b = gaussian_bridge(n, tilt, rng);
  std::vector<double> h(b.heights().begin(), b.heights().end());
  for (int k = 1; k < n; ++k) h[k] = k * tilt + scale * (h[k] - k * tilt);
  return Interface(h, tilt);
}

// Pair i is height ordered for even i and gradient ordered (with a larger
// tilt on top) for odd i.
std::pair<Interface, Interface> random_ordered_pair(int n, double tilt, std::uint64_t seed, std::size_t i) {
  CounterRng rng(derive_seed(seed, "pair", i));
  const Interface x = random_profile(n, tilt, rng, 1.0 + 3.0 * rng.uniform());
  std::vector<double> y(x.heights().begin(), x.heights().end());
  if (i % 2 == 0) {
    for (int k = 1; k < n; ++k) y[k] += n * rng.uniform() * rng.uniform();
    return {x, Interface(y, tilt)};
  }
  double acc = 0.0;
  for (int k = 1; k <= n; ++k) {
    acc += rng.uniform() * rng.uniform() * 2.0;
    y[k] += acc;
  }
  return {x, Interface(y, y[n] / n)};
}

void run_couplings(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const int n = cfg.n;
  const double lambda = spectral_gap(n);
  const double horizon = cfg.horizon > 0.0 ? cfg.horizon : 1.0 / lambda;
  const std::uint64_t seed = derive_seed(cfg.seed, "couplings", 0);
  const std::size_t pairs = cfg.replicas;

  struct GrandOut {
    std::size_t events = 0, checks = 0;
    bool violated = false;
    std::string message;
  };
  std::vector<GrandOut> grand(pairs);
  GrandOptions go;
  go.assertions = cfg.assertion_level;
  parallel_for(pairs, cfg.threads, [&](std::size_t i) {
    auto [x, y] = random_ordered_pair(n, cfg.tilt, seed, i);
    const EventStream ev(derive_seed(seed, "grand-events", i), n, horizon);
    try {
      const auto r = run_grand_coupled(ctx.sampler, {x, y}, ev, go);
      grand[i] = {r.events, r.checks, false, {}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kOrderViolation) throw;
      grand[i] = {0, 0, true, e.what()};
    }
  });

  std::vector<double> times;
  for (int i = 0; i < 10; ++i) times.push_back(horizon * double(i) / 9.0);
  struct StickyOut {
    std::vector<double> area;
    std::size_t events = 0;
    bool coalesced = false;
    bool violated = false;
    std::string message;
  };
  std::vector<StickyOut> sticky(pairs);
  StickyOptions so;
  so.area_times = times;
  so.assertions = cfg.assertion_level;
  parallel_for(pairs, cfg.threads, [&](std::size_t i) {
    auto [x, y] = random_ordered_pair(n, cfg.tilt, seed, 2 * i);
    const EventStream ev(derive_seed(seed, "sticky-events", i), n, horizon);
    try {
      const auto r = run_sticky_pair(ctx.sampler, x, y, ev, so);
      sticky[i] = {r.area_at, r.events, r.coalesced_by(horizon), !r.ordered, {}};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kOrderViolation) throw;
      sticky[i].violated = true;
      sticky[i].message = e.what();
    }
  });

  std::size_t gev = 0, gchk = 0, gviol = 0, sev = 0, sviol = 0, scoal = 0;
  std::string first_violation;
  for (const auto& g : grand) {
    gev += g.events;
    gchk += g.checks;
    if (g.violated) {
      ++gviol;
      if (first_violation.empty()) first_violation = g.message;
    }
  }
  for (const auto& s : sticky) {
    sev += s.events;
    scoal += s.coalesced;
    if (s.violated) {
      ++sviol;
      if (first_violation.empty()) first_violation = s.message;
    }
  }

  Csv csv = ctx.csv(n);
  csv.meta("horizon", horizon).columns({"coupling", "pairs", "events", "checks", "violations"});
  csv.row({"grand", std::to_string(pairs), std::to_string(gev), std::to_string(gchk), std::to_string(gviol)});
  csv.row({"sticky", std::to_string(pairs), std::to_string(sev), "", std::to_string(sviol)});
  ctx.out.write("couplings.csv", csv.text());

  Csv area = ctx.csv(n);
  area.meta("units", "A_t = sum_k (y_k - x_k) for height-ordered sticky pairs")
      .columns({"t", "mean_area", "stderr", "increment", "increment_stderr"});
  bool supermartingale = true;
  std::vector<double> col(pairs), diff(pairs);
  for (std::size_t t = 0; t < times.size(); ++t) {
    std::size_t used = 0;
    col.clear();
    diff.clear();
    for (const auto& s : sticky) {
      if (s.violated) continue;
      col.push_back(s.area[t]);
      diff.push_back(t ? s.area[t] - s.area[t - 1] : 0.0);
      ++used;
    }
    if (used < 2) break;
    const Moments a = moments(col), d = moments(diff);
    if (t && d.mean > 3.0 * d.std_error()) supermartingale = false;
    area.row({times[t], a.mean, a.std_error(), d.mean, d.std_error()});
  }
  ctx.out.write("area_trace.csv", area.text());

  ctx.summary["horizon"] = horizon;
  ctx.summary["grand"] = Json{{"pairs", pairs}, {"events", gev}, {"checks", gchk}, {"violations", gviol}};
  ctx.summary["sticky"] = Json{{"pairs", pairs}, {"events", sev}, {"violations", sviol}, {"coalesced", scoal}};
  if (!first_violation.empty()) ctx.summary["first_violation"] = first_violation;
  ctx.check("grand_order_preserved", gviol == 0);
  ctx.check("sticky_order_preserved", sviol == 0);
  ctx.check("area_supermartingale", supermartingale);
}

void run_censoring(Context& ctx) {
  const auto& cfg = ctx.cfg;
  const int n = cfg.n;
  const double lambda = spectral_gap(n);
  const double t = cfg.censor_t > 0.0 ? cfg.censor_t : 0.5 * std::log(double(n)) / lambda;
  const Interface x0 = Interface::flat(n, n, cfg.tilt);
  const CensoringScheme scheme({CensorInterval{0.0, t, cfg.censor_sites}});
  const auto r = censoring_compare(ctx.ensemble(cfg.replicas, "censoring"), x0, scheme, t, cfg.eq);

  std::string sites;
  for (int k : cfg.censor_sites) sites += (sites.empty() ? "" : " ") + std::to_string(k);
  Csv csv = ctx.csv(n);
  csv.meta("t", t)
      .meta("censored_sites", sites)
      .meta("start", "flat at height N")
      .meta("statistic", "f_N")
      .columns({"variant", "projected_tv", "stderr"});
  csv.row({"uncensored", num(r.uncensored), num(r.uncensored_std_error)});
  csv.row({"censored", num(r.censored), num(r.censored_std_error)});
  ctx.out.write("censoring.csv", csv.text());

  ctx.summary["t"] = t;
  ctx.summary["uncensored"] = Json{{"value", r.uncensored}, {"std_error", r.uncensored_std_error}};
  ctx.summary["censored"] = Json{{"value", r.censored}, {"std_error", r.censored_std_error}};
  ctx.summary["censored_events"] = r.censored_events;
  ctx.summary["certificate"] = to_json(r.certificate);
  ctx.check("censored_ge_uncensored_minus_3se", r.passed());
}

void run_validate(Context& ctx) {
  const auto& cfg = ctx.cfg;
  Csv csv;
  csv.meta("experiment", cfg.experiment)
      .meta("potential", cfg.potential)
      .meta("seed", std::to_string(cfg.seed))
      .columns({"check", "value", "threshold", "passed"});
  auto record = [&](const std::string& name, double value, double threshold, bool ok) {
    csv.row({name, num(value), num(threshold), ok ? "1" : "0"});
    ctx.check(name, ok);
  };

  const PotentialReport rep = verify_potential(ctx.sampler.potential());
  for (const auto* a : {&rep.convexity, &rep.polynomial_growth, &rep.non_affine}) {
    record("assumption_" + a->name, a->passed ? 1.0 : 0.0, 1.0, a->passed);
    ctx.summary["assumptions"][a->name] = a->detail;
  }

  // Quantile/CDF round trip on the tabulated density at random neighbours.
  CounterRng rng(derive_seed(cfg.seed, "validate-roundtrip", 0));
  double worst = 0.0, worst_analytic = 0.0;
  for (int c = 0; c < 10; ++c) {
    const double b = 10.0 * rng.uniform() - 5.0, cc = 10.0 * rng.uniform() - 5.0;
    const auto d = TabulatedDensity::build(ctx.sampler.potential(), b, cc);
    for (int i = 1; i <= 99; ++i) {
      const double p = i / 100.0;
      worst = std::max(worst, std::abs(d.cdf_at(d.quantile(p)) - p));
      worst_analytic = std::max(worst_analytic, std::abs(d.cdf_at(ctx.sampler.quantile(b, cc, p)) - p));
    }
  }
  record("quantile_roundtrip", worst, 1e-8, worst <= 1e-8);
  record("sampler_vs_tabulated", worst_analytic, 1e-8, worst_analytic <= 1e-8);

  const int n = cfg.n;
  const double lambda = spectral_gap(n);
  {
    const std::uint64_t seed = derive_seed(cfg.seed, "validate-order", 0);
    std::size_t violations = 0;
    for (std::size_t i = 0; i < 20; ++i) {
      auto [x, y] = random_ordered_pair(n, cfg.tilt, seed, i);
      try {
        run_grand_coupled(ctx.sampler, {x, y}, EventStream(derive_seed(seed, "events", i), n, 1.0 / lambda));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kOrderViolation) throw;
        ++violations;
      }
    }
    record("monotone_coupling_violations", double(violations), 0.0, violations == 0);
  }

  const std::vector<double> times = {0.25 / lambda, 0.5 / lambda, 1.0 / lambda};
  {
    const Interface x0 = Interface::tent(n, n, cfg.tilt);
    const auto prof = mean_profile(ctx.ensemble(cfg.replicas, "validate-heat"), x0, times);
    double z = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const auto heat = heat_mean_solution(x0, times[i]);
      for (int k = 1; k < n; ++k)
        z = std::max(z, std::abs(prof.mean[i][k] - heat[k]) / std::max(prof.std_error[i][k], 1e-300));
    }
    record("heat_mean_max_z", z, 4.5, z <= 4.5);
  }
  {
    const Interface x0 = Interface::mode(n, 1, 10.0, cfg.tilt);
    const auto dec = fourier_decay(ctx.ensemble(cfg.replicas, "validate-decay"), x0, times);
    double z = 0.0;
    for (const auto& p : dec) z = std::max(z, std::abs(p.mean - p.theory) / std::max(p.std_error, 1e-300));
    record("eigen_decay_max_z", z, 4.0, z <= 4.0);
  }
  ctx.out.write("validate.csv", csv.text());
}

}  // namespace

std::string run_directory_name(const ExperimentConfig& config, const std::string& canonical) {
  std::string pot;
  for (char ch : config.potential) pot += std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' ? ch : '-';
  const int n = config.experiment == "cutoff" && !config.n_list.empty() ? config.n_list.back() : config.n;
  return fmt::format("{}_N{}_seed{}_{:08x}", pot, n, config.seed,
                     static_cast<std::uint32_t>(splitmix64(hash_label(canonical)) >> 32));
}

RunResult run_experiment(const ExperimentConfig& config, const std::string& canonical) {
  const fs::path dir = fs::path(config.output_dir) / config.experiment / run_directory_name(config, canonical);
  Output out(dir);
  Context ctx{config, ConditionalSampler(make_potential(config.potential)), out, Json::object()};
  out.write("config.ini", canonical);
  ctx.summary["experiment"] = config.experiment;
  ctx.summary["potential"] = config.potential;
  ctx.summary["N"] = config.n;
  ctx.summary["tilt_h"] = config.tilt;
  ctx.summary["seed"] = config.seed;
  ctx.summary["replicas"] = config.replicas;
  ctx.summary["lambda_N"] = spectral_gap(config.n);
  ctx.summary["checks"] = Json::object();

  if (config.experiment == "gap")
    run_gap(ctx);
  else if (config.experiment == "mix")
    run_mix(ctx);
  else if (config.experiment == "cutoff")
    run_cutoff(ctx);
  else if (config.experiment == "equilibrium")
    run_equilibrium(ctx);
  else if (config.experiment == "couplings")
    run_couplings(ctx);
  else if (config.experiment == "censoring")
    run_censoring(ctx);
  else if (config.experiment == "validate")
    run_validate(ctx);
  else
    fail(ErrorCode::kConfig, fmt::format("unknown experiment '{}'", config.experiment));

  ctx.summary["passed"] = ctx.passed;
  RunResult result;
  result.summary_json = ctx.summary.dump(2) + "\n";
  out.write("summary.json", result.summary_json);
  result.directory = dir.string();
  result.files = out.files;
  result.passed = ctx.passed;
  return result;
}

}  // namespace gradphi
