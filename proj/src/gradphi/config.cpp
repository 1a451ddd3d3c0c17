#include "gradphi/config.hpp"

#include <fmt/format.h>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <sstream>

#include "gradphi/error.hpp"
#include "gradphi/potential.hpp"

namespace gradphi {

namespace {

const std::vector<std::string> kExperiments = {"gap", "mix", "cutoff", "equilibrium", "couplings", "censoring", "validate"};
const std::vector<std::string> kExecutionKeys = {"run.threads", "run.output_dir"};

ConfigMap flatten(const boost::property_tree::ptree& tree) {
  ConfigMap out;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      out[section] = body.data();
      continue;
    }
    for (const auto& [key, value] : body) out[section + "." + key] = value.data();
  }
  return out;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n\"");
  const auto e = s.find_last_not_of(" \t\r\n\"");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream is(s);
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const ConfigMap& v) : values_(v) {}

  std::string text(const std::string& key) const {
    auto it = values_.find(key);
    return it != values_.end() ? trim(it->second) : config_defaults().at(key);
  }

  template <class T>
  T number(const std::string& key, T fallback) {
    const std::string s = text(key);
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      errors.push_back(fmt::format("{}: cannot parse '{}' as a number", key, s));
      return fallback;
    }
    return v;
  }

  template <class T>
  std::vector<T> list(const std::string& key) {
    std::vector<T> out;
    for (const auto& item : split_list(text(key))) {
      T v{};
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
      if (ec != std::errc() || ptr != item.data() + item.size())
        errors.push_back(fmt::format("{}: cannot parse list item '{}'", key, item));
      else
        out.push_back(v);
    }
    return out;
  }

  bool flag(const std::string& key) {
    const std::string s = text(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no" || s.empty()) return false;
    errors.push_back(fmt::format("{}: expected true/false, got '{}'", key, s));
    return false;
  }

  void require(bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  }

  std::vector<std::string> errors;

 private:
  const ConfigMap& values_;
};

}  // namespace

std::string to_string(AssertionLevel level) {
  switch (level) {
    case AssertionLevel::kOff:
      return "off";
    case AssertionLevel::kSampled:
      return "sampled";
    case AssertionLevel::kFull:
      return "full";
  }
  return "sampled";
}

const ConfigMap& config_defaults() {
  static const ConfigMap defaults = {
      {"run.experiment", ""},
      {"run.seed", ""},
      {"run.replicas", "1000"},
      {"run.threads", "1"},
      {"run.output_dir", "results"},
      {"run.assertion_level", "sampled"},
      {"run.emit_plot_data", "false"},
      {"run.trajectory", "false"},
      {"model.potential", "gaussian"},
      {"model.N", "16"},
      {"model.N_list", "16,32,64"},
      {"model.tilt_h", "0"},
      {"model.start", "tent"},
      {"time.horizon", "0"},
      {"time.time_points", "40"},
      {"time.epsilon", "0.25"},
      {"coupling.switch", "half"},
      {"coupling.lower_replicas", "2000"},
      {"coupling.upper_replicas", "200"},
      {"coupling.equilibrium_count", "4000"},
      {"equilibrium.mode", "auto"},
      {"equilibrium.t_run", "0"},
      {"equilibrium.target_bias", "0.01"},
      {"equilibrium.max_bias", "0.05"},
      {"equilibrium.pilot", "64"},
      {"equilibrium.max_retries", "8"},
      {"censoring.sites", "mid"},
      {"censoring.t", "0"},
  };
  return defaults;
}

ConfigMap parse_config_text(const std::string& text) {
  std::istringstream is(text);
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(is, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::kConfig, fmt::format("config line {}: {}", e.line(), e.message()));
  }
  return flatten(tree);
}

ConfigMap read_config_file(const std::string& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    fail(ErrorCode::kConfig, fmt::format("{}:{}: {}", path, e.line(), e.message()));
  }
  return flatten(tree);
}

std::string canonical_config(const ConfigMap& values) {
  ConfigMap merged = config_defaults();
  for (const auto& [k, v] : values) merged[k] = trim(v);
  std::string out;
  for (const auto& [k, v] : merged) {
    if (std::find(kExecutionKeys.begin(), kExecutionKeys.end(), k) != kExecutionKeys.end()) continue;
    out += fmt::format("{} = {}\n", k, v);
  }
  return out;
}

ExperimentConfig build_config(const ConfigMap& values) {
  Reader r(values);
  for (const auto& [k, v] : values)
    if (!config_defaults().count(k)) r.errors.push_back(fmt::format("{}: unknown key", k));

  ExperimentConfig c;
  c.experiment = r.text("run.experiment");
  r.require(std::find(kExperiments.begin(), kExperiments.end(), c.experiment) != kExperiments.end(),
            fmt::format("run.experiment: '{}' is not one of gap, mix, cutoff, equilibrium, couplings, censoring, validate",
                        c.experiment));
  if (r.text("run.seed").empty())
    r.errors.push_back("run.seed: a seed is mandatory");
  else
    c.seed = r.number<std::uint64_t>("run.seed", 0);
  const auto replicas = r.number<long long>("run.replicas", 1);
  r.require(replicas >= 1, "run.replicas: must be >= 1");
  c.replicas = static_cast<std::size_t>(std::max(1LL, replicas));
  c.threads = r.number<int>("run.threads", 1);
  r.require(c.threads >= 1, "run.threads: must be >= 1");
  c.output_dir = r.text("run.output_dir");
  r.require(!c.output_dir.empty(), "run.output_dir: must not be empty");
  const std::string level = r.text("run.assertion_level");
  if (level == "off")
    c.assertion_level = AssertionLevel::kOff;
  else if (level == "sampled")
    c.assertion_level = AssertionLevel::kSampled;
  else if (level == "full")
    c.assertion_level = AssertionLevel::kFull;
  else
    r.errors.push_back(fmt::format("run.assertion_level: '{}' is not one of off, sampled, full", level));
  c.emit_plot_data = r.flag("run.emit_plot_data");
  c.trajectory = r.flag("run.trajectory");

  c.potential = r.text("model.potential");
  if (c.potential.empty()) {
    r.errors.push_back("model.potential: must not be empty");
  } else {
    try {
      (void)make_potential(c.potential);
    } catch (const Error& e) {
      r.errors.push_back(fmt::format("model.potential: {}", e.what()));
    }
  }
  c.n = r.number<int>("model.N", 2);
  r.require(c.n >= 2, "model.N: must be >= 2");
  c.n_list = r.list<int>("model.N_list");
  for (int v : c.n_list) r.require(v >= 2, fmt::format("model.N_list: entry {} must be >= 2", v));
  for (std::size_t i = 1; i < c.n_list.size(); ++i)
    r.require(c.n_list[i] > c.n_list[i - 1], "model.N_list: must be strictly increasing");
  c.tilt = r.number<double>("model.tilt_h", 0.0);
  r.require(std::isfinite(c.tilt), "model.tilt_h: must be finite");
  c.start = r.text("model.start");
  r.require(c.start == "tent" || c.start == "flat" || c.start == "mode",
            fmt::format("model.start: '{}' is not one of tent, flat, mode", c.start));

  c.horizon = r.number<double>("time.horizon", 0.0);
  r.require(c.horizon >= 0.0, "time.horizon: must be >= 0 (0 selects the experiment default)");
  c.time_points = r.number<int>("time.time_points", 3);
  r.require(c.time_points >= 3, "time.time_points: must be >= 3");
  c.epsilons = r.list<double>("time.epsilon");
  r.require(!c.epsilons.empty(), "time.epsilon: at least one value required");
  for (double e : c.epsilons) r.require(e > 0.0 && e < 1.0, fmt::format("time.epsilon: {} must lie in (0,1)", e));

  const std::string sw = r.text("coupling.switch");
  if (sw == "half") {
    c.rule.kind = SwitchRule::Kind::kHalf;
  } else if (sw.rfind("fixed:", 0) == 0) {
    c.rule.kind = SwitchRule::Kind::kFixed;
    ConfigMap tmp{{"coupling.switch", sw.substr(6)}};
    Reader sub(tmp);
    c.rule.fixed = sub.number<double>("coupling.switch", 0.0);
    for (auto& e : sub.errors) r.errors.push_back(e);
    r.require(c.rule.fixed >= 0.0, "coupling.switch: fixed switch time must be >= 0");
  } else {
    r.errors.push_back(fmt::format("coupling.switch: '{}' is not 'half' or 'fixed:<time>'", sw));
  }
  const auto lr = r.number<long long>("coupling.lower_replicas", 2);
  const auto ur = r.number<long long>("coupling.upper_replicas", 1);
  const auto ec = r.number<long long>("coupling.equilibrium_count", 2);
  r.require(lr >= 2, "coupling.lower_replicas: must be >= 2");
  r.require(ur >= 1, "coupling.upper_replicas: must be >= 1");
  r.require(ec >= 2, "coupling.equilibrium_count: must be >= 2");
  c.lower_replicas = static_cast<std::size_t>(std::max(2LL, lr));
  c.upper_replicas = static_cast<std::size_t>(std::max(1LL, ur));
  c.equilibrium_count = static_cast<std::size_t>(std::max(2LL, ec));

  try {
    c.eq.mode = parse_equilibrium_mode(r.text("equilibrium.mode"));
  } catch (const Error& e) {
    r.errors.push_back(fmt::format("equilibrium.mode: {}", e.what()));
  }
  c.eq.t_run = r.number<double>("equilibrium.t_run", 0.0);
  r.require(c.eq.t_run >= 0.0, "equilibrium.t_run: must be >= 0");
  c.eq.target_bias = r.number<double>("equilibrium.target_bias", 0.01);
  r.require(c.eq.target_bias > 0.0 && c.eq.target_bias < 1.0, "equilibrium.target_bias: must lie in (0,1)");
  c.eq.max_bias = r.number<double>("equilibrium.max_bias", 0.05);
  r.require(c.eq.max_bias > 0.0 && c.eq.max_bias <= 1.0, "equilibrium.max_bias: must lie in (0,1]");
  const auto pilot = r.number<long long>("equilibrium.pilot", 1);
  r.require(pilot >= 1, "equilibrium.pilot: must be >= 1");
  c.eq.pilot = static_cast<std::size_t>(std::max(1LL, pilot));
  c.eq.max_retries = r.number<int>("equilibrium.max_retries", 0);
  r.require(c.eq.max_retries >= 0, "equilibrium.max_retries: must be >= 0");

  const std::string sites = r.text("censoring.sites");
  if (sites == "mid") {
    c.censor_sites = {c.n / 2};
  } else if (sites == "all") {
    for (int k = 1; k < c.n; ++k) c.censor_sites.push_back(k);
  } else {
    c.censor_sites = r.list<int>("censoring.sites");
    for (int k : c.censor_sites)
      r.require(k >= 1 && k <= c.n - 1, fmt::format("censoring.sites: site {} outside 1..{}", k, c.n - 1));
  }
  c.censor_t = r.number<double>("censoring.t", 0.0);
  r.require(c.censor_t >= 0.0, "censoring.t: must be >= 0 (0 selects 0.5 log N / gap)");

  if (!r.errors.empty()) {
    std::string msg = fmt::format("invalid configuration ({} problem{}):", r.errors.size(), r.errors.size() == 1 ? "" : "s");
    for (const auto& e : r.errors) msg += "\n  - " + e;
    fail(ErrorCode::kConfig, msg);
  }
  return c;
}

}  // namespace gradphi
