#include <gradphi/gradphi.h>

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

namespace {

constexpr int kExitChecksFailed = 1;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

int report(gp_status status, const char* what) {
  std::fprintf(stderr, "grad-phi: %s: %s\n%s\n", what, gp_status_name(status), gp_last_error());
  return status == GP_ERR_CONFIG ? kExitConfig : kExitRuntime;
}

int dump_density(const std::string& potential, double b, double c) {
  gp_potential* pot = nullptr;
  if (gp_status s = gp_potential_create(potential.c_str(), &pot); s != GP_OK) return report(s, "potential");
  gp_density* d = nullptr;
  gp_status s = gp_density_build(pot, b, c, &d);
  if (s == GP_OK) {
    size_t n = 0;
    gp_density_size(d, &n);
    std::vector<double> x(n), pdf(n);
    s = gp_density_table(d, x.data(), pdf.data(), nullptr, n);
    if (s == GP_OK)
      for (size_t i = 0; i < n; ++i) std::printf("%.17g %.17g\n", x[i], pdf[i]);
  }
  gp_density_destroy(d);
  gp_potential_destroy(pot);
  return s == GP_OK ? 0 : report(s, "density");
}

int print_assumptions(const std::string& potential) {
  gp_potential* pot = nullptr;
  gp_status s = gp_potential_create(potential.c_str(), &pot);
  if (s != GP_OK) return report(s, "potential");
  int passed = 0;
  size_t need = 0;
  gp_potential_verify(pot, &passed, nullptr, 0, &need);
  std::string text(need, '\0');
  s = gp_potential_verify(pot, &passed, text.data(), text.size(), nullptr);
  gp_potential_destroy(pot);
  if (s != GP_OK) return report(s, "verify");
  std::printf("%s\n", text.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo experiments for heat-bath dynamics of 1D gradient interfaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(gp_version()));

  std::string config_path, potential, n_list, output_dir, assertion_level;
  std::vector<std::string> overrides;
  int n = 0, threads = 0;
  long long replicas = 0;
  std::string seed;
  bool emit_plot_data = false;
  std::vector<double> density_args;

  const std::vector<std::string> names = {"gap", "mix", "cutoff", "equilibrium", "couplings", "censoring", "validate"};
  for (const auto& name : names) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config,-c", config_path, "INI config file")->check(CLI::ExistingFile);
    sub->add_option("--potential,-p", potential, "gaussian | sos | power:<p> | table:<path>");
    sub->add_option("--N", n, "number of sites")->check(CLI::PositiveNumber);
    sub->add_option("--N-list", n_list, "comma separated N values (cutoff)");
    sub->add_option("--seed,-s", seed, "64-bit seed");
    sub->add_option("--replicas,-r", replicas, "replica count")->check(CLI::PositiveNumber);
    sub->add_option("--threads,-j", threads, "worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    sub->add_option("--output-dir,-o", output_dir, "artifact root directory");
    sub->add_option("--assertion-level", assertion_level, "off | sampled | full");
    sub->add_option("--set", overrides, "override any key: section.key=value")->take_all();
    sub->add_flag("--emit-plot-data", emit_plot_data, "also write the CSV files consumed by the plotting script");
    if (name == "validate")
      sub->add_option("--dump-density", density_args, "print the conditional density for neighbours B C and exit")
          ->expected(2);
  }
  CLI11_PARSE(app, argc, argv);
  const std::string experiment = app.get_subcommands().front()->get_name();

  if (!density_args.empty()) return dump_density(potential.empty() ? "gaussian" : potential, density_args[0], density_args[1]);

  gp_config* cfg = nullptr;
  gp_config_create(&cfg);
  auto set = [&](const std::string& k, const std::string& v) {
    gp_status s = gp_config_set(cfg, k.c_str(), v.c_str());
    if (s != GP_OK) std::exit(report(s, "option"));
  };
  if (!config_path.empty())
    if (gp_status s = gp_config_load(cfg, config_path.c_str()); s != GP_OK) return report(s, "config");
  set("run.experiment", experiment);
  if (!potential.empty()) set("model.potential", potential);
  if (n) set("model.N", std::to_string(n));
  if (!n_list.empty()) set("model.N_list", n_list);
  if (!seed.empty()) set("run.seed", seed);
  if (replicas) set("run.replicas", std::to_string(replicas));
  if (threads) set("run.threads", std::to_string(threads));
  if (!output_dir.empty()) set("run.output_dir", output_dir);
  if (!assertion_level.empty()) set("run.assertion_level", assertion_level);
  if (emit_plot_data) set("run.emit_plot_data", "true");
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "grad-phi: --set expects key=value, got '%s'\n", kv.c_str());
      return kExitConfig;
    }
    set(kv.substr(0, eq), kv.substr(eq + 1));
  }

  if (gp_status s = gp_config_validate(cfg); s != GP_OK) {
    gp_config_destroy(cfg);
    return report(s, "config");
  }
  if (experiment == "validate") {
    char pot[512];
    gp_config_get(cfg, "model.potential", pot, sizeof pot, nullptr);
    if (int rc = print_assumptions(pot); rc != 0) {
      gp_config_destroy(cfg);
      return rc;
    }
  }

  gp_run* run = nullptr;
  gp_status s = gp_run_experiment(cfg, &run);
  gp_config_destroy(cfg);
  if (s != GP_OK) return report(s, experiment.c_str());
  std::printf("%s", gp_run_summary(run));
  std::fprintf(stderr, "grad-phi: wrote %zu files to %s\n", gp_run_file_count(run), gp_run_directory(run));
  for (std::size_t i = 0; i < gp_run_file_count(run); ++i) std::fprintf(stderr, "  %s\n", gp_run_file(run, i));
  const int rc = gp_run_passed(run) ? 0 : kExitChecksFailed;
  gp_run_destroy(run);
  return rc;
}
