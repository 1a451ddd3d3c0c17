#include <gradphi/gradphi.h>

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

TEST_CASE("status names and last error") {
  CHECK(std::string(gp_status_name(GP_OK)) == "ok");
  CHECK(std::string(gp_status_name(GP_ERR_CONFIG)) == "configuration error");
  gp_potential* p = nullptr;
  CHECK(gp_potential_create("power:0.5", &p) == GP_ERR_INVALID_ARGUMENT);
  CHECK(p == nullptr);
  const auto table = std::filesystem::temp_directory_path() / "gradphi_affine_table.txt";
  {
    std::FILE* f = std::fopen(table.c_str(), "w");
    std::fputs("-1 -1\n0 0\n1 1\n2 2\n", f);
    std::fclose(f);
  }
  CHECK(gp_potential_create(("table:" + table.string()).c_str(), &p) == GP_ERR_INVALID_POTENTIAL);
  CHECK(std::string(gp_last_error()).find("non") != std::string::npos);
  std::filesystem::remove(table);
  CHECK(std::strlen(gp_last_error()) > 0);
  CHECK(gp_potential_create("gaussian", &p) == GP_OK);
  CHECK(std::string(gp_last_error()).empty());
  CHECK(gp_potential_create(nullptr, &p) == GP_ERR_INVALID_ARGUMENT);
  gp_potential_destroy(p);
  gp_potential_destroy(nullptr);
}

TEST_CASE("potential and sampler handles") {
  gp_potential* p = nullptr;
  REQUIRE(gp_potential_create("sos", &p) == GP_OK);
  double v = 0.0;
  CHECK(gp_potential_eval(p, -2.5, &v) == GP_OK);
  CHECK(v == 2.5);
  CHECK(gp_potential_partition(p, 0.0, &v) == GP_OK);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-8));

  int passed = 0;
  size_t need = 0;
  CHECK(gp_potential_verify(p, &passed, nullptr, 0, &need) == GP_ERR_BUFFER_TOO_SMALL);
  std::string report(need, '\0');
  CHECK(gp_potential_verify(p, &passed, report.data(), report.size(), nullptr) == GP_OK);
  CHECK(passed == 1);

  gp_sampler* s = nullptr;
  REQUIRE(gp_sampler_create(p, 0, &s) == GP_OK);
  CHECK(gp_sampler_quantile(s, 0.0, 2.0, 0.5, &v) == GP_OK);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(gp_sampler_quantile(s, 0.0, 2.0, 1.5, &v) == GP_ERR_INVALID_ARGUMENT);
  CHECK(gp_sampler_overlap(s, 0.0, 2.0, 0.0, 2.0, &v) == GP_OK);
  CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
  gp_sampler_destroy(s);
  gp_potential_destroy(p);
}

TEST_CASE("density table") {
  gp_potential* p = nullptr;
  REQUIRE(gp_potential_create("gaussian", &p) == GP_OK);
  gp_density* d = nullptr;
  REQUIRE(gp_density_build(p, 0.0, 2.0, &d) == GP_OK);
  size_t n = 0;
  REQUIRE(gp_density_size(d, &n) == GP_OK);
  REQUIRE(n > 10);
  std::vector<double> x(n), pdf(n), cdf(n);
  CHECK(gp_density_table(d, x.data(), pdf.data(), cdf.data(), n - 1) == GP_ERR_BUFFER_TOO_SMALL);
  REQUIRE(gp_density_table(d, x.data(), pdf.data(), cdf.data(), n) == GP_OK);
  CHECK(cdf.front() == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(cdf.back() == doctest::Approx(1.0).epsilon(1e-9));
  const double sd = 1.0 / std::sqrt(2.0);
  for (size_t i = 0; i < n; ++i) {
    const double z = (x[i] - 1.0) / sd;
    CHECK(pdf[i] == doctest::Approx(std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * M_PI))).epsilon(1e-8).scale(1.0));
  }
  double q = 0.0, c = 0.0;
  CHECK(gp_density_quantile(d, 0.3, &q) == GP_OK);
  CHECK(gp_density_cdf(d, q, &c) == GP_OK);
  CHECK(c == doctest::Approx(0.3).epsilon(1e-9));
  gp_density_destroy(d);
  gp_potential_destroy(p);
}

TEST_CASE("observables and simulation") {
  double g = 0.0;
  CHECK(gp_spectral_gap(2, &g) == GP_OK);
  CHECK(g == doctest::Approx(1.0));
  CHECK(gp_spectral_gap(1, &g) == GP_ERR_INVALID_ARGUMENT);
  const double h[] = {0.0, 1.0, 1.0, 1.0, 0.0};
  CHECK(gp_fourier_stat(h, 4, 1, &g) == GP_OK);
  CHECK(g == doctest::Approx(1.0 + std::sqrt(2.0)));
  double out[5];
  CHECK(gp_heat_mean(h, 4, 0.0, out) == GP_OK);
  CHECK(out[2] == doctest::Approx(1.0));

  gp_potential* p = nullptr;
  gp_sampler* s = nullptr;
  REQUIRE(gp_potential_create("gaussian", &p) == GP_OK);
  REQUIRE(gp_sampler_create(p, 1, &s) == GP_OK);
  double a[5], b[5];
  CHECK(gp_simulate(s, h, 4, 7, 10.0, a) == GP_OK);
  CHECK(gp_simulate(s, h, 4, 7, 10.0, b) == GP_OK);
  CHECK(std::memcmp(a, b, sizeof a) == 0);
  CHECK(a[0] == 0.0);
  CHECK(a[4] == 0.0);
  CHECK(gp_simulate(s, h, 4, 7, 0.0, a) == GP_OK);
  CHECK(std::memcmp(a, h, sizeof a) == 0);
  const double bad[] = {1.0, 0.0, 0.0};
  CHECK(gp_simulate(s, bad, 2, 7, 1.0, a) == GP_ERR_INVALID_ARGUMENT);
  gp_sampler_destroy(s);
  gp_potential_destroy(p);
}

TEST_CASE("config and experiment") {
  gp_config* c = nullptr;
  REQUIRE(gp_config_create(&c) == GP_OK);
  CHECK(gp_config_set(c, "model.bogus", "1") == GP_ERR_CONFIG);
  CHECK(gp_config_validate(c) == GP_ERR_CONFIG);
  const std::string err = gp_last_error();
  CHECK(err.find("run.experiment") != std::string::npos);
  CHECK(err.find("run.seed") != std::string::npos);

  char buf[64];
  size_t need = 0;
  CHECK(gp_config_get(c, "model.potential", buf, sizeof buf, &need) == GP_OK);
  CHECK(std::string(buf) == "gaussian");
  CHECK(gp_config_get(c, "model.potential", buf, 3, &need) == GP_ERR_BUFFER_TOO_SMALL);
  CHECK(need == 9);

  const auto root = std::filesystem::temp_directory_path() / "gradphi_capi_test";
  std::filesystem::remove_all(root);
  CHECK(gp_config_set(c, "run.experiment", "validate") == GP_OK);
  CHECK(gp_config_set(c, "run.seed", "3") == GP_OK);
  CHECK(gp_config_set(c, "run.replicas", "300") == GP_OK);
  CHECK(gp_config_set(c, "model.N", "4") == GP_OK);
  CHECK(gp_config_set(c, "run.output_dir", root.c_str()) == GP_OK);
  REQUIRE(gp_config_validate(c) == GP_OK);
  gp_run* r = nullptr;
  REQUIRE(gp_run_experiment(c, &r) == GP_OK);
  CHECK(gp_run_passed(r) == 1);
  CHECK(std::string(gp_run_summary(r)).find("\"experiment\": \"validate\"") != std::string::npos);
  CHECK(gp_run_file_count(r) == 3);
  CHECK(std::filesystem::exists(std::filesystem::path(gp_run_directory(r)) / gp_run_file(r, 0)));
  CHECK(gp_run_file(r, 99) == nullptr);
  gp_run_destroy(r);
  gp_config_destroy(c);
  std::filesystem::remove_all(root);
}
