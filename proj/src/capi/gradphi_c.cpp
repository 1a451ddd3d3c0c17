#include "gradphi/gradphi.h"

#include <cmath>
#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "gradphi/config.hpp"
#include "gradphi/dynamics.hpp"
#include "gradphi/error.hpp"
#include "gradphi/experiments.hpp"
#include "gradphi/observables.hpp"
#include "gradphi/potential.hpp"
#include "gradphi/resampler.hpp"

struct gp_potential {
  gradphi::Potential pot;
};
struct gp_sampler {
  gradphi::ConditionalSampler sampler;
};
struct gp_density {
  gradphi::TabulatedDensity density;
};
struct gp_config {
  gradphi::ConfigMap values;
};
struct gp_run {
  gradphi::RunResult result;
};

namespace {

thread_local std::string last_error;

gp_status map_code(gradphi::ErrorCode code) {
  switch (code) {
    case gradphi::ErrorCode::kInvalidArgument:
      return GP_ERR_INVALID_ARGUMENT;
    case gradphi::ErrorCode::kInvalidPotential:
      return GP_ERR_INVALID_POTENTIAL;
    case gradphi::ErrorCode::kQuadratureFailure:
      return GP_ERR_QUADRATURE;
    case gradphi::ErrorCode::kBracketNotFound:
      return GP_ERR_BRACKET_NOT_FOUND;
    case gradphi::ErrorCode::kOrderViolation:
      return GP_ERR_ORDER_VIOLATION;
    case gradphi::ErrorCode::kInsufficientData:
      return GP_ERR_INSUFFICIENT_DATA;
    case gradphi::ErrorCode::kConfig:
      return GP_ERR_CONFIG;
    case gradphi::ErrorCode::kIo:
      return GP_ERR_IO;
    case gradphi::ErrorCode::kEstimator:
      return GP_ERR_ESTIMATOR;
  }
  return GP_ERR_INTERNAL;
}

gp_status fail_with(gp_status status, const std::string& message) {
  last_error = message;
  return status;
}

template <class Fn>
gp_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    return fn();
  } catch (const gradphi::Error& e) {
    return fail_with(map_code(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail_with(GP_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail_with(GP_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail_with(GP_ERR_INTERNAL, "unknown error");
  }
}

gp_status null_argument(const char* name) { return fail_with(GP_ERR_INVALID_ARGUMENT, std::string(name) + " is null"); }

gp_status copy_out(const std::string& s, char* buf, size_t capacity, size_t* required) {
  if (required) *required = s.size() + 1;
  if (!buf || capacity < s.size() + 1) return fail_with(GP_ERR_BUFFER_TOO_SMALL, "output buffer too small");
  std::memcpy(buf, s.c_str(), s.size() + 1);
  return GP_OK;
}

gradphi::Interface interface_from(const double* heights, int n) {
  if (n < 2) gradphi::fail(gradphi::ErrorCode::kInvalidArgument, "n must be at least 2");
  std::vector<double> h(heights, heights + n + 1);
  return gradphi::Interface(h, h.back() / n);
}

}  // namespace

extern "C" {

const char* gp_last_error(void) { return last_error.c_str(); }

const char* gp_status_name(gp_status status) {
  switch (status) {
    case GP_OK:
      return "ok";
    case GP_ERR_INVALID_ARGUMENT:
      return "invalid argument";
    case GP_ERR_INVALID_POTENTIAL:
      return "invalid potential";
    case GP_ERR_QUADRATURE:
      return "quadrature failure";
    case GP_ERR_BRACKET_NOT_FOUND:
      return "bracket not found";
    case GP_ERR_ORDER_VIOLATION:
      return "order violation";
    case GP_ERR_INSUFFICIENT_DATA:
      return "insufficient data";
    case GP_ERR_CONFIG:
      return "configuration error";
    case GP_ERR_IO:
      return "i/o error";
    case GP_ERR_ESTIMATOR:
      return "estimator error";
    case GP_ERR_BUFFER_TOO_SMALL:
      return "buffer too small";
    case GP_ERR_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* gp_version(void) { return "1.0.0"; }

gp_status gp_potential_create(const char* spec, gp_potential** out) {
  if (!spec) return null_argument("spec");
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new gp_potential{gradphi::make_potential(spec)};
    return GP_OK;
  });
}

void gp_potential_destroy(gp_potential* pot) { delete pot; }

gp_status gp_potential_eval(const gp_potential* pot, double u, double* out) {
  if (!pot || !out) return null_argument(!pot ? "pot" : "out");
  *out = pot->pot(u);
  return GP_OK;
}

gp_status gp_potential_partition(const gp_potential* pot, double a, double* out) {
  if (!pot || !out) return null_argument(!pot ? "pot" : "out");
  return guarded([&] {
    *out = gradphi::partition(pot->pot, a);
    return GP_OK;
  });
}

gp_status gp_potential_tilt_solve(const gp_potential* pot, double mean, double* lambda_out) {
  if (!pot || !lambda_out) return null_argument(!pot ? "pot" : "lambda_out");
  return guarded([&] {
    *lambda_out = gradphi::tilt_solve(pot->pot, mean).lambda;
    return GP_OK;
  });
}

gp_status gp_potential_verify(const gp_potential* pot, int* passed, char* report, size_t capacity,
                              size_t* required) {
  if (!pot || !passed) return null_argument(!pot ? "pot" : "passed");
  return guarded([&] {
    const auto r = gradphi::verify_potential(pot->pot);
    *passed = r.all_passed() ? 1 : 0;
    return copy_out(gradphi::describe(r), report, capacity, required);
  });
}

gp_status gp_sampler_create(const gp_potential* pot, int force_tabulated, gp_sampler** out) {
  if (!pot || !out) return null_argument(!pot ? "pot" : "out");
  return guarded([&] {
    gradphi::SamplerOptions opts;
    opts.force_tabulated = force_tabulated != 0;
    *out = new gp_sampler{gradphi::ConditionalSampler(pot->pot, opts)};
    return GP_OK;
  });
}

void gp_sampler_destroy(gp_sampler* sampler) { delete sampler; }

gp_status gp_sampler_quantile(const gp_sampler* sampler, double b, double c, double p, double* out) {
  if (!sampler || !out) return null_argument(!sampler ? "sampler" : "out");
  return guarded([&] {
    *out = sampler->sampler.quantile(b, c, p);
    return GP_OK;
  });
}

gp_status gp_sampler_overlap(const gp_sampler* sampler, double bx, double cx, double by, double cy, double* out) {
  if (!sampler || !out) return null_argument(!sampler ? "sampler" : "out");
  return guarded([&] {
    *out = sampler->sampler.overlap(bx, cx, by, cy);
    return GP_OK;
  });
}

gp_status gp_density_build(const gp_potential* pot, double b, double c, gp_density** out) {
  if (!pot || !out) return null_argument(!pot ? "pot" : "out");
  return guarded([&] {
    *out = new gp_density{gradphi::TabulatedDensity::build(pot->pot, b, c)};
    return GP_OK;
  });
}

void gp_density_destroy(gp_density* density) { delete density; }

gp_status gp_density_size(const gp_density* density, size_t* n) {
  if (!density || !n) return null_argument(!density ? "density" : "n");
  return guarded([&] {
    *n = density->density.grid().size();
    return GP_OK;
  });
}

gp_status gp_density_table(const gp_density* density, double* x, double* pdf, double* cdf, size_t n) {
  if (!density) return null_argument("density");
  return guarded([&] {
    const auto& d = density->density;
    const auto grid = d.grid();
    if (n != grid.size()) return fail_with(GP_ERR_BUFFER_TOO_SMALL, "n must equal gp_density_size");
    const auto logd = d.log_density();
    const auto cum = d.cdf();
    for (size_t i = 0; i < n; ++i) {
      if (x) x[i] = grid[i];
      if (pdf) pdf[i] = std::exp(logd[i]) / d.norm();
      if (cdf) cdf[i] = cum[i];
    }
    return GP_OK;
  });
}

gp_status gp_density_cdf(const gp_density* density, double x, double* out) {
  if (!density || !out) return null_argument(!density ? "density" : "out");
  return guarded([&] {
    *out = density->density.cdf_at(x);
    return GP_OK;
  });
}

gp_status gp_density_quantile(const gp_density* density, double p, double* out) {
  if (!density || !out) return null_argument(!density ? "density" : "out");
  return guarded([&] {
    *out = density->density.quantile(p);
    return GP_OK;
  });
}

gp_status gp_spectral_gap(int n, double* out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = gradphi::spectral_gap(n);
    return GP_OK;
  });
}

gp_status gp_fourier_stat(const double* heights, int n, int j, double* out) {
  if (!heights || !out) return null_argument(!heights ? "heights" : "out");
  return guarded([&] {
    *out = gradphi::fourier_stat(interface_from(heights, n).gauged(), j);
    return GP_OK;
  });
}

gp_status gp_heat_mean(const double* heights, int n, double t, double* out) {
  if (!heights || !out) return null_argument(!heights ? "heights" : "out");
  return guarded([&] {
    const auto m = gradphi::heat_mean_solution(interface_from(heights, n), t);
    std::copy(m.begin(), m.end(), out);
    return GP_OK;
  });
}

gp_status gp_simulate(const gp_sampler* sampler, const double* heights, int n, uint64_t seed, double horizon,
                      double* out) {
  if (!sampler || !heights || !out) return null_argument(!sampler ? "sampler" : !heights ? "heights" : "out");
  return guarded([&] {
    const auto x0 = interface_from(heights, n);
    const auto x = gradphi::run_single(sampler->sampler, x0, gradphi::EventStream(seed, n, horizon));
    const auto h = x.heights();
    std::copy(h.begin(), h.end(), out);
    return GP_OK;
  });
}

gp_status gp_config_create(gp_config** out) {
  if (!out) return null_argument("out");
  return guarded([&] {
    *out = new gp_config{};
    return GP_OK;
  });
}

void gp_config_destroy(gp_config* config) { delete config; }

gp_status gp_config_load(gp_config* config, const char* path) {
  if (!config || !path) return null_argument(!config ? "config" : "path");
  return guarded([&] {
    for (auto& [k, v] : gradphi::read_config_file(path)) config->values[k] = v;
    return GP_OK;
  });
}

gp_status gp_config_set(gp_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return null_argument(!config ? "config" : !key ? "key" : "value");
  return guarded([&] {
    if (!gradphi::config_defaults().count(key))
      return fail_with(GP_ERR_CONFIG, std::string(key) + ": unknown key");
    config->values[key] = value;
    return GP_OK;
  });
}

gp_status gp_config_get(const gp_config* config, const char* key, char* value, size_t capacity, size_t* required) {
  if (!config || !key) return null_argument(!config ? "config" : "key");
  return guarded([&] {
    auto it = config->values.find(key);
    if (it != config->values.end()) return copy_out(it->second, value, capacity, required);
    auto d = gradphi::config_defaults().find(key);
    if (d == gradphi::config_defaults().end()) return fail_with(GP_ERR_CONFIG, std::string(key) + ": unknown key");
    return copy_out(d->second, value, capacity, required);
  });
}

gp_status gp_config_validate(const gp_config* config) {
  if (!config) return null_argument("config");
  return guarded([&] {
    gradphi::build_config(config->values);
    return GP_OK;
  });
}

gp_status gp_run_experiment(const gp_config* config, gp_run** out) {
  if (!config || !out) return null_argument(!config ? "config" : "out");
  return guarded([&] {
    const auto cfg = gradphi::build_config(config->values);
    *out = new gp_run{gradphi::run_experiment(cfg, gradphi::canonical_config(config->values))};
    return GP_OK;
  });
}

void gp_run_destroy(gp_run* run) { delete run; }
const char* gp_run_directory(const gp_run* run) { return run ? run->result.directory.c_str() : ""; }
const char* gp_run_summary(const gp_run* run) { return run ? run->result.summary_json.c_str() : ""; }
int gp_run_passed(const gp_run* run) { return run && run->result.passed ? 1 : 0; }
size_t gp_run_file_count(const gp_run* run) { return run ? run->result.files.size() : 0; }
const char* gp_run_file(const gp_run* run, size_t index) {
  return run && index < run->result.files.size() ? run->result.files[index].c_str() : nullptr;
}

}  // extern "C"
