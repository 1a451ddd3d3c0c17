#ifndef GRADPHI_H
#define GRADPHI_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define GP_API __attribute__((visibility("default")))
#else
#define GP_API
#endif

typedef enum gp_status {
  GP_OK = 0,
  GP_ERR_INVALID_ARGUMENT = 1,
  GP_ERR_INVALID_POTENTIAL = 2,
  GP_ERR_QUADRATURE = 3,
  GP_ERR_BRACKET_NOT_FOUND = 4,
  GP_ERR_ORDER_VIOLATION = 5,
  GP_ERR_INSUFFICIENT_DATA = 6,
  GP_ERR_CONFIG = 7,
  GP_ERR_IO = 8,
  GP_ERR_ESTIMATOR = 9,
  GP_ERR_BUFFER_TOO_SMALL = 10,
  GP_ERR_INTERNAL = 99
} gp_status;

typedef struct gp_potential gp_potential;
typedef struct gp_sampler gp_sampler;
typedef struct gp_density gp_density;
typedef struct gp_config gp_config;
typedef struct gp_run gp_run;

/* Message of the most recent failure on the calling thread ("" if none). */
GP_API const char* gp_last_error(void);
GP_API const char* gp_status_name(gp_status status);
GP_API const char* gp_version(void);

/* Strings are copied into caller buffers. When `capacity` is too small the
   call returns GP_ERR_BUFFER_TOO_SMALL and `*required` (if non-null) holds the
   size needed including the terminator. */

/* Potentials: "gaussian", "sos", "power:<p>", "table:<path>". Potentials that
   fail the convexity, growth or non-affinity checks are rejected. */
GP_API gp_status gp_potential_create(const char* spec, gp_potential** out);
GP_API void gp_potential_destroy(gp_potential* pot);
GP_API gp_status gp_potential_eval(const gp_potential* pot, double u, double* out);
GP_API gp_status gp_potential_partition(const gp_potential* pot, double a, double* out);
GP_API gp_status gp_potential_tilt_solve(const gp_potential* pot, double mean, double* lambda_out);
/* Writes the three-assumption report; *passed is 1 when all hold. */
GP_API gp_status gp_potential_verify(const gp_potential* pot, int* passed, char* report, size_t capacity,
                                     size_t* required);

/* Conditional law rho_{b,c} of a site given neighbours b and c. */
GP_API gp_status gp_sampler_create(const gp_potential* pot, int force_tabulated, gp_sampler** out);
GP_API void gp_sampler_destroy(gp_sampler* sampler);
GP_API gp_status gp_sampler_quantile(const gp_sampler* sampler, double b, double c, double p, double* out);
GP_API gp_status gp_sampler_overlap(const gp_sampler* sampler, double bx, double cx, double by, double cy,
                                    double* out);

/* Tabulated density of rho_{b,c}. */
GP_API gp_status gp_density_build(const gp_potential* pot, double b, double c, gp_density** out);
GP_API void gp_density_destroy(gp_density* density);
GP_API gp_status gp_density_size(const gp_density* density, size_t* n);
/* Fills abscissae, normalised pdf and cdf; each array holds `n` entries. */
GP_API gp_status gp_density_table(const gp_density* density, double* x, double* pdf, double* cdf, size_t n);
GP_API gp_status gp_density_cdf(const gp_density* density, double x, double* out);
GP_API gp_status gp_density_quantile(const gp_density* density, double p, double* out);

/* Heights x_0..x_N, so arrays hold n + 1 values. */
GP_API gp_status gp_spectral_gap(int n, double* out);
GP_API gp_status gp_fourier_stat(const double* heights, int n, int j, double* out);
GP_API gp_status gp_heat_mean(const double* heights, int n, double t, double* out);
/* Single heat-bath trajectory to `horizon` driven by the stream of `seed`. */
GP_API gp_status gp_simulate(const gp_sampler* sampler, const double* heights, int n, uint64_t seed,
                             double horizon, double* out);

/* Configuration: INI sections flattened to "section.key". */
GP_API gp_status gp_config_create(gp_config** out);
GP_API void gp_config_destroy(gp_config* config);
GP_API gp_status gp_config_load(gp_config* config, const char* path);
GP_API gp_status gp_config_set(gp_config* config, const char* key, const char* value);
GP_API gp_status gp_config_get(const gp_config* config, const char* key, char* value, size_t capacity,
                               size_t* required);
/* Checks every field; the error message lists all problems. */
GP_API gp_status gp_config_validate(const gp_config* config);

/* Runs the configured experiment and writes its artifacts. */
GP_API gp_status gp_run_experiment(const gp_config* config, gp_run** out);
GP_API void gp_run_destroy(gp_run* run);
GP_API const char* gp_run_directory(const gp_run* run);
GP_API const char* gp_run_summary(const gp_run* run);
GP_API int gp_run_passed(const gp_run* run);
GP_API size_t gp_run_file_count(const gp_run* run);
GP_API const char* gp_run_file(const gp_run* run, size_t index);

#ifdef __cplusplus
}
#endif

#endif
