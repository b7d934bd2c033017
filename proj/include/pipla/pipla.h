#ifndef PIPLA_PIPLA_H
#define PIPLA_PIPLA_H

#include <stddef.h>
#include <stdint.h>

#if defined(PIPLA_BUILD)
#define PIPLA_API __attribute__((visibility("default")))
#else
#define PIPLA_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pipla_status {
  PIPLA_OK = 0,
  PIPLA_ERR_CONFIG = 1,
  PIPLA_ERR_DIVERGED = 2,
  PIPLA_ERR_PROX_CHECK = 3,
  PIPLA_ERR_IO = 4,
  PIPLA_ERR_INVALID_ARGUMENT = 5,
  PIPLA_ERR_DOMAIN = 6,
  PIPLA_ERR_UNSUPPORTED = 7,
  PIPLA_ERR_INTERNAL = 8
} pipla_status;

typedef struct pipla_config pipla_config;
typedef struct pipla_model pipla_model;
typedef struct pipla_sampler pipla_sampler;

/* receives one line of progress output, without the trailing newline */
typedef void (*pipla_log_fn)(const char* line, void* user);

PIPLA_API const char* pipla_version(void);
PIPLA_API const char* pipla_status_string(pipla_status s);
/* message of the last failing call on this thread; empty string if none */
PIPLA_API const char* pipla_last_error(void);

PIPLA_API pipla_status pipla_config_create(pipla_config** out);
PIPLA_API pipla_status pipla_config_load(const char* path, pipla_config** out);
PIPLA_API pipla_status pipla_config_parse(const char* text, pipla_config** out);
/* key is "section.key", e.g. "algorithm.gamma" */
PIPLA_API pipla_status pipla_config_set(pipla_config* cfg, const char* key, const char* value);
/* writes at most cap bytes including the terminator; *needed gets the full size including the terminator */
PIPLA_API pipla_status pipla_config_render(const pipla_config* cfg, char* buf, size_t cap, size_t* needed);
PIPLA_API void pipla_config_destroy(pipla_config* cfg);

/* experiment commands; outputs go to output.dir */
PIPLA_API pipla_status pipla_run(const pipla_config* cfg, pipla_log_fn log, void* user);
PIPLA_API pipla_status pipla_sweep(const pipla_config* cfg, pipla_log_fn log, void* user);
PIPLA_API pipla_status pipla_prox_check(const pipla_config* cfg, pipla_log_fn log, void* user);
PIPLA_API pipla_status pipla_datagen(const pipla_config* cfg, pipla_log_fn log, void* user);

PIPLA_API pipla_status pipla_model_create(const pipla_config* cfg, pipla_model** out);
PIPLA_API pipla_status pipla_model_dims(const pipla_model* m, int* d_theta, int* d_x);
PIPLA_API void pipla_model_destroy(pipla_model* m);

/* particles are initialised from algorithm.seed; the model must outlive the sampler */
PIPLA_API pipla_status pipla_sampler_create(const pipla_model* m, const pipla_config* cfg, pipla_sampler** out);
PIPLA_API pipla_status pipla_sampler_step(pipla_sampler* s, int n_steps);
PIPLA_API pipla_status pipla_sampler_iteration(const pipla_sampler* s, int64_t* iteration);
PIPLA_API pipla_status pipla_sampler_theta(const pipla_sampler* s, double* out, size_t n);
/* row-major n_particles x d_x */
PIPLA_API pipla_status pipla_sampler_particles(const pipla_sampler* s, double* out, size_t n);
PIPLA_API void pipla_sampler_destroy(pipla_sampler* s);

#ifdef __cplusplus
}
#endif

#endif
