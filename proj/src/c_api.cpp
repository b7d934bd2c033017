#include "pipla/pipla.h"

#include <cstring>
#include <memory>
#include <sstream>

#include "pipla/config.hpp"
#include "pipla/experiments.hpp"
#include "pipla/samplers.hpp"

struct pipla_config {
  pipla::ExperimentConfig cfg;
};

struct pipla_model {
  pipla::ModelPtr model;
};

struct pipla_sampler {
  pipla::ModelPtr model;
  pipla::AlgoConfig cfg;
  pipla::ParticleSystem state;
  pipla::NoiseStream noise;
  std::unique_ptr<pipla::WorkerPool> pool;
  pipla::StepWorkspace ws;
};

namespace {

thread_local std::string g_last_error;

pipla_status status_of(pipla::ErrorKind k) {
  switch (k) {
    case pipla::ErrorKind::Config: return PIPLA_ERR_CONFIG;
    case pipla::ErrorKind::Divergence: return PIPLA_ERR_DIVERGED;
    case pipla::ErrorKind::Domain: return PIPLA_ERR_DOMAIN;
    case pipla::ErrorKind::Unsupported: return PIPLA_ERR_UNSUPPORTED;
    case pipla::ErrorKind::Io: return PIPLA_ERR_IO;
    case pipla::ErrorKind::InvalidArgument: return PIPLA_ERR_INVALID_ARGUMENT;
    case pipla::ErrorKind::Numeric: return PIPLA_ERR_DOMAIN;
    case pipla::ErrorKind::Internal: return PIPLA_ERR_INTERNAL;
  }
  return PIPLA_ERR_INTERNAL;
}

template <class F>
pipla_status guard(F&& f) {
  try {
    g_last_error.clear();
    return f();
  } catch (const pipla::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind);
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PIPLA_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PIPLA_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return PIPLA_ERR_INTERNAL;
  }
}

pipla_status invalid(const char* what) {
  g_last_error = what;
  return PIPLA_ERR_INVALID_ARGUMENT;
}

// forwards complete lines to the callback
class LineSink : public std::stringbuf {
 public:
  LineSink(pipla_log_fn fn, void* user) : fn_(fn), user_(user) {}
  ~LineSink() override { flush_lines(true); }

 protected:
  int sync() override {
    flush_lines(false);
    return 0;
  }
  int_type overflow(int_type ch) override {
    const int_type r = std::stringbuf::overflow(ch);
    if (ch == '\n') flush_lines(false);
    return r;
  }

 private:
  void flush_lines(bool all) {
    std::string s = str();
    std::size_t start = 0, nl;
    while ((nl = s.find('\n', start)) != std::string::npos) {
      if (fn_) fn_(s.substr(start, nl - start).c_str(), user_);
      start = nl + 1;
    }
    if (all && start < s.size() && fn_) fn_(s.substr(start).c_str(), user_);
    str(all ? std::string() : s.substr(start));
  }
  pipla_log_fn fn_;
  void* user_;
};

// IO failures map to the config exit code for commands
pipla_status command_status(pipla_status s) { return s == PIPLA_ERR_IO ? PIPLA_ERR_CONFIG : s; }

}  // namespace

extern "C" {

const char* pipla_version(void) { return pipla::kToolVersion; }

const char* pipla_status_string(pipla_status s) {
  switch (s) {
    case PIPLA_OK: return "ok";
    case PIPLA_ERR_CONFIG: return "config error";
    case PIPLA_ERR_DIVERGED: return "diverged";
    case PIPLA_ERR_PROX_CHECK: return "prox check failed";
    case PIPLA_ERR_IO: return "io error";
    case PIPLA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case PIPLA_ERR_DOMAIN: return "domain error";
    case PIPLA_ERR_UNSUPPORTED: return "unsupported";
    case PIPLA_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* pipla_last_error(void) { return g_last_error.c_str(); }

pipla_status pipla_config_create(pipla_config** out) {
  if (!out) return invalid("out is null");
  return guard([&] {
    *out = new pipla_config{pipla::default_experiment()};
    return PIPLA_OK;
  });
}

pipla_status pipla_config_load(const char* path, pipla_config** out) {
  if (!path || !out) return invalid("null argument");
  return guard([&] {
    auto c = std::make_unique<pipla_config>(pipla_config{pipla::load_config(path)});
    *out = c.release();
    return PIPLA_OK;
  });
}

pipla_status pipla_config_parse(const char* text, pipla_config** out) {
  if (!text || !out) return invalid("null argument");
  return guard([&] {
    auto c = std::make_unique<pipla_config>(pipla_config{pipla::default_experiment()});
    pipla::parse_config_text(text, c->cfg);
    *out = c.release();
    return PIPLA_OK;
  });
}

pipla_status pipla_config_set(pipla_config* cfg, const char* key, const char* value) {
  if (!cfg || !key || !value) return invalid("null argument");
  return guard([&] {
    pipla::set_config_value(cfg->cfg, key, value);
    return PIPLA_OK;
  });
}

pipla_status pipla_config_render(const pipla_config* cfg, char* buf, size_t cap, size_t* needed) {
  if (!cfg) return invalid("cfg is null");
  return guard([&] {
    const std::string s = pipla::render_config(cfg->cfg);
    if (needed) *needed = s.size() + 1;
    if (buf && cap > 0) {
      const std::size_t n = std::min(cap - 1, s.size());
      std::memcpy(buf, s.data(), n);
      buf[n] = '\0';
    }
    return PIPLA_OK;
  });
}

void pipla_config_destroy(pipla_config* cfg) { delete cfg; }

pipla_status pipla_run(const pipla_config* cfg, pipla_log_fn log, void* user) {
  if (!cfg) return invalid("cfg is null");
  LineSink sink(log, user);
  std::ostream os(&sink);
  return command_status(guard([&] {
    pipla::cmd_run(cfg->cfg, os);
    return PIPLA_OK;
  }));
}

pipla_status pipla_sweep(const pipla_config* cfg, pipla_log_fn log, void* user) {
  if (!cfg) return invalid("cfg is null");
  LineSink sink(log, user);
  std::ostream os(&sink);
  return command_status(guard([&] {
    pipla::cmd_sweep(cfg->cfg, os);
    return PIPLA_OK;
  }));
}

pipla_status pipla_prox_check(const pipla_config* cfg, pipla_log_fn log, void* user) {
  if (!cfg) return invalid("cfg is null");
  LineSink sink(log, user);
  std::ostream os(&sink);
  return command_status(guard([&] {
    if (pipla::cmd_prox_check(cfg->cfg, os)) return PIPLA_OK;
    g_last_error = "one or more prox-check rows failed";
    return PIPLA_ERR_PROX_CHECK;
  }));
}

pipla_status pipla_datagen(const pipla_config* cfg, pipla_log_fn log, void* user) {
  if (!cfg) return invalid("cfg is null");
  LineSink sink(log, user);
  std::ostream os(&sink);
  return command_status(guard([&] {
    pipla::cmd_datagen(cfg->cfg, os);
    return PIPLA_OK;
  }));
}

pipla_status pipla_model_create(const pipla_config* cfg, pipla_model** out) {
  if (!cfg || !out) return invalid("null argument");
  return guard([&] {
    *out = new pipla_model{pipla::build_model(cfg->cfg.model)};
    return PIPLA_OK;
  });
}

pipla_status pipla_model_dims(const pipla_model* m, int* d_theta, int* d_x) {
  if (!m) return invalid("model is null");
  if (d_theta) *d_theta = m->model->d_theta();
  if (d_x) *d_x = m->model->d_x();
  return PIPLA_OK;
}

void pipla_model_destroy(pipla_model* m) { delete m; }

pipla_status pipla_sampler_create(const pipla_model* m, const pipla_config* cfg, pipla_sampler** out) {
  if (!m || !cfg || !out) return invalid("null argument");
  return guard([&] {
    auto s = std::make_unique<pipla_sampler>();
    s->model = m->model;
    s->cfg = cfg->cfg.algo;
    s->cfg.workers = pipla::resolve_workers(s->cfg.workers);
    pipla::validate_config(s->cfg, *s->model);
    s->noise = pipla::NoiseStream(s->cfg.seed, s->cfg.noise_enabled);
    s->pool = std::make_unique<pipla::WorkerPool>(s->cfg.workers);
    s->model->init(s->cfg.seed, s->cfg.n_particles, s->state.theta, s->state.X);
    s->state.iteration = 0;
    *out = s.release();
    return PIPLA_OK;
  });
}

pipla_status pipla_sampler_step(pipla_sampler* s, int n_steps) {
  if (!s) return invalid("sampler is null");
  if (n_steps < 0) return invalid("n_steps must be >= 0");
  return guard([&] {
    for (int k = 0; k < n_steps; ++k) pipla::step(s->state, *s->model, s->cfg, s->noise, *s->pool, s->ws);
    return PIPLA_OK;
  });
}

pipla_status pipla_sampler_iteration(const pipla_sampler* s, int64_t* iteration) {
  if (!s || !iteration) return invalid("null argument");
  *iteration = s->state.iteration;
  return PIPLA_OK;
}

pipla_status pipla_sampler_theta(const pipla_sampler* s, double* out, size_t n) {
  if (!s || !out) return invalid("null argument");
  if (n < std::size_t(s->state.theta.size())) return invalid("output buffer too small");
  std::memcpy(out, s->state.theta.data(), sizeof(double) * std::size_t(s->state.theta.size()));
  return PIPLA_OK;
}

pipla_status pipla_sampler_particles(const pipla_sampler* s, double* out, size_t n) {
  if (!s || !out) return invalid("null argument");
  if (n < std::size_t(s->state.X.size())) return invalid("output buffer too small");
  std::memcpy(out, s->state.X.data(), sizeof(double) * std::size_t(s->state.X.size()));
  return PIPLA_OK;
}

void pipla_sampler_destroy(pipla_sampler* s) { delete s; }

}  // extern "C"
