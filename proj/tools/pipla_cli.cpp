#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipla/pipla.h"

namespace {

void print_line(const char* line, void*) { std::printf("%s\n", line); }

int exit_code(pipla_status s) {
  switch (s) {
    case PIPLA_OK: return 0;
    case PIPLA_ERR_DIVERGED: return 2;
    case PIPLA_ERR_PROX_CHECK: return 3;
    default: return 1;
  }
}

int fail(pipla_status s) {
  std::fprintf(stderr, "error: %s: %s\n", pipla_status_string(s), pipla_last_error());
  return exit_code(s);
}

struct Options {
  std::string config;
  std::string out;
  std::string seed;
  int workers = 0;
  bool print_defaults = false;
  std::vector<std::string> sets;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "configuration file (sections of key = value)");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "seed (algorithm seed, or data seed for datagen)");
  sub->add_option("--workers", o.workers, "worker threads (PIPLA_WORKERS overrides)")->check(CLI::PositiveNumber);
  sub->add_flag("--print-defaults", o.print_defaults, "print the resolved configuration and exit");
  sub->add_option("--set", o.sets, "override section.key=value (repeatable)");
}

int render(const pipla_config* cfg) {
  std::size_t need = 0;
  pipla_status s = pipla_config_render(cfg, nullptr, 0, &need);
  if (s != PIPLA_OK) return fail(s);
  std::string buf(need, '\0');
  s = pipla_config_render(cfg, buf.data(), buf.size(), &need);
  if (s != PIPLA_OK) return fail(s);
  std::fputs(buf.c_str(), stdout);
  return 0;
}

int execute(const std::string& command, const Options& o) {
  pipla_config* cfg = nullptr;
  pipla_status s = o.config.empty() ? pipla_config_create(&cfg) : pipla_config_load(o.config.c_str(), &cfg);
  if (s != PIPLA_OK) return fail(s);
  struct Guard {
    pipla_config* c;
    ~Guard() { pipla_config_destroy(c); }
  } guard{cfg};

  auto set = [&](const std::string& k, const std::string& v) {
    const pipla_status r = pipla_config_set(cfg, k.c_str(), v.c_str());
    return r;
  };
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "error: config error: --set expects section.key=value, got '%s'\n", kv.c_str());
      return 1;
    }
    if ((s = set(kv.substr(0, eq), kv.substr(eq + 1))) != PIPLA_OK) return fail(s);
  }
  if (!o.out.empty() && (s = set("output.dir", o.out)) != PIPLA_OK) return fail(s);
  if (o.workers > 0 && (s = set("algorithm.workers", std::to_string(o.workers))) != PIPLA_OK) return fail(s);
  if (!o.seed.empty()) {
    if (command == "datagen") {
      s = set("model.data_seed", o.seed);
    } else if (command == "prox-check") {
      s = set("prox_check.seed", o.seed);
    } else {
      s = set("algorithm.seed", o.seed);
      if (s == PIPLA_OK) s = set("sweep.seeds", o.seed);
    }
    if (s != PIPLA_OK) return fail(s);
  }
  if (o.print_defaults) return render(cfg);

  if (command == "run") s = pipla_run(cfg, print_line, nullptr);
  else if (command == "sweep") s = pipla_sweep(cfg, print_line, nullptr);
  else if (command == "prox-check") s = pipla_prox_check(cfg, print_line, nullptr);
  else s = pipla_datagen(cfg, print_line, nullptr);
  std::fflush(stdout);
  return s == PIPLA_OK ? 0 : fail(s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proximal interacting particle Langevin samplers for marginal likelihood estimation"};
  app.set_version_flag("--version", std::string(pipla_version()));
  bool top_defaults = false;
  app.add_flag("--print-defaults", top_defaults, "print the default configuration and exit");

  Options o;
  std::string chosen;
  const std::vector<std::pair<std::string, std::string>> subs = {
      {"run", "run one sampler and write trajectory.csv, summary.csv, timing.csv, manifest"},
      {"sweep", "grid over algorithms, N, gamma, lambda and seeds; writes sweep.csv and aggregate.csv"},
      {"prox-check", "verify the proximal operators against numeric oracles; writes prox_report.csv"},
      {"datagen", "write the model's synthetic dataset"},
  };
  for (const auto& [name, help] : subs) {
    CLI::App* sub = app.add_subcommand(name, help);
    add_common(sub, o);
    sub->callback([&chosen, n = name] { chosen = n; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  if (chosen.empty()) {
    if (top_defaults) {
      pipla_config* cfg = nullptr;
      const pipla_status s = pipla_config_create(&cfg);
      if (s != PIPLA_OK) return fail(s);
      const int rc = render(cfg);
      pipla_config_destroy(cfg);
      return rc;
    }
    std::fputs(app.help().c_str(), stderr);
    return 1;
  }
  return execute(chosen, o);
}
