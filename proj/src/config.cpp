#include "pipla/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace pipla {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

std::string shortest(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

template <class T>
T parse_num(const std::string& key, const std::string& s) {
  T v{};
  const auto* end = s.data() + s.size();
  auto r = std::from_chars(s.data(), end, v);
  if (s.empty() || r.ec != std::errc() || r.ptr != end)
    throw config_error("invalid value for '" + key + "': '" + s + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw config_error("invalid value for '" + key + "': '" + s + "' (expected true/false)");
}

template <class T>
std::vector<T> parse_num_list(const std::string& key, const std::string& s, bool allow_range) {
  std::vector<T> out;
  for (const auto& item : split_list(s)) {
    const auto dots = item.find("..");
    if (allow_range && dots != std::string::npos) {
      const T a = parse_num<T>(key, trim(item.substr(0, dots)));
      const T b = parse_num<T>(key, trim(item.substr(dots + 2)));
      if (b < a) throw config_error("invalid range for '" + key + "': '" + item + "'");
      for (T v = a; v <= b; ++v) out.push_back(v);
    } else {
      out.push_back(parse_num<T>(key, item));
    }
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ", ";
    if constexpr (std::is_same_v<T, double>)
      s += shortest(v[i]);
    else if constexpr (std::is_same_v<T, std::string>)
      s += v[i];
    else
      s += std::to_string(v[i]);
  }
  return s;
}

struct Entry {
  std::string section, key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define PIPLA_INT(sec, k, field)                                                      \
  Entry {                                                                             \
    sec, k, [](const ExperimentConfig& c) { return std::to_string(c.field); },        \
        [](ExperimentConfig& c, const std::string& v) { c.field = parse_num<decltype(c.field)>(sec "." k, v); } \
  }
#define PIPLA_DBL(sec, k, field)                                                                         \
  Entry {                                                                                                \
    sec, k, [](const ExperimentConfig& c) { return shortest(c.field); },                                 \
        [](ExperimentConfig& c, const std::string& v) { c.field = parse_num<double>(sec "." k, v); }     \
  }
#define PIPLA_STR(sec, k, field)                                                                         \
  Entry {                                                                                                \
    sec, k, [](const ExperimentConfig& c) { return c.field; },                                           \
        [](ExperimentConfig& c, const std::string& v) { c.field = v; }                                   \
  }
#define PIPLA_BOOL(sec, k, field)                                                                        \
  Entry {                                                                                                \
    sec, k, [](const ExperimentConfig& c) { return std::string(c.field ? "true" : "false"); },           \
        [](ExperimentConfig& c, const std::string& v) { c.field = parse_bool(sec "." k, v); }            \
  }

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      PIPLA_STR("model", "name", model.name),
      PIPLA_INT("model", "data_seed", model.data_seed),
      PIPLA_INT("model", "toy_dim", model.toy_dim),
      PIPLA_DBL("model", "toy_theta", model.toy_theta),
      PIPLA_INT("model", "d_x", model.d_x),
      PIPLA_INT("model", "d_y", model.d_y),
      PIPLA_DBL("model", "theta_true", model.theta_true),
      PIPLA_BOOL("model", "iterative_prox", model.iterative_prox),
      PIPLA_STR("model", "image", model.image),
      PIPLA_INT("model", "image_size", model.image_size),
      PIPLA_INT("model", "blur", model.blur),
      PIPLA_DBL("model", "noise_sigma", model.noise_sigma),
      PIPLA_STR("model", "tv_solver", model.tv_solver),
      PIPLA_INT("model", "tv_iterations", model.tv_iterations),
      PIPLA_DBL("model", "tv_tolerance", model.tv_tolerance),
      PIPLA_INT("model", "rows", model.rows),
      PIPLA_INT("model", "cols", model.cols),
      PIPLA_INT("model", "rank", model.rank),
      PIPLA_DBL("model", "mask_fraction", model.mask_fraction),
      PIPLA_DBL("model", "completion_sigma", model.completion_sigma),
      PIPLA_INT("model", "hidden", model.hidden),
      PIPLA_STR("model", "activation", model.activation),
      PIPLA_INT("model", "n_train", model.n_train),
      PIPLA_INT("model", "n_test", model.n_test),
      PIPLA_INT("model", "features", model.features),
      PIPLA_STR("model", "idx_images", model.idx_images),
      PIPLA_STR("model", "idx_labels", model.idx_labels),
      PIPLA_INT("model", "class_a", model.class_a),
      PIPLA_INT("model", "class_b", model.class_b),

      Entry{"algorithm", "name", [](const ExperimentConfig& c) { return to_string(c.algo.algorithm); },
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.algo.algorithm = parse_algorithm(v);
              } catch (const Error&) {
                throw config_error("invalid value for 'algorithm.name': '" + v + "'");
              }
            }},
      PIPLA_DBL("algorithm", "gamma", algo.gamma),
      PIPLA_DBL("algorithm", "lambda", algo.lambda),
      PIPLA_INT("algorithm", "n_particles", algo.n_particles),
      PIPLA_INT("algorithm", "n_steps", algo.n_steps),
      PIPLA_INT("algorithm", "seed", algo.seed),
      PIPLA_INT("algorithm", "burn_in", algo.burn_in),
      Entry{"algorithm", "estimator", [](const ExperimentConfig& c) { return to_string(c.algo.estimator); },
            [](ExperimentConfig& c, const std::string& v) {
              try {
                c.algo.estimator = parse_estimator(v);
              } catch (const Error&) {
                throw config_error("invalid value for 'algorithm.estimator': '" + v + "'");
              }
            }},
      Entry{"algorithm", "theta_grad_scale",
            [](const ExperimentConfig& c) {
              return join(std::vector<double>(c.algo.theta_grad_scale.data(),
                                              c.algo.theta_grad_scale.data() + c.algo.theta_grad_scale.size()));
            },
            [](ExperimentConfig& c, const std::string& v) {
              auto xs = parse_num_list<double>("algorithm.theta_grad_scale", v, false);
              c.algo.theta_grad_scale = Eigen::Map<Vec>(xs.data(), Eigen::Index(xs.size()));
            }},
      PIPLA_BOOL("algorithm", "noise_enabled", algo.noise_enabled),
      PIPLA_INT("algorithm", "snapshot_stride", algo.snapshot_stride),
      PIPLA_INT("algorithm", "workers", algo.workers),

      Entry{"sweep", "algorithms", [](const ExperimentConfig& c) { return join(c.sweep.algorithms); },
            [](ExperimentConfig& c, const std::string& v) {
              c.sweep.algorithms.clear();
              for (const auto& a : split_list(v)) {
                try {
                  c.sweep.algorithms.push_back(to_string(parse_algorithm(a)));
                } catch (const Error&) {
                  throw config_error("invalid value for 'sweep.algorithms': '" + a + "'");
                }
              }
            }},
      Entry{"sweep", "n_particles", [](const ExperimentConfig& c) { return join(c.sweep.n_particles); },
            [](ExperimentConfig& c, const std::string& v) {
              c.sweep.n_particles = parse_num_list<int>("sweep.n_particles", v, false);
            }},
      Entry{"sweep", "gamma", [](const ExperimentConfig& c) { return join(c.sweep.gamma); },
            [](ExperimentConfig& c, const std::string& v) {
              c.sweep.gamma = parse_num_list<double>("sweep.gamma", v, false);
            }},
      Entry{"sweep", "lambda", [](const ExperimentConfig& c) { return join(c.sweep.lambda); },
            [](ExperimentConfig& c, const std::string& v) {
              c.sweep.lambda = parse_num_list<double>("sweep.lambda", v, false);
            }},
      Entry{"sweep", "seeds", [](const ExperimentConfig& c) { return join(c.sweep.seeds); },
            [](ExperimentConfig& c, const std::string& v) {
              c.sweep.seeds = parse_num_list<std::uint64_t>("sweep.seeds", v, true);
            }},

      PIPLA_INT("prox_check", "cases", prox_check.cases),
      PIPLA_INT("prox_check", "seed", prox_check.seed),
      Entry{"prox_check", "operators", [](const ExperimentConfig& c) { return join(c.prox_check.operators); },
            [](ExperimentConfig& c, const std::string& v) { c.prox_check.operators = split_list(v); }},
      PIPLA_STR("prox_check", "fault", prox_check.fault),

      PIPLA_STR("output", "dir", out_dir),
  };
  return table;
}

#undef PIPLA_INT
#undef PIPLA_DBL
#undef PIPLA_STR
#undef PIPLA_BOOL

const Entry* find_entry(const std::string& section, const std::string& key) {
  for (const auto& e : entries())
    if (e.section == section && e.key == key) return &e;
  return nullptr;
}

}  // namespace

ExperimentConfig default_experiment() {
  ExperimentConfig c;
  c.algo.gamma = 0.05;
  c.algo.lambda = 0.35;
  c.algo.n_particles = 50;
  c.algo.n_steps = 5000;
  return c;
}

void parse_config_text(const std::string& text, ExperimentConfig& cfg, const std::string& source) {
  std::istringstream in(text);
  std::string line, section;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw config_error(where + "malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const auto& e : entries()) known |= e.section == section;
      if (!known) throw config_error(where + "unknown section '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error(where + "expected 'key = value', got '" + line + "'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw config_error(where + "key '" + key + "' outside any section");
    const Entry* e = find_entry(section, key);
    if (!e) throw config_error(where + "unknown key '" + section + "." + key + "'");
    if (!seen.insert(section + "." + key).second)
      throw config_error(where + "duplicate key '" + section + "." + key + "'");
    try {
      e->set(cfg, value);
    } catch (const Error& err) {
      throw config_error(where + err.what());
    }
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw config_error("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  ExperimentConfig cfg = default_experiment();
  parse_config_text(ss.str(), cfg, path);
  return cfg;
}

void set_config_value(ExperimentConfig& cfg, const std::string& section_dot_key, const std::string& value) {
  const auto dot = section_dot_key.find('.');
  if (dot == std::string::npos) throw config_error("expected section.key, got '" + section_dot_key + "'");
  const Entry* e = find_entry(section_dot_key.substr(0, dot), section_dot_key.substr(dot + 1));
  if (!e) throw config_error("unknown key '" + section_dot_key + "'");
  e->set(cfg, value);
}

std::string render_config(const ExperimentConfig& cfg) {
  std::string out, section;
  for (const auto& e : entries()) {
    if (e.section != section) {
      if (!section.empty()) out += "\n";
      section = e.section;
      out += "[" + section + "]\n";
    }
    out += e.key + " = " + e.get(cfg) + "\n";
  }
  return out;
}

SweepAxes resolved_axes(const ExperimentConfig& cfg) {
  SweepAxes a = cfg.sweep;
  if (a.algorithms.empty()) a.algorithms = {to_string(cfg.algo.algorithm)};
  if (a.n_particles.empty()) a.n_particles = {cfg.algo.n_particles};
  if (a.gamma.empty()) a.gamma = {cfg.algo.gamma};
  if (a.lambda.empty()) a.lambda = {cfg.algo.lambda};
  if (a.seeds.empty()) a.seeds = {cfg.algo.seed};
  return a;
}

}  // namespace pipla
