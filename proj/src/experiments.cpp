#include "pipla/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

#include "pipla/io.hpp"
#include "pipla/metrics.hpp"
#include "pipla/models.hpp"
#include "pipla/prox_check.hpp"

namespace pipla {

const char* const kToolVersion = "pipla 1.0.0";

ModelPtr build_model(const ModelConfig& mc) {
  const std::string& n = mc.name;
  if (n == "gaussian_toy") {
    if (mc.toy_dim < 1) throw config_error("model.toy_dim must be >= 1");
    return make_gaussian_toy(mc.toy_dim, mc.toy_theta, mc.data_seed);
  }
  if (n == "logistic_laplace" || n == "logistic_uniform") {
    if (mc.d_x < 1 || mc.d_y < 1) throw config_error("model.d_x and model.d_y must be >= 1");
    const auto prior = n == "logistic_laplace" ? LogisticPrior::Laplace : LogisticPrior::Uniform;
    if (prior == LogisticPrior::Uniform && mc.iterative_prox)
      throw config_error("model.iterative_prox applies to logistic_laplace only");
    const double th = mc.theta_true == 0.0 ? std::numeric_limits<double>::quiet_NaN() : mc.theta_true;
    if (prior == LogisticPrior::Uniform && th <= 0) throw config_error("model.theta_true must be positive for logistic_uniform");
    return std::make_shared<LogisticModel>(prior, make_logistic_dataset(prior, mc.data_seed, mc.d_x, mc.d_y, th),
                                           mc.iterative_prox);
  }
  if (n == "deblur") {
    TvSolverConfig tv;
    if (mc.tv_solver == "douglas_rachford") tv.algo = TvSolverConfig::Algo::DouglasRachford;
    else if (mc.tv_solver == "chambolle") tv.algo = TvSolverConfig::Algo::Chambolle;
    else throw config_error("invalid value for 'model.tv_solver': '" + mc.tv_solver + "'");
    if (mc.tv_iterations < 1) throw config_error("model.tv_iterations must be >= 1");
    if (!(mc.tv_tolerance > 0)) throw config_error("model.tv_tolerance must be > 0");
    tv.max_iterations = mc.tv_iterations;
    tv.tolerance = mc.tv_tolerance;
    if (mc.blur < 1) throw config_error("model.blur must be >= 1");
    Mat truth;
    if (mc.image.empty()) {
      if (mc.image_size < 2) throw config_error("model.image_size must be >= 2");
      truth = phantom_image(mc.image_size, mc.image_size);
    } else {
      try {
        truth = read_pgm(mc.image);
      } catch (const Error& e) {
        throw config_error(std::string("model.image: ") + e.what());
      }
    }
    return make_deblur(truth, mc.blur, mc.noise_sigma, mc.data_seed, tv);
  }
  if (n == "completion") {
    if (mc.rows < 2 || mc.cols < 2) throw config_error("model.rows and model.cols must be >= 2");
    if (mc.rank < 1 || mc.rank > std::min(mc.rows, mc.cols)) throw config_error("model.rank out of range");
    if (!(mc.mask_fraction >= 0 && mc.mask_fraction < 1)) throw config_error("model.mask_fraction must be in [0,1)");
    return make_completion(mc.rows, mc.cols, mc.rank, mc.mask_fraction, mc.completion_sigma, mc.data_seed);
  }
  if (n == "bnn") {
    if (mc.n_train < 1 || mc.n_test < 1 || mc.hidden < 1) throw config_error("model.n_train, n_test, hidden must be >= 1");
    BnnSpec spec;
    if (!mc.idx_images.empty() || !mc.idx_labels.empty()) {
      try {
        spec = make_idx_spec(mc.idx_images, mc.idx_labels, mc.class_a, mc.class_b, mc.n_train, mc.n_test);
      } catch (const Error& e) {
        throw config_error(std::string("model.idx_images/idx_labels: ") + e.what());
      }
    } else {
      if (mc.features < 1) throw config_error("model.features must be >= 1");
      spec = make_blob_spec(mc.n_train, mc.n_test, mc.features, mc.data_seed);
    }
    spec.hidden = mc.hidden;
    if (mc.activation == "tanh") spec.activation = Activation::Tanh;
    else if (mc.activation == "clipped_linear") spec.activation = Activation::ClippedLinear;
    else throw config_error("invalid value for 'model.activation': '" + mc.activation + "'");
    return make_bnn(std::move(spec));
  }
  throw config_error("invalid value for 'model.name': '" + n + "'");
}

namespace {

void put(Summary& s, const std::string& k, double v) { s.emplace_back(k, fmt17(v)); }

Vec missing_entries(const Vec& x, const std::vector<int>& observed) {
  std::vector<char> obs(std::size_t(x.size()), 0);
  for (int i : observed) obs[std::size_t(i)] = 1;
  Vec out(x.size() - Eigen::Index(observed.size()));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    if (!obs[std::size_t(i)]) out[k++] = x[i];
  return out;
}

std::string csv_row(const std::vector<std::string>& f) {
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) s += ",";
    s += csv_escape(f[i]);
  }
  return s + "\n";
}

std::string manifest(const ExperimentConfig& cfg, const std::string& command, const std::vector<std::string>& notes) {
  std::string m = "# tool = " + std::string(kToolVersion) + "\n# command = " + command + "\n";
  for (const auto& n : notes) m += "# " + n + "\n";
  return m + render_config(cfg);
}

Summary config_summary(const SplitModel& model, const AlgoConfig& c) {
  Summary s;
  s.emplace_back("model", model.name());
  s.emplace_back("algorithm", to_string(c.algorithm));
  s.emplace_back("estimator", to_string(c.estimator));
  s.emplace_back("seed", std::to_string(c.seed));
  s.emplace_back("n_particles", std::to_string(c.n_particles));
  put(s, "gamma", c.gamma);
  put(s, "lambda", c.lambda);
  s.emplace_back("n_steps", std::to_string(c.n_steps));
  s.emplace_back("burn_in", std::to_string(c.burn_in));
  return s;
}

}  // namespace

Summary model_metrics(const SplitModel& model, const Vec& theta_hat, const Vec& x_mean, const ParticleSystem& fs) {
  Summary s;
  const Vec tt = model.theta_true();
  if (tt.size() == theta_hat.size() && tt.squaredNorm() > 0) put(s, "nmse", nmse(theta_hat, tt));
  if (const auto* m = dynamic_cast<const DeblurModel*>(&model)) {
    const auto& p = m->problem();
    const auto rec = image_scores(m->as_image(x_mean), p.truth);
    const auto obs = image_scores(p.observed, p.truth);
    put(s, "exp_theta", std::exp(theta_hat[0]));
    put(s, "mse_reconstruction", rec.mse);
    put(s, "ssim_reconstruction", rec.ssim);
    put(s, "mse_observed", obs.mse);
    put(s, "ssim_observed", obs.ssim);
    put(s, "noise_sigma", p.sigma);
    s.emplace_back("ssim_window", "8");
    put(s, "ssim_c1", std::pow(0.01 * 255.0, 2));
    put(s, "ssim_c2", std::pow(0.03 * 255.0, 2));
  } else if (const auto* m = dynamic_cast<const CompletionModel*>(&model)) {
    const auto& p = m->problem();
    const Vec truth = Eigen::Map<const Vec>(p.truth.data(), p.truth.size());
    put(s, "nmse_entire", nmse(x_mean, truth));
    if (Eigen::Index(p.observed.size()) < truth.size())
      put(s, "nmse_missing", nmse(missing_entries(x_mean, p.observed), missing_entries(truth, p.observed)));
    put(s, "exp_theta1", std::exp(theta_hat[0]));
    put(s, "sigma_hat", std::exp(theta_hat[1]));
  } else if (const auto* m = dynamic_cast<const BnnModel*>(&model)) {
    const auto sc = classification_scores(fs.X, *m, m->spec().test);
    put(s, "test_error_percent", sc.error_percent);
    put(s, "test_lppd", sc.lppd);
  }
  return s;
}

RunReport execute_run(const SplitModel& model, const AlgoConfig& cfg, WorkerPool* pool) {
  RunReport rep;
  Vec acc = Vec::Zero(model.d_x());
  std::int64_t count = 0;
  const bool average = cfg.estimator == Estimator::Average;
  StepObserver obs = [&](const ParticleSystem& s) {
    if (average && s.iteration > cfg.burn_in) {
      acc += s.X.colwise().mean().transpose();
      ++count;
    }
  };
  rep.result = run(model, cfg, pool, obs);
  const auto& fs = rep.result.trajectory.final_state;
  rep.x_mean = average && count > 0 ? Vec(acc / double(count)) : Vec(fs.X.colwise().mean().transpose());
  AlgoConfig resolved = cfg;
  validate_config(resolved, model);
  rep.summary = config_summary(model, resolved);
  rep.summary.emplace_back("status", "ok");
  for (Eigen::Index i = 0; i < rep.result.theta_hat.size(); ++i)
    put(rep.summary, "theta_" + std::to_string(i), rep.result.theta_hat[i]);
  for (auto& kv : model_metrics(model, rep.result.theta_hat, rep.x_mean, fs)) rep.summary.push_back(kv);
  return rep;
}

std::string trajectory_csv(const std::vector<Snapshot>& snaps, int d_theta) {
  std::string out = "iteration";
  for (int i = 0; i < d_theta; ++i) out += ",theta_" + std::to_string(i);
  out += "\n";
  for (const auto& s : snaps) {
    out += std::to_string(s.iteration);
    for (int i = 0; i < d_theta; ++i) out += "," + fmt17(s.theta[i]);
    out += "\n";
  }
  return out;
}

namespace {
std::string summary_csv(const Summary& s) {
  std::string out = "field,value\n";
  for (const auto& [k, v] : s) out += csv_row({k, v});
  return out;
}

std::string timing_csv(double init_s, double step_s) {
  return "phase,seconds\ninit," + fmt17(init_s) + "\nsteps," + fmt17(step_s) + "\n";
}
}  // namespace

void cmd_run(const ExperimentConfig& cfg, std::ostream& log) {
  const ModelPtr model = build_model(cfg.model);
  AlgoConfig ac = cfg.algo;
  ac.workers = resolve_workers(ac.workers);
  const auto warnings = validate_config(ac, *model);
  ensure_dir(cfg.out_dir);
  const std::string dir = cfg.out_dir + "/";
  for (const auto& w : warnings) log << "warning: " << w << "\n";
  write_text(dir + "manifest", manifest(cfg, "run", warnings));
  try {
    const RunReport rep = execute_run(*model, ac);
    const auto& tr = rep.result.trajectory;
    write_text(dir + "trajectory.csv", trajectory_csv(tr.snapshots, model->d_theta()));
    write_text(dir + "summary.csv", summary_csv(rep.summary));
    write_text(dir + "timing.csv", timing_csv(tr.init_seconds, tr.step_seconds));
    if (const auto* m = dynamic_cast<const DeblurModel*>(model.get()))
      write_pgm(dir + "reconstruction.pgm", m->as_image(rep.x_mean));
    for (const auto& [k, v] : rep.summary) log << k << " = " << v << "\n";
  } catch (const DivergenceError& e) {
    write_text(dir + "trajectory.csv", trajectory_csv(e.partial.snapshots, model->d_theta()));
    Summary s = config_summary(*model, ac);
    s.emplace_back("status", "diverged");
    s.emplace_back("diverged_at", std::to_string(e.iteration));
    write_text(dir + "summary.csv", summary_csv(s));
    write_text(dir + "timing.csv", timing_csv(e.partial.init_seconds, e.partial.step_seconds));
    throw;
  }
}

namespace {

struct Cell {
  AlgoConfig cfg;
  std::string status = "ok";
  Vec theta;
  double nmse = std::numeric_limits<double>::quiet_NaN();
  double runtime = 0.0;
};

std::string num_or_empty(double v) { return std::isnan(v) ? std::string() : fmt17(v); }

}  // namespace

void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log) {
  const ModelPtr model = build_model(cfg.model);
  const SweepAxes ax = resolved_axes(cfg);
  std::vector<Cell> cells;
  std::set<std::string> warned;
  for (const auto& a : ax.algorithms)
    for (int n : ax.n_particles)
      for (double g : ax.gamma)
        for (double l : ax.lambda) {
          AlgoConfig c = cfg.algo;
          c.algorithm = parse_algorithm(a);
          c.n_particles = n;
          c.gamma = g;
          c.lambda = l;
          for (const auto& w : validate_config(c, *model))
            if (warned.insert(w).second) log << "warning: " << w << "\n";
          for (auto seed : ax.seeds) {
            Cell cell;
            cell.cfg = c;
            cell.cfg.seed = seed;
            cells.push_back(cell);
          }
        }
  ensure_dir(cfg.out_dir);
  const std::string dir = cfg.out_dir + "/";
  write_text(dir + "manifest", manifest(cfg, "sweep", {}));

  const Vec tt = model->theta_true();
  auto run_cell = [&](Cell& cell, WorkerPool* pool) {
    try {
      const RunResult r = run(*model, cell.cfg, pool);
      cell.theta = r.theta_hat;
      cell.runtime = r.trajectory.init_seconds + r.trajectory.step_seconds;
      if (tt.size() == cell.theta.size() && tt.squaredNorm() > 0) cell.nmse = nmse(cell.theta, tt);
    } catch (const DivergenceError& e) {
      cell.status = "diverged";
      cell.theta = Vec::Constant(model->d_theta(), std::numeric_limits<double>::quiet_NaN());
      cell.runtime = e.partial.init_seconds + e.partial.step_seconds;
    }
  };
  const int workers = resolve_workers(cfg.algo.workers);
  if (workers > 1 && cells.size() > 1) {
    WorkerPool outer(workers);
    outer.parallel_for(std::int64_t(cells.size()), [&](std::int64_t b, std::int64_t e) {
      WorkerPool single(1);
      for (std::int64_t i = b; i < e; ++i) run_cell(cells[std::size_t(i)], &single);
    });
  } else {
    WorkerPool pool(workers);
    for (auto& c : cells) run_cell(c, &pool);
  }

  const int dt = model->d_theta();
  std::string out = "model,algorithm,n_particles,gamma,lambda,seed,status";
  for (int i = 0; i < dt; ++i) out += ",theta_" + std::to_string(i);
  out += ",nmse,runtime\n";
  for (const auto& c : cells) {
    out += model->name() + "," + to_string(c.cfg.algorithm) + "," + std::to_string(c.cfg.n_particles) + "," +
           fmt17(c.cfg.gamma) + "," + fmt17(c.cfg.lambda) + "," + std::to_string(c.cfg.seed) + "," + c.status;
    for (int i = 0; i < dt; ++i) out += "," + num_or_empty(c.theta[i]);
    out += "," + num_or_empty(c.nmse) + "," + fmt17(c.runtime) + "\n";
  }
  write_text(dir + "sweep.csv", out);

  // aggregate over seeds, per (algorithm, N, gamma, lambda) in axis order
  struct Agg {
    std::string algorithm;
    int n;
    double gamma, lambda;
    int runs = 0, ok = 0;
    Vec mean, sd;
    double nmse_mean = std::numeric_limits<double>::quiet_NaN(), nmse_sd = std::numeric_limits<double>::quiet_NaN();
    double var_total = std::numeric_limits<double>::quiet_NaN();
    double slope = std::numeric_limits<double>::quiet_NaN();
  };
  std::vector<Agg> aggs;
  const std::size_t per = ax.seeds.size();
  for (std::size_t b = 0; b < cells.size(); b += per) {
    Agg a;
    const auto& c0 = cells[b].cfg;
    a.algorithm = to_string(c0.algorithm);
    a.n = c0.n_particles;
    a.gamma = c0.gamma;
    a.lambda = c0.lambda;
    a.runs = int(per);
    std::vector<std::vector<double>> comps(static_cast<std::size_t>(dt));
    std::vector<double> nm;
    for (std::size_t k = b; k < b + per; ++k) {
      if (cells[k].status != "ok") continue;
      ++a.ok;
      for (int i = 0; i < dt; ++i) comps[std::size_t(i)].push_back(cells[k].theta[i]);
      if (!std::isnan(cells[k].nmse)) nm.push_back(cells[k].nmse);
    }
    a.mean = Vec::Constant(dt, std::numeric_limits<double>::quiet_NaN());
    a.sd = a.mean;
    if (a.ok > 0) {
      a.var_total = 0;
      for (int i = 0; i < dt; ++i) {
        const auto r = summarize("theta", comps[std::size_t(i)]);
        a.mean[i] = r.value;
        a.sd[i] = r.dispersion;
        a.var_total += r.dispersion * r.dispersion;
      }
    }
    if (!nm.empty()) {
      const auto r = summarize("nmse", nm);
      a.nmse_mean = r.value;
      a.nmse_sd = r.dispersion;
    }
    aggs.push_back(a);
  }
  std::map<std::tuple<std::string, double, double>, std::vector<std::pair<double, double>>> groups;
  for (const auto& a : aggs)
    if (a.var_total > 0) groups[{a.algorithm, a.gamma, a.lambda}].emplace_back(double(a.n), a.var_total);
  for (auto& a : aggs) {
    const auto& g = groups[{a.algorithm, a.gamma, a.lambda}];
    std::set<double> distinct;
    for (const auto& p : g) distinct.insert(p.first);
    if (distinct.size() >= 3) a.slope = variance_slope(g);
  }
  std::string agg = "model,algorithm,n_particles,gamma,lambda,runs,ok";
  for (int i = 0; i < dt; ++i) agg += ",theta_" + std::to_string(i) + "_mean";
  for (int i = 0; i < dt; ++i) agg += ",theta_" + std::to_string(i) + "_std";
  agg += ",nmse_mean,nmse_std,theta_variance,variance_slope\n";
  for (const auto& a : aggs) {
    agg += model->name() + "," + a.algorithm + "," + std::to_string(a.n) + "," + fmt17(a.gamma) + "," +
           fmt17(a.lambda) + "," + std::to_string(a.runs) + "," + std::to_string(a.ok);
    for (int i = 0; i < dt; ++i) agg += "," + num_or_empty(a.mean[i]);
    for (int i = 0; i < dt; ++i) agg += "," + num_or_empty(a.sd[i]);
    agg += "," + num_or_empty(a.nmse_mean) + "," + num_or_empty(a.nmse_sd) + "," + num_or_empty(a.var_total) + "," +
           num_or_empty(a.slope) + "\n";
  }
  write_text(dir + "aggregate.csv", agg);
  int diverged = 0;
  for (const auto& c : cells) diverged += c.status != "ok";
  log << cells.size() << " runs, " << diverged << " diverged\n";
}

bool cmd_prox_check(const ExperimentConfig& cfg, std::ostream& log) {
  ProxCheckOptions opt;
  opt.cases = cfg.prox_check.cases;
  opt.seed = cfg.prox_check.seed;
  opt.operators = cfg.prox_check.operators;
  opt.fault = cfg.prox_check.fault;
  const auto rows = run_prox_check(opt);
  ensure_dir(cfg.out_dir);
  const std::string dir = cfg.out_dir + "/";
  write_text(dir + "manifest", manifest(cfg, "prox-check", {}));
  write_text(dir + "prox_report.csv", prox_report_csv(rows));
  bool ok = true;
  for (const auto& r : rows) {
    log << r.op << " " << r.property << " " << r.status;
    if (r.status != "skip") log << " worst=" << fmt17(r.worst);
    if (r.status == "fail") log << " (" << r.note << ")";
    log << "\n";
    ok &= r.status != "fail";
  }
  return ok;
}

namespace {
std::string matrix_csv(const Mat& m, const std::string& prefix) {
  std::string out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? "," : "") + prefix + std::to_string(j);
  out += "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += (j ? "," : "") + fmt17(m(i, j));
    out += "\n";
  }
  return out;
}

std::string class_csv(const ClassData& d) {
  std::string out = "label";
  for (Eigen::Index j = 0; j < d.F.cols(); ++j) out += ",f_" + std::to_string(j);
  out += "\n";
  for (Eigen::Index i = 0; i < d.F.rows(); ++i) {
    out += std::to_string(d.label[std::size_t(i)]);
    for (Eigen::Index j = 0; j < d.F.cols(); ++j) out += "," + fmt17(d.F(i, j));
    out += "\n";
  }
  return out;
}
}  // namespace

void cmd_datagen(const ExperimentConfig& cfg, std::ostream& log) {
  const ModelPtr model = build_model(cfg.model);
  ensure_dir(cfg.out_dir);
  const std::string dir = cfg.out_dir + "/";
  write_text(dir + "manifest", manifest(cfg, "datagen", {}));
  std::vector<std::string> files;
  auto emit = [&](const std::string& name, const std::string& content) {
    write_text(dir + name, content);
    files.push_back(name);
  };
  if (const auto* m = dynamic_cast<const GaussianToy*>(model.get())) {
    emit("observations.csv", matrix_csv(m->y(), "y"));
  } else if (const auto* m = dynamic_cast<const LogisticModel*>(model.get())) {
    const auto& d = m->data();
    emit("design.csv", matrix_csv(d.V, "v_"));
    emit("labels.csv", matrix_csv(d.y, "y"));
    emit("latent.csv", matrix_csv(d.x_true, "x"));
    emit("parameters.csv", "field,value\ntheta_true," + fmt17(d.theta_true) + "\nseed," + std::to_string(d.seed) + "\n");
  } else if (const auto* m = dynamic_cast<const DeblurModel*>(model.get())) {
    const auto& p = m->problem();
    write_pgm(dir + "truth.pgm", p.truth);
    files.push_back("truth.pgm");
    write_pgm(dir + "blurred.pgm", p.observed);
    files.push_back("blurred.pgm");
    emit("observed.csv", matrix_csv(p.observed, "c"));
    emit("deblur.sidecar", "rows = " + std::to_string(p.truth.rows()) + "\ncols = " + std::to_string(p.truth.cols()) +
                               "\nblur = " + std::to_string(p.patch) + "\nnoise_sigma = " + fmt17(p.sigma) +
                               "\ndata_seed = " + std::to_string(cfg.model.data_seed) +
                               "\nsource = " + (cfg.model.image.empty() ? std::string("phantom") : cfg.model.image) + "\n");
  } else if (const auto* m = dynamic_cast<const CompletionModel*>(model.get())) {
    const auto& p = m->problem();
    std::string mask = "index,row,col,value\n";
    for (std::size_t k = 0; k < p.observed.size(); ++k) {
      const int i = p.observed[k];
      mask += std::to_string(i) + "," + std::to_string(i % p.truth.rows()) + "," + std::to_string(i / p.truth.rows()) +
              "," + fmt17(p.y[Eigen::Index(k)]) + "\n";
    }
    emit("mask.csv", mask);
    emit("truth.csv", matrix_csv(p.truth, "c"));
  } else if (const auto* m = dynamic_cast<const BnnModel*>(model.get())) {
    emit("train.csv", class_csv(m->spec().train));
    emit("test.csv", class_csv(m->spec().test));
  }
  for (const auto& f : files) log << "wrote " << dir << f << "\n";
}

}  // namespace pipla
