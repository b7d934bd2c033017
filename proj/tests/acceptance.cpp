// Acceptance suite. Prints one PASS/FAIL line per criterion; args select criteria by number.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "pipla/config.hpp"
#include "pipla/experiments.hpp"
#include "pipla/metrics.hpp"
#include "pipla/models.hpp"
#include "pipla/prox_check.hpp"
#include "pipla/samplers.hpp"

using namespace pipla;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char b[64];
  std::snprintf(b, sizeof b, f, v);
  return b;
}

ExperimentConfig experiment(const std::string& model, const std::string& algo, double gamma, double lambda, int n,
                            int steps, std::uint64_t seed) {
  ExperimentConfig c = default_experiment();
  c.model.name = model;
  c.algo.algorithm = parse_algorithm(algo);
  c.algo.gamma = gamma;
  c.algo.lambda = lambda;
  c.algo.n_particles = n;
  c.algo.n_steps = steps;
  c.algo.seed = seed;
  c.algo.workers = 1;
  return c;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::string summary_value(const Summary& s, const std::string& key) {
  for (const auto& [k, v] : s)
    if (k == key) return v;
  return "";
}

// ---- 1, 2: prox oracle suite

std::vector<ProxCheckRow> prox_rows(double& secs) {
  static std::vector<ProxCheckRow> rows;
  static double elapsed = -1.0;
  if (elapsed < 0) {
    const auto t0 = Clock::now();
    rows = run_prox_check(ProxCheckOptions{});
    elapsed = seconds_since(t0);
  }
  secs = elapsed;
  return rows;
}

Verdict c1() {
  double secs;
  const auto rows = prox_rows(secs);
  std::string failed;
  int checked = 0;
  for (const auto& r : rows) {
    if (r.property == "envelope_grad" || r.status == "skip") continue;
    ++checked;
    if (r.status != "pass")
      failed += " " + r.op + "/" + r.property + "(" + std::to_string(r.failures) + "/" + std::to_string(r.cases) + ")";
  }
  const bool fast = secs < 60.0;
  return {failed.empty() && fast, std::to_string(checked) + " rows, " + fmt("%.1f s", secs) +
                                      (failed.empty() ? "" : "; failing:" + failed)};
}

Verdict c2() {
  double secs;
  const auto rows = prox_rows(secs);
  std::string failed;
  int checked = 0;
  double worst = 0.0;
  for (const auto& r : rows) {
    if (r.property != "envelope_grad" || r.status == "skip") continue;
    ++checked;
    worst = std::max(worst, r.worst);
    if (r.status != "pass") failed += " " + r.op + "(" + std::to_string(r.failures) + "/" + std::to_string(r.cases) + ")";
  }
  return {checked > 0 && failed.empty(),
          std::to_string(checked) + " operators, worst rel err " + fmt("%.2e", worst) +
              (failed.empty() ? "" : "; failing:" + failed)};
}

// ---- 3: reduction identities

bool same_path(const SplitModel& m, Algorithm a, Algorithm b, int steps) {
  AlgoConfig ca, cb;
  ca.algorithm = a;
  cb.algorithm = b;
  for (AlgoConfig* c : {&ca, &cb}) {
    c->gamma = 0.05;
    c->lambda = 0.1;
    c->n_particles = 8;
    c->n_steps = steps;
    c->seed = 11;
  }
  validate_config(ca, m);
  validate_config(cb, m);
  ParticleSystem sa, sb;
  m.init(11, 8, sa.theta, sa.X);
  sb = sa;
  const NoiseStream z(11);
  WorkerPool pool(1);
  StepWorkspace wa, wb;
  for (int k = 0; k < steps; ++k) {
    step(sa, m, ca, z, pool, wa);
    step(sb, m, cb, z, pool, wb);
    if (sa.theta != sb.theta || sa.X != sb.X) return false;
  }
  return true;
}

Verdict c3() {
  const auto toy = make_gaussian_toy(10, 1.0, 3);
  const bool a = same_path(*toy, Algorithm::MYIPLA, Algorithm::IPLA, 200);
  const bool b = same_path(*toy, Algorithm::MYPGD, Algorithm::PGD, 200);
  const bool c = same_path(*toy, Algorithm::PIPGLA, Algorithm::IPLA, 200);
  auto mark = [](bool v) { return v ? "identical" : "differs"; };
  return {a && b && c, std::string("MYIPLA/IPLA ") + mark(a) + ", MYPGD/PGD " + mark(b) + ", PIPGLA/IPLA " + mark(c)};
}

// ---- 4: Gaussian toy

Verdict c4() {
  const auto t0 = Clock::now();
  bool ok = true;
  std::string detail;
  for (const char* algo : {"myipla", "mypgd", "pipgla"}) {
    ExperimentConfig c = experiment("gaussian_toy", algo, 0.05, 0.1, 100, 2000, 5);
    const ModelPtr m = build_model(c.model);
    const RunReport r = execute_run(*m, c.algo);
    const double err = std::abs(r.result.theta_hat[0] - m->theta_true()[0]);
    ok &= err < 0.1;
    detail += std::string(detail.empty() ? "" : ", ") + to_string(c.algo.algorithm) + " |err| " + fmt("%.4f", err);
  }
  return {ok, detail + fmt(", %.1f s", seconds_since(t0))};
}

// ---- 5: logistic regression, Laplace prior

double logistic_nmse(const std::string& algo, double gamma, double lambda, int n, int steps, std::uint64_t seed,
                     const std::string& model = "logistic_laplace") {
  ExperimentConfig c = experiment(model, algo, gamma, lambda, n, steps, seed);
  c.model.data_seed = seed;
  const ModelPtr m = build_model(c.model);
  const RunReport r = execute_run(*m, c.algo);
  return nmse(r.result.theta_hat, m->theta_true());
}

Verdict c5() {
  const auto t0 = Clock::now();
  struct Row {
    const char* algo;
    double gamma, lambda, bound;
  };
  const Row rows[] = {{"myipla", 0.05, 0.35, 10.0}, {"pipgla", 0.01, 0.01, 6.0}, {"mypgd", 0.05, 0.25, 10.0}};
  bool ok = true;
  std::string detail;
  for (const Row& row : rows) {
    std::vector<double> v;
    for (std::uint64_t s = 1; s <= 20; ++s) v.push_back(logistic_nmse(row.algo, row.gamma, row.lambda, 50, 5000, s));
    const double med = median(v);
    ok &= med <= row.bound;
    detail += std::string(detail.empty() ? "" : ", ") + to_string(parse_algorithm(row.algo)) + " median " +
              fmt("%.2f%%", med) + fmt(" (<= %.0f%%)", row.bound);
  }
  return {ok, detail + fmt(", 20 seeds, %.0f s", seconds_since(t0))};
}

// ---- 6: O(1/N) concentration

Verdict c6() {
  const auto t0 = Clock::now();
  ExperimentConfig base = experiment("logistic_laplace", "myipla", 0.05, 0.35, 4, 1000, 0);
  const ModelPtr m = build_model(base.model);
  std::vector<std::pair<double, double>> nv;
  std::string detail;
  for (int n : {4, 8, 16, 32, 64}) {
    std::vector<double> th;
    for (std::uint64_t s = 1; s <= 100; ++s) {
      AlgoConfig c = base.algo;
      c.n_particles = n;
      c.seed = s;
      th.push_back(run(*m, c).theta_hat[0]);
    }
    double mean = 0.0, var = 0.0;
    for (double t : th) mean += t / double(th.size());
    for (double t : th) var += (t - mean) * (t - mean) / double(th.size());
    nv.emplace_back(double(n), var);
    detail += fmt(" N=%.0f:", n) + fmt("%.2e", var);
  }
  const double slope = variance_slope(nv);
  return {slope >= -1.4 && slope <= -0.6,
          fmt("slope %.3f in [-1.4,-0.6];", slope) + detail + fmt("; 100 seeds x 1000 steps, %.0f s", seconds_since(t0))};
}

// ---- 7: PIPGLA support invariant

Verdict c7() {
  const auto t0 = Clock::now();
  ExperimentConfig c = experiment("logistic_uniform", "pipgla", 0.02, 0.02, 50, 5000, 1);
  const ModelPtr m = build_model(c.model);
  long violations = 0, checks = 0;
  double excess = 0.0;
  run(*m, c.algo, nullptr, [&](const ParticleSystem& s) {
    const double bound = s.theta[0];
    for (Eigen::Index k = 0; k < s.X.size(); ++k) {
      ++checks;
      const double e = std::abs(s.X.data()[k]) - bound;
      if (e > 0) {
        ++violations;
        excess = std::max(excess, e / bound);
      }
    }
  });
  return {violations == 0, std::to_string(violations) + " violations in " + std::to_string(checks) +
                               " checks over 5000 steps, largest excess " + fmt("%.2e", excess) +
                               " of theta" + fmt(", %.1f s", seconds_since(t0))};
}

// ---- 8: matrix completion

Verdict c8() {
  const auto t0 = Clock::now();
  ExperimentConfig c = experiment("completion", "myipla", 0.01, 0.25, 10, 3000, 1);
  const ModelPtr m = build_model(c.model);
  const RunReport r = execute_run(*m, c.algo);
  const double e = std::stod(summary_value(r.summary, "nmse_entire"));
  const double miss = std::stod(summary_value(r.summary, "nmse_missing"));
  const double secs = seconds_since(t0);
  return {e <= 5.0 && secs < 300.0,
          fmt("nmse entire %.2f%% (<= 5%%)", e) + fmt(", missing %.2f%%", miss) + fmt(", %.0f s", secs)};
}

// ---- 9: TV deblurring

Verdict c9() {
  const auto t0 = Clock::now();
  ExperimentConfig c = experiment("deblur", "myipla", 0.01, 0.4, 10, 3000, 1);
  c.algo.burn_in = 100;
  c.algo.estimator = Estimator::Average;
  const ModelPtr m = build_model(c.model);
  const RunReport r = execute_run(*m, c.algo);
  auto get = [&](const char* k) { return std::stod(summary_value(r.summary, k)); };
  const double mse_r = get("mse_reconstruction"), mse_o = get("mse_observed");
  const double ss_r = get("ssim_reconstruction"), ss_o = get("ssim_observed");
  const double et = get("exp_theta");
  const double secs = seconds_since(t0);
  const bool ok = mse_r < mse_o && ss_r > ss_o && et >= 0.05 && et <= 1.5 && secs < 600.0;
  return {ok, fmt("mse %.1f", mse_r) + fmt(" vs observed %.1f", mse_o) + fmt(", ssim %.3f", ss_r) +
                  fmt(" vs %.3f", ss_o) + fmt(", exp(theta) %.4f in [0.05,1.5]", et) + fmt(", %.0f s", secs)};
}

// ---- 10: lambda ablation

Verdict c10() {
  const auto t0 = Clock::now();
  std::vector<double> meds;
  std::string detail;
  for (double lambda : {0.05, 0.1, 0.2, 0.35, 0.5}) {
    std::vector<double> v;
    for (std::uint64_t s = 1; s <= 10; ++s) v.push_back(logistic_nmse("myipla", 0.05, lambda, 50, 5000, s));
    meds.push_back(median(v));
    detail += fmt(" l=%.2f:", lambda) + fmt("%.3f%%", meds.back());
  }
  const double ratio = *std::max_element(meds.begin(), meds.end()) / *std::min_element(meds.begin(), meds.end());
  return {ratio <= 3.0, fmt("max/min median nmse %.2f (<= 3);", ratio) + detail +
                            fmt("; 10 seeds, %.0f s", seconds_since(t0))};
}

// ---- 11: determinism across worker counts

Verdict c11() {
  const auto t0 = Clock::now();
  const char* models[] = {"gaussian_toy", "logistic_laplace", "logistic_uniform", "deblur", "completion", "bnn"};
  const char* algos[] = {"myipla", "pipula", "pipgla", "mypgd", "ppgd", "ipla", "pgd"};
  WorkerPool one(1), eight(8);
  int compared = 0, unsupported = 0;
  std::string mismatched;
  for (const char* mn : models) {
    ExperimentConfig c = experiment(mn, "myipla", 0.01, 0.05, 10, 30, 4);
    c.algo.snapshot_stride = 1;
    const ModelPtr m = build_model(c.model);
    for (const char* an : algos) {
      AlgoConfig a = c.algo;
      a.algorithm = parse_algorithm(an);
      if (a.algorithm == Algorithm::PIPULA || a.algorithm == Algorithm::PPGD) a.lambda = a.gamma;
      try {
        AlgoConfig probe = a;
        validate_config(probe, *m);
      } catch (const Error& e) {
        if (e.kind != ErrorKind::Config && e.kind != ErrorKind::Unsupported) throw;
        ++unsupported;
        continue;
      }
      a.workers = 1;
      const RunReport r1 = execute_run(*m, a, &one);
      a.workers = 8;
      const RunReport r8 = execute_run(*m, a, &eight);
      ++compared;
      const int dt = m->d_theta();
      if (trajectory_csv(r1.result.trajectory.snapshots, dt) != trajectory_csv(r8.result.trajectory.snapshots, dt) ||
          r1.result.trajectory.final_state.X != r8.result.trajectory.final_state.X)
        mismatched += std::string(" ") + mn + "/" + an;
    }
  }
  return {mismatched.empty() && compared > 0,
          std::to_string(compared) + " pairs byte-identical" +
              (mismatched.empty() ? "" : ", mismatched:" + mismatched) + ", " + std::to_string(unsupported) +
              " unsupported pairs rejected" + fmt(", %.0f s", seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<int, std::pair<const char*, std::function<Verdict()>>> criteria = {
      {1, {"prox oracle suite", c1}},
      {2, {"envelope-gradient consistency", c2}},
      {3, {"reduction identities", c3}},
      {4, {"gaussian toy mmle", c4}},
      {5, {"logistic regression, laplace prior", c5}},
      {6, {"O(1/N) concentration", c6}},
      {7, {"PIPGLA support invariant", c7}},
      {8, {"matrix completion", c8}},
      {9, {"TV deblurring", c9}},
      {10, {"lambda ablation", c10}},
      {11, {"determinism across workers", c11}},
  };
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  if (selected.empty())
    for (const auto& [k, v] : criteria) selected.push_back(k);

  int failures = 0;
  for (int k : selected) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::printf("criterion %d: FAIL unknown criterion\n", k);
      ++failures;
      continue;
    }
    Verdict v;
    try {
      v = it->second.second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("criterion %d: %s %s: %s\n", k, v.pass ? "PASS" : "FAIL", it->second.first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
