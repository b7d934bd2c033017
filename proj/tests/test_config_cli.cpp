#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "pipla/config.hpp"
#include "pipla/experiments.hpp"
#include "pipla/io.hpp"
#include "pipla/worker_pool.hpp"

using namespace pipla;
namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pipla_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

std::string config_error_text(const std::string& text) {
  ExperimentConfig c = default_experiment();
  try {
    parse_config_text(text, c);
  } catch (const Error& e) {
    CHECK(e.kind == ErrorKind::Config);
    return e.what();
  }
  return "";
}

int cli(const std::string& args) {
  const std::string cmd = std::string(PIPLA_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

ExperimentConfig toy_config(const std::string& out) {
  ExperimentConfig c = default_experiment();
  c.model.name = "gaussian_toy";
  c.algo.gamma = 0.05;
  c.algo.lambda = 0.1;
  c.algo.n_particles = 100;
  c.algo.n_steps = 2000;
  c.algo.seed = 3;
  c.out_dir = out;
  return c;
}

std::string summary_field(const std::string& csv, const std::string& key) {
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + ",", 0) == 0) return line.substr(key.size() + 1);
  return "";
}

}  // namespace

TEST_CASE("config errors name the key") {
  CHECK(config_error_text("[algorithm]\ngamma = fast\n").find("algorithm.gamma") != std::string::npos);
  CHECK(config_error_text("[algorithm]\nstep = 1\n").find("algorithm.step") != std::string::npos);
  CHECK(config_error_text("[model]\ntoy_dim = 3.5\n").find("model.toy_dim") != std::string::npos);
  CHECK(config_error_text("[algorithm]\nnoise_enabled = maybe\n").find("algorithm.noise_enabled") != std::string::npos);
  CHECK(config_error_text("[algorithm]\nname = ULA\n").find("algorithm.name") != std::string::npos);
  CHECK(config_error_text("[sweep]\nseeds = 5..2\n").find("sweep.seeds") != std::string::npos);
  CHECK(config_error_text("[nonsense]\n").find("nonsense") != std::string::npos);
  CHECK(config_error_text("gamma = 1\n").find("gamma") != std::string::npos);
  CHECK(config_error_text("[algorithm]\ngamma = 1\ngamma = 2\n").find("algorithm.gamma") != std::string::npos);
  CHECK(config_error_text("[algorithm]\ngamma\n") != "");
  ExperimentConfig c = default_experiment();
  CHECK_THROWS_AS(set_config_value(c, "algorithm.nothing", "1"), Error);
}

TEST_CASE("config parsing and rendering") {
  ExperimentConfig c = default_experiment();
  parse_config_text(
      "# comment\n[model]\nname = completion  # trailing\n[algorithm]\nname = pipgla\ngamma = 0.01\n"
      "theta_grad_scale = 2, 3\n[sweep]\nseeds = 1..4, 9\nn_particles = 4,8\n[output]\ndir = somewhere\n",
      c);
  CHECK(c.model.name == "completion");
  CHECK(c.algo.algorithm == Algorithm::PIPGLA);
  CHECK(c.algo.gamma == 0.01);
  CHECK(c.algo.theta_grad_scale.size() == 2);
  CHECK(c.sweep.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 9});
  CHECK(c.sweep.n_particles == std::vector<int>{4, 8});
  CHECK(c.out_dir == "somewhere");

  ExperimentConfig back = default_experiment();
  parse_config_text(render_config(c), back);
  CHECK(render_config(back) == render_config(c));

  ExperimentConfig d;
  parse_config_text(render_config(default_experiment()), d);
  CHECK(render_config(d) == render_config(default_experiment()));

  const SweepAxes ax = resolved_axes(default_experiment());
  CHECK(ax.algorithms == std::vector<std::string>{"MYIPLA"});
  CHECK(ax.seeds.size() == 1);
}

TEST_CASE("worker override from the environment") {
  ::setenv("PIPLA_WORKERS", "3", 1);
  CHECK(resolve_workers(1) == 3);
  ::unsetenv("PIPLA_WORKERS");
  CHECK(resolve_workers(2) == 2);
}

TEST_CASE("cmd_run on the toy") {
  const std::string dir = scratch("run_toy");
  std::ostringstream log;
  const ExperimentConfig c = toy_config(dir);
  cmd_run(c, log);
  const std::string summary = read_text(dir + "/summary.csv");
  CHECK(summary.rfind("field,value\n", 0) == 0);
  const double theta = std::stod(summary_field(summary, "theta_0"));
  const auto model = build_model(c.model);
  CHECK(std::abs(theta - model->theta_true()[0]) < 0.1);
  CHECK(read_text(dir + "/trajectory.csv").rfind("iteration,theta_0\n", 0) == 0);
  CHECK(read_text(dir + "/timing.csv").rfind("phase,seconds\n", 0) == 0);

  // the manifest replays the run
  ExperimentConfig replay = default_experiment();
  parse_config_text(read_text(dir + "/manifest"), replay);
  CHECK(render_config(replay) == render_config(c));
}

TEST_CASE("noise-free duplicate runs give byte-identical files") {
  const std::string a = scratch("dup_a"), b = scratch("dup_b");
  ExperimentConfig c = toy_config(a);
  c.algo.noise_enabled = false;
  c.algo.n_steps = 300;
  std::ostringstream log;
  cmd_run(c, log);
  c.out_dir = b;
  cmd_run(c, log);
  CHECK(read_text(a + "/trajectory.csv") == read_text(b + "/trajectory.csv"));
  CHECK(read_text(a + "/summary.csv") == read_text(b + "/summary.csv"));
}

TEST_CASE("single-cell sweep matches cmd_run") {
  const std::string r = scratch("cell_run"), s = scratch("cell_sweep");
  ExperimentConfig c = toy_config(r);
  c.algo.n_steps = 200;
  std::ostringstream log;
  cmd_run(c, log);
  c.out_dir = s;
  cmd_sweep(c, log);
  const std::string run_theta = summary_field(read_text(r + "/summary.csv"), "theta_0");
  const std::string sweep = read_text(s + "/sweep.csv");
  CHECK(sweep.rfind("model,algorithm,n_particles,gamma,lambda,seed,status,theta_0,nmse,runtime\n", 0) == 0);
  CHECK(sweep.find("," + run_theta + ",") != std::string::npos);
  CHECK(fs::exists(s + "/aggregate.csv"));
}

TEST_CASE("shuffled sweep axes permute rows only") {
  const std::string a = scratch("shuffle_a"), b = scratch("shuffle_b");
  ExperimentConfig c = toy_config(a);
  c.algo.n_steps = 50;
  c.sweep.n_particles = {4, 8};
  c.sweep.gamma = {0.01, 0.02};
  c.sweep.seeds = {1, 2};
  std::ostringstream log;
  cmd_sweep(c, log);
  c.out_dir = b;
  c.sweep.n_particles = {8, 4};
  c.sweep.gamma = {0.02, 0.01};
  c.sweep.seeds = {2, 1};
  cmd_sweep(c, log);
  auto rows = [](const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      // drop the runtime column
      out.push_back(line.substr(0, line.rfind(',')));
    }
    std::sort(out.begin() + 1, out.end());
    return out;
  };
  CHECK(rows(read_text(a + "/sweep.csv")) == rows(read_text(b + "/sweep.csv")));
}

TEST_CASE("datagen is reproducible") {
  const std::string a = scratch("gen_a"), b = scratch("gen_b");
  ExperimentConfig c = default_experiment();
  c.model.data_seed = 7;
  c.out_dir = a;
  std::ostringstream log;
  cmd_datagen(c, log);
  c.out_dir = b;
  cmd_datagen(c, log);
  for (const char* f : {"design.csv", "labels.csv", "latent.csv", "parameters.csv"})
    CHECK(read_text(a + "/" + f) == read_text(b + "/" + f));

  const std::string m = scratch("gen_completion");
  c.model.name = "completion";
  c.model.data_seed = 0;
  c.out_dir = m;
  cmd_datagen(c, log);
  const std::string mask = read_text(m + "/mask.csv");
  CHECK(std::count(mask.begin(), mask.end(), '\n') == 717 + 1);

  const std::string d = scratch("gen_deblur");
  c.model.name = "deblur";
  c.out_dir = d;
  cmd_datagen(c, log);
  for (const char* f : {"truth.pgm", "blurred.pgm", "deblur.sidecar"}) CHECK(fs::exists(d + "/" + f));
  CHECK(read_pgm(d + "/truth.pgm").rows() == 64);
}

TEST_CASE("cli exit codes") {
  const std::string dir = scratch("cli");
  CHECK(cli("--print-defaults") == 0);
  CHECK(cli("run --print-defaults") == 0);
  CHECK(cli("run --config " + dir + "/missing.ini") == 1);

  write_text(dir + "/bad.ini", "[algorithm]\ngamma = x\n");
  CHECK(cli("run --config " + dir + "/bad.ini") == 1);
  const std::string err = dir + "/err.txt";
  CHECK(std::system((std::string(PIPLA_CLI_PATH) + " run --config " + dir + "/bad.ini 2>" + err).c_str()) != 0);
  CHECK(read_text(err).find("algorithm.gamma") != std::string::npos);

  write_text(dir + "/toy.ini",
             "[model]\nname = gaussian_toy\n[algorithm]\ngamma = 0.05\nlambda = 0.1\nn_particles = 20\nn_steps = 200\n");
  CHECK(cli("run --config " + dir + "/toy.ini --out " + dir + "/ok --seed 4 --workers 2") == 0);
  CHECK(fs::exists(dir + "/ok/summary.csv"));
  CHECK(read_text(dir + "/ok/manifest").find("seed = 4") != std::string::npos);

  write_text(dir + "/boom.ini",
             "[model]\nname = gaussian_toy\n[algorithm]\ngamma = 1.5\nlambda = 1.5\nn_particles = 4\nn_steps = 2000\n");
  CHECK(cli("run --config " + dir + "/boom.ini --out " + dir + "/boom") == 2);
  CHECK(read_text(dir + "/boom/summary.csv").find("diverged") != std::string::npos);
  CHECK(fs::exists(dir + "/boom/trajectory.csv"));

  write_text(dir + "/fault.ini", "[prox_check]\ncases = 10\noperators = soft_threshold\nfault = soft_threshold_sign\n");
  CHECK(cli("prox-check --config " + dir + "/fault.ini --out " + dir + "/pc") == 3);
  write_text(dir + "/st.ini", "[prox_check]\ncases = 10\noperators = soft_threshold\n");
  CHECK(cli("prox-check --config " + dir + "/st.ini --out " + dir + "/pc_ok") == 0);

  CHECK(cli("datagen --out " + dir + "/gen --seed 7") == 0);
  CHECK(cli("frobnicate") == 1);
}
