#pragma once

#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "pipla/config.hpp"
#include "pipla/samplers.hpp"

namespace pipla {

extern const char* const kToolVersion;

ModelPtr build_model(const ModelConfig& mc);

// ordered key/value pairs written to summary.csv
using Summary = std::vector<std::pair<std::string, std::string>>;

struct RunReport {
  RunResult result;
  Summary summary;
  Vec x_mean;  // cloud mean: final cloud, or averaged after burn-in for the average estimator
};

// model-specific metrics appended to the summary (nmse, image scores, completion errors, classification)
Summary model_metrics(const SplitModel& model, const Vec& theta_hat, const Vec& x_mean, const ParticleSystem& final_state);

// one run including the cloud-mean accumulator; throws DivergenceError
RunReport execute_run(const SplitModel& model, const AlgoConfig& cfg, WorkerPool* pool = nullptr);

std::string trajectory_csv(const std::vector<Snapshot>& snaps, int d_theta);

// Each command writes into cfg.out_dir and throws on errors. cmd_run rethrows DivergenceError after
// writing the partial trajectory. cmd_prox_check returns false when any row fails.
void cmd_run(const ExperimentConfig& cfg, std::ostream& log);
void cmd_sweep(const ExperimentConfig& cfg, std::ostream& log);
bool cmd_prox_check(const ExperimentConfig& cfg, std::ostream& log);
void cmd_datagen(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace pipla
