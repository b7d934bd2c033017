#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <vector>

#include "pipla/core.hpp"
#include "pipla/rng.hpp"
#include "pipla/worker_pool.hpp"

namespace pipla {

struct Snapshot {
  std::int64_t iteration;
  Vec theta;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  ParticleSystem final_state;
  double init_seconds = 0.0;
  double step_seconds = 0.0;
};

struct DivergenceError : Error {
  std::int64_t iteration;
  Trajectory partial;
  DivergenceError(std::int64_t it, const std::string& what)
      : Error(ErrorKind::Divergence, "diverged at iteration " + std::to_string(it) + ": " + what), iteration(it) {}
};

// scratch buffers reused across steps
struct StepWorkspace {
  RowMat Gt, Gx, Ht, D, Pt, Px, Xi;
  Vec xi0;
};

// One transition; cfg must have passed validate_config. Throws DivergenceError.
void step(ParticleSystem& s, const SplitModel& model, const AlgoConfig& cfg, const NoiseStream& noise,
          WorkerPool& pool, StepWorkspace& ws);

// Named kernels; each forces cfg.algorithm and delegates to step().
void step_myipla(ParticleSystem& s, const SplitModel& m, AlgoConfig cfg, const NoiseStream& z, WorkerPool& p);
void step_pipula(ParticleSystem& s, const SplitModel& m, AlgoConfig cfg, const NoiseStream& z, WorkerPool& p);
void step_pipgla(ParticleSystem& s, const SplitModel& m, AlgoConfig cfg, const NoiseStream& z, WorkerPool& p);
void step_mypgd(ParticleSystem& s, const SplitModel& m, AlgoConfig cfg, const NoiseStream& z, WorkerPool& p);
void step_ppgd(ParticleSystem& s, const SplitModel& m, AlgoConfig cfg, const NoiseStream& z, WorkerPool& p);
void step_ipla(ParticleSystem& s, const SplitModel& m, AlgoConfig cfg, const NoiseStream& z, WorkerPool& p);
void step_pgd(ParticleSystem& s, const SplitModel& m, AlgoConfig cfg, const NoiseStream& z, WorkerPool& p);

struct RunResult {
  Vec theta_hat;
  Trajectory trajectory;
  std::vector<std::string> warnings;
};

using StepObserver = std::function<void(const ParticleSystem&)>;

// Initial state may be supplied; otherwise the model initialises from cfg.seed.
RunResult run(const SplitModel& model, AlgoConfig cfg, WorkerPool* pool = nullptr,
              const StepObserver& observer = {}, const ParticleSystem* initial = nullptr);

}  // namespace pipla
