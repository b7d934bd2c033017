#include "pipla/samplers.hpp"

#include <cmath>
#include <memory>

#include "pipla/prox.hpp"

namespace pipla {

namespace {

using Clock = std::chrono::steady_clock;

bool is_my(Algorithm a) { return a == Algorithm::MYIPLA || a == Algorithm::MYPGD; }
bool is_pu(Algorithm a) { return a == Algorithm::PIPULA || a == Algorithm::PPGD; }
bool is_smooth(Algorithm a) { return a == Algorithm::IPLA || a == Algorithm::PGD; }
bool theta_noise(Algorithm a) {
  return a == Algorithm::MYIPLA || a == Algorithm::PIPULA || a == Algorithm::PIPGLA || a == Algorithm::IPLA;
}

// base + gamma * mean_i(D_i) / scale (+ sqrt(2 gamma / N) xi0), reduction in ascending particle order
Vec theta_update(const Vec& base, const RowMat& D, double gamma, const Vec& scale, bool noise, const Vec& xi0) {
  const Eigen::Index n = D.rows(), d = D.cols();
  Vec sum = Vec::Zero(d);
  for (Eigen::Index i = 0; i < n; ++i) sum += D.row(i).transpose();
  const double c = std::sqrt(2.0 * gamma / double(n));
  Vec out(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    out[k] = base[k] + gamma * ((sum[k] / double(n)) / scale[k]);
    if (noise) out[k] += c * xi0[k];
  }
  return out;
}

void check_finite(const ParticleSystem& s, std::int64_t it) {
  if (!s.theta.allFinite()) throw DivergenceError(it, "non-finite theta");
  for (Eigen::Index i = 0; i < s.X.rows(); ++i)
    if (!s.X.row(i).allFinite()) throw DivergenceError(it, "non-finite particle " + std::to_string(i));
}

void draw_noise(const NoiseStream& noise, std::int64_t it, StepWorkspace& ws, Eigen::Index n, Eigen::Index dx,
                Eigen::Index dt, WorkerPool& pool) {
  ws.xi0.resize(dt);
  noise.fill(std::uint64_t(it), 0, ws.xi0.data(), int(dt));
  ws.Xi.resize(n, dx);
  pool.parallel_for(n, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) noise.fill(std::uint64_t(it), std::uint64_t(i + 1), ws.Xi.row(i).data(), int(dx));
  });
}

void step_impl(ParticleSystem& s, const SplitModel& model, const AlgoConfig& cfg, const NoiseStream& noise,
               WorkerPool& pool, StepWorkspace& ws) {
  const Algorithm a = cfg.algorithm;
  const Eigen::Index n = s.X.rows(), dx = s.X.cols(), dt = s.theta.size();
  const std::int64_t it = s.iteration + 1;
  const double gamma = cfg.gamma, lambda = cfg.lambda;
  const double cx = std::sqrt(2.0 * gamma);
  const bool hybrid = model.hybrid();
  const Vec& scale = cfg.theta_grad_scale;
  const Vec theta = s.theta;

  draw_noise(noise, it, ws, n, dx, dt, pool);
  ws.D.resize(n, dt);
  RowMat Xn(n, dx);

  if (is_smooth(a)) {
    pool.parallel_for(n, [&](std::int64_t b, std::int64_t e) {
      Vec gt(dt), gx(dx);
      for (std::int64_t i = b; i < e; ++i) {
        model.grad_total(theta, s.X.row(i).transpose(), gt, gx);
        ws.D.row(i) = -gt.transpose();
        Xn.row(i) = s.X.row(i) + gamma * (-gx.transpose()) + cx * ws.Xi.row(i);
      }
    });
    s.theta = theta_update(theta, ws.D, gamma, scale, theta_noise(a), ws.xi0);
    s.X.swap(Xn);
    s.iteration = it;
    return;
  }

  model.grad_g1_batch(theta, s.X, ws.Gt, ws.Gx);
  if (hybrid) {
    ws.Ht.resize(n, dt);
    pool.parallel_for(n, [&](std::int64_t b, std::int64_t e) {
      Vec h(dt);
      for (std::int64_t i = b; i < e; ++i) {
        model.hybrid_theta_grad(theta, s.X.row(i).transpose(), h);
        ws.Ht.row(i) = h.transpose();
      }
    });
  }

  if (is_my(a) || is_pu(a)) {
    const bool pu = is_pu(a);
    pool.parallel_for(n, [&](std::int64_t b, std::int64_t e) {
      for (std::int64_t i = b; i < e; ++i) {
        ProxResult p;
        if (pu) {
          const Vec vt = theta - gamma * ws.Gt.row(i).transpose();
          const Vec vx = s.X.row(i).transpose() - gamma * ws.Gx.row(i).transpose();
          p = model.prox_g2(vt, vx, gamma);
        } else {
          p = model.prox_g2(theta, s.X.row(i).transpose(), lambda);
        }
        auto d = ws.D.row(i);
        if (pu) d = ((p.theta - theta) / lambda).transpose();
        else d = -ws.Gt.row(i) + ((p.theta - theta) / lambda).transpose();
        if (hybrid) d -= ws.Ht.row(i);
        if (pu) Xn.row(i) = s.X.row(i) + gamma * ((p.x.transpose() - s.X.row(i)) / lambda) + cx * ws.Xi.row(i);
        else
          Xn.row(i) = s.X.row(i) + gamma * (-ws.Gx.row(i) + (p.x.transpose() - s.X.row(i)) / lambda) +
                      cx * ws.Xi.row(i);
      }
    });
    s.theta = theta_update(theta, ws.D, gamma, scale, theta_noise(a), ws.xi0);
    s.X.swap(Xn);
    s.iteration = it;
    return;
  }

  // PIPGLA: forward half-step then backward (prox) step
  for (Eigen::Index i = 0; i < n; ++i) {
    ws.D.row(i) = -ws.Gt.row(i);
    if (hybrid) ws.D.row(i) -= ws.Ht.row(i);
  }
  const Vec half = theta_update(theta, ws.D, gamma, scale, true, ws.xi0);
  ws.Pt.resize(n, dt);
  pool.parallel_for(n, [&](std::int64_t b, std::int64_t e) {
    for (std::int64_t i = b; i < e; ++i) {
      const Vec xh = (s.X.row(i) + gamma * (-ws.Gx.row(i)) + cx * ws.Xi.row(i)).transpose();
      ProxResult p = model.prox_g2(half, xh, lambda);
      ws.Pt.row(i) = p.theta.transpose();
      Xn.row(i) = p.x.transpose();
    }
  });
  Vec sum = Vec::Zero(dt);
  for (Eigen::Index i = 0; i < n; ++i) sum += ws.Pt.row(i).transpose() - half;
  Vec next(dt);
  for (Eigen::Index k = 0; k < dt; ++k) next[k] = half[k] + (sum[k] / double(n)) / scale[k];
  if ((scale.array() == 1.0).all()) {
    const Vec mean = ws.Pt.colwise().mean().transpose();
    for (Eigen::Index k = 0; k < dt; ++k)
      if (std::abs(next[k] - mean[k]) > 1e-12 * std::max(1.0, std::abs(mean[k])) && std::isfinite(mean[k]))
        throw Error(ErrorKind::Internal, "PIPGLA theta is not the mean of the particle prox parts");
  }
  s.theta = next;
  s.X.swap(Xn);
  s.iteration = it;
}

}  // namespace

void step(ParticleSystem& s, const SplitModel& model, const AlgoConfig& cfg, const NoiseStream& noise,
          WorkerPool& pool, StepWorkspace& ws) {
  const std::int64_t it = s.iteration + 1;
  try {
    step_impl(s, model, cfg, noise, pool, ws);
  } catch (const DivergenceError&) {
    throw;
  } catch (const Error& e) {
    if (e.kind == ErrorKind::Domain || e.kind == ErrorKind::Numeric) throw DivergenceError(it, e.what());
    throw;
  }
  check_finite(s, it);
}

namespace {
void step_as(Algorithm a, ParticleSystem& s, const SplitModel& m, AlgoConfig cfg, const NoiseStream& z,
             WorkerPool& p) {
  cfg.algorithm = a;
  if (cfg.theta_grad_scale.size() == 0) cfg.theta_grad_scale = m.theta_grad_scale();
  if (is_pu(a)) cfg.lambda = cfg.gamma;
  StepWorkspace ws;
  step(s, m, cfg, z, p, ws);
}
}  // namespace

void step_myipla(ParticleSystem& s, const SplitModel& m, AlgoConfig c, const NoiseStream& z, WorkerPool& p) {
  step_as(Algorithm::MYIPLA, s, m, std::move(c), z, p);
}
void step_pipula(ParticleSystem& s, const SplitModel& m, AlgoConfig c, const NoiseStream& z, WorkerPool& p) {
  step_as(Algorithm::PIPULA, s, m, std::move(c), z, p);
}
void step_pipgla(ParticleSystem& s, const SplitModel& m, AlgoConfig c, const NoiseStream& z, WorkerPool& p) {
  step_as(Algorithm::PIPGLA, s, m, std::move(c), z, p);
}
void step_mypgd(ParticleSystem& s, const SplitModel& m, AlgoConfig c, const NoiseStream& z, WorkerPool& p) {
  step_as(Algorithm::MYPGD, s, m, std::move(c), z, p);
}
void step_ppgd(ParticleSystem& s, const SplitModel& m, AlgoConfig c, const NoiseStream& z, WorkerPool& p) {
  step_as(Algorithm::PPGD, s, m, std::move(c), z, p);
}
void step_ipla(ParticleSystem& s, const SplitModel& m, AlgoConfig c, const NoiseStream& z, WorkerPool& p) {
  step_as(Algorithm::IPLA, s, m, std::move(c), z, p);
}
void step_pgd(ParticleSystem& s, const SplitModel& m, AlgoConfig c, const NoiseStream& z, WorkerPool& p) {
  step_as(Algorithm::PGD, s, m, std::move(c), z, p);
}

RunResult run(const SplitModel& model, AlgoConfig cfg, WorkerPool* pool, const StepObserver& observer,
              const ParticleSystem* initial) {
  RunResult out;
  out.warnings = validate_config(cfg, model);
  std::unique_ptr<WorkerPool> own;
  if (!pool) {
    own = std::make_unique<WorkerPool>(cfg.workers);
    pool = own.get();
  }
  const NoiseStream noise(cfg.seed, cfg.noise_enabled);
  Trajectory& tr = out.trajectory;
  ParticleSystem s;
  auto t0 = Clock::now();
  if (initial) {
    s = *initial;
    if (s.theta.size() != model.d_theta() || s.X.cols() != model.d_x() || s.X.rows() != cfg.n_particles)
      throw config_error("initial state does not match the model/config dimensions");
  } else {
    model.init(cfg.seed, cfg.n_particles, s.theta, s.X);
  }
  s.iteration = 0;
  if (!all_finite(s)) throw DivergenceError(0, "non-finite initial state");
  tr.snapshots.push_back({0, s.theta});
  auto t1 = Clock::now();
  tr.init_seconds = std::chrono::duration<double>(t1 - t0).count();

  StepWorkspace ws;
  Vec acc = Vec::Zero(model.d_theta());
  try {
    for (int k = 1; k <= cfg.n_steps; ++k) {
      step(s, model, cfg, noise, *pool, ws);
      if (observer) observer(s);
      if (k % cfg.snapshot_stride == 0 || k == cfg.n_steps) tr.snapshots.push_back({k, s.theta});
      if (k > cfg.burn_in) acc += s.theta;
    }
  } catch (DivergenceError& e) {
    e.partial.snapshots = tr.snapshots;
    e.partial.final_state = s;
    e.partial.init_seconds = tr.init_seconds;
    e.partial.step_seconds = std::chrono::duration<double>(Clock::now() - t1).count();
    throw;
  }
  tr.step_seconds = std::chrono::duration<double>(Clock::now() - t1).count();
  out.theta_hat = cfg.estimator == Estimator::Last ? s.theta : Vec(acc / double(cfg.n_steps - cfg.burn_in));
  tr.final_state = std::move(s);
  return out;
}

}  // namespace pipla
