#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pipla/models.hpp"
#include "pipla/samplers.hpp"

using namespace pipla;
using testing::vec;

namespace {

// g1 = 0, g2 = sum |x_i - theta|
class L1ShiftOnly : public SplitModel {
 public:
  explicit L1ShiftOnly(int d) : d_(d) {}
  std::string name() const override { return "l1_shift_only"; }
  int d_theta() const override { return 1; }
  int d_x() const override { return d_; }
  void grad_g1(const CRef&, const CRef&, VRef gt, VRef gx) const override {
    gt.setZero();
    gx.setZero();
  }
  ProxResult prox_g2(const CRef& t, const CRef& x, double lambda) const override {
    return prox_l1_shift_approx(t[0], x, lambda);
  }

 private:
  int d_;
};

// g1 = g2 = 0
class Flat : public SplitModel {
 public:
  std::string name() const override { return "flat"; }
  int d_theta() const override { return 1; }
  int d_x() const override { return 3; }
  void grad_g1(const CRef&, const CRef&, VRef gt, VRef gx) const override {
    gt.setZero();
    gx.setZero();
  }
  ProxResult prox_g2(const CRef& t, const CRef& x, double) const override { return {t, x, 0, 0.0}; }
};

ParticleSystem fixed_state(int n, int d, double theta, std::uint64_t seed) {
  ParticleSystem s;
  s.theta = vec({theta});
  s.X.resize(n, d);
  CounterRng rng(seed, 5);
  for (Eigen::Index k = 0; k < s.X.size(); ++k) s.X.data()[k] = 2 * rng.normal();
  return s;
}

AlgoConfig config(Algorithm a, double gamma, double lambda, int n, int steps, std::uint64_t seed) {
  AlgoConfig c;
  c.algorithm = a;
  c.gamma = gamma;
  c.lambda = lambda;
  c.n_particles = n;
  c.n_steps = steps;
  c.seed = seed;
  c.snapshot_stride = 1;
  return c;
}

void same_run(const SplitModel& m, AlgoConfig a, AlgoConfig b) {
  const RunResult ra = run(m, a), rb = run(m, b);
  const auto& sa = ra.trajectory.snapshots;
  const auto& sb = rb.trajectory.snapshots;
  REQUIRE(sa.size() == sb.size());
  for (std::size_t k = 0; k < sa.size(); ++k) REQUIRE(sa[k].theta == sb[k].theta);
  CHECK(ra.trajectory.final_state.X == rb.trajectory.final_state.X);
}

}  // namespace

TEST_CASE("reductions to the smooth samplers when g2 = 0") {
  const auto toy = make_gaussian_toy(5, 1.0, 2);
  same_run(*toy, config(Algorithm::MYIPLA, 0.05, 0.1, 6, 150, 3), config(Algorithm::IPLA, 0.05, 0.1, 6, 150, 3));
  same_run(*toy, config(Algorithm::MYPGD, 0.05, 0.1, 6, 150, 3), config(Algorithm::PGD, 0.05, 0.1, 6, 150, 3));
  same_run(*toy, config(Algorithm::PIPGLA, 0.05, 0.02, 6, 150, 3), config(Algorithm::IPLA, 0.05, 0.1, 6, 150, 3));
}

TEST_CASE("PIPULA equals MYIPLA with gamma = lambda when g1 = 0") {
  const L1ShiftOnly m(4);
  same_run(m, config(Algorithm::PIPULA, 0.03, 0.03, 5, 100, 9), config(Algorithm::MYIPLA, 0.03, 0.03, 5, 100, 9));
  same_run(m, config(Algorithm::PPGD, 0.03, 0.03, 5, 100, 9), config(Algorithm::MYPGD, 0.03, 0.03, 5, 100, 9));
}

TEST_CASE("MYIPLA with gamma = lambda, g1 = 0, one particle, no noise jumps to the prox") {
  const L1ShiftOnly m(4);
  ParticleSystem s = fixed_state(1, 4, 0.3, 1);
  const ProxResult p = m.prox_g2(s.theta, s.X.row(0).transpose(), 0.2);
  for (Algorithm a : {Algorithm::MYIPLA, Algorithm::PIPGLA, Algorithm::PIPULA}) {
    ParticleSystem t = s;
    AlgoConfig c = config(a, 0.2, 0.2, 1, 1, 1);
    c.noise_enabled = false;
    validate_config(c, m);
    WorkerPool pool(1);
    StepWorkspace ws;
    step(t, m, c, NoiseStream(1, false), pool, ws);
    INFO(to_string(a));
    CHECK(std::abs(t.theta[0] - p.theta[0]) < 1e-14);
    CHECK((t.X.row(0).transpose() - p.x).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(t.iteration == 1);
  }
}

TEST_CASE("PIPULA on a flat potential is a random walk with the declared scales") {
  const Flat m;
  const ParticleSystem s0 = fixed_state(4, 3, 0.5, 2);
  ParticleSystem s = s0;
  AlgoConfig c = config(Algorithm::PIPULA, 0.02, 0.02, 4, 1, 17);
  validate_config(c, m);
  const NoiseStream z(17);
  WorkerPool pool(1);
  StepWorkspace ws;
  step(s, m, c, z, pool, ws);
  CHECK(s.theta[0] == doctest::Approx(0.5 + std::sqrt(2 * 0.02 / 4) * z.component(1, 0, 0)).epsilon(1e-14));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(s.X(i, j) == doctest::Approx(s0.X(i, j) + std::sqrt(2 * 0.02) * z.component(1, i + 1, j)).epsilon(1e-14));
}

TEST_CASE("PIPULA step matches the hand-composed forward-backward map") {
  const testing::ShiftAbsModel m(3);
  const ParticleSystem s0 = fixed_state(2, 3, 0.4, 3);
  ParticleSystem s = s0;
  const double g = 0.1;
  AlgoConfig c = config(Algorithm::PIPULA, g, g, 2, 1, 1);
  c.noise_enabled = false;
  validate_config(c, m);
  WorkerPool pool(1);
  StepWorkspace ws;
  step(s, m, c, NoiseStream(1, false), pool, ws);

  double tsum = 0;
  for (int i = 0; i < 2; ++i) {
    const Vec x = s0.X.row(i).transpose();
    const Vec r = (x.array() - 0.4).matrix();
    tsum += 0.4 + g * r.sum();
    const Vec expect = soft_threshold(x - g * r, g);
    CHECK((s.X.row(i).transpose() - expect).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK(std::abs(s.theta[0] - tsum / 2) < 1e-14);
}

TEST_CASE("MYPGD equals MYIPLA without noise") {
  const auto m = make_logistic_laplace(2);
  AlgoConfig a = config(Algorithm::MYIPLA, 0.05, 0.35, 4, 40, 1);
  AlgoConfig b = config(Algorithm::MYPGD, 0.05, 0.35, 4, 40, 1);
  a.noise_enabled = b.noise_enabled = false;
  same_run(*m, a, b);
  AlgoConfig p = config(Algorithm::PPGD, 0.05, 0.05, 4, 40, 1);
  AlgoConfig q = config(Algorithm::PIPULA, 0.05, 0.05, 4, 40, 1);
  p.noise_enabled = q.noise_enabled = false;
  same_run(*m, p, q);
}

TEST_CASE("repeated runs are bitwise identical") {
  const auto m = make_logistic_uniform(1);
  for (Algorithm a : {Algorithm::MYPGD, Algorithm::PIPGLA, Algorithm::PPGD})
    same_run(*m, config(a, 0.02, 0.02, 5, 60, 4), config(a, 0.02, 0.02, 5, 60, 4));
}

TEST_CASE("noise-free MYIPLA on the toy converges to the minimiser") {
  const auto toy = make_gaussian_toy(3, 1.0, 7);
  AlgoConfig c = config(Algorithm::MYIPLA, 0.1, 0.1, 4, 500, 1);
  c.noise_enabled = false;
  const RunResult r = run(*toy, c);
  CHECK(std::abs(r.theta_hat[0] - toy->theta_true()[0]) < 1e-6);
  const RowMat& X = r.trajectory.final_state.X;
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j)
      CHECK(std::abs(X(i, j) - (toy->y()[j] + r.theta_hat[0]) / 2) < 1e-6);
}

TEST_CASE("noise-free IPLA on a quadratic is gradient descent") {
  const auto toy = make_gaussian_toy(2, 1.0, 1);
  const ParticleSystem s0 = fixed_state(3, 2, 0.2, 4);
  ParticleSystem s = s0;
  AlgoConfig c = config(Algorithm::IPLA, 0.05, 0.1, 3, 1, 1);
  c.noise_enabled = false;
  validate_config(c, *toy);
  WorkerPool pool(1);
  StepWorkspace ws;
  step(s, *toy, c, NoiseStream(1, false), pool, ws);
  double tsum = 0;
  for (int i = 0; i < 3; ++i) {
    Vec gt(1), gx(2);
    toy->grad_g1(s0.theta, s0.X.row(i).transpose(), gt, gx);
    tsum += gt[0];
    CHECK((s.X.row(i).transpose() - (s0.X.row(i).transpose() - 0.05 * gx)).cwiseAbs().maxCoeff() < 1e-14);
  }
  CHECK(std::abs(s.theta[0] - (0.2 - 0.05 * tsum / 3)) < 1e-14);
}

TEST_CASE("subgradient baselines run on the Laplace model") {
  const auto m = make_logistic_laplace(1);
  CHECK_NOTHROW(run(*m, config(Algorithm::IPLA, 0.01, 0.1, 5, 100, 1)));
  CHECK_NOTHROW(run(*m, config(Algorithm::PGD, 0.01, 0.1, 5, 100, 1)));
}

TEST_CASE("PIPGLA theta is the mean of the per-particle prox parts") {
  const auto m = make_logistic_uniform(3);
  AlgoConfig c = config(Algorithm::PIPGLA, 0.02, 0.02, 6, 1, 2);
  validate_config(c, *m);
  ParticleSystem s;
  m->init(2, 6, s.theta, s.X);
  const ParticleSystem s0 = s;
  const NoiseStream z(2);
  WorkerPool pool(1);
  StepWorkspace ws;
  step(s, *m, c, z, pool, ws);

  double tsum = 0;
  const double th = s0.theta[0] + std::sqrt(2 * 0.02 / 6) * z.component(1, 0, 0);  // grad_theta g1 = 0
  for (int i = 0; i < 6; ++i) {
    Vec gt(1), gx(m->d_x());
    m->grad_g1(s0.theta, s0.X.row(i).transpose(), gt, gx);
    Vec half = s0.X.row(i).transpose() - 0.02 * gx;
    for (int j = 0; j < m->d_x(); ++j) half[j] += std::sqrt(2 * 0.02) * z.component(1, i + 1, j);
    const ProxResult p = m->prox_g2(vec({th}), half, 0.02);
    tsum += p.theta[0];
    CHECK((s.X.row(i).transpose() - p.x).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(std::abs(s.theta[0] - tsum / 6) < 1e-12);
}

TEST_CASE("MYPGD has smaller theta variance than MYIPLA on the toy") {
  const auto toy = make_gaussian_toy(10, 1.0, 1);
  auto var = [&](Algorithm a) {
    double s = 0, s2 = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      AlgoConfig c = config(a, 0.05, 0.1, 100, 300, seed);
      c.snapshot_stride = 100;
      const double t = run(*toy, c).theta_hat[0];
      s += t;
      s2 += t * t;
    }
    return s2 / 50 - (s / 50) * (s / 50);
  };
  const double vp = var(Algorithm::MYPGD), vi = var(Algorithm::MYIPLA);
  INFO("MYPGD " << vp << " MYIPLA " << vi);
  CHECK(vp < vi);
}

TEST_CASE("average estimator over a single retained iterate") {
  const auto toy = make_gaussian_toy(4, 1.0, 1);
  AlgoConfig c = config(Algorithm::MYIPLA, 0.05, 0.1, 5, 21, 3);
  c.burn_in = 20;
  c.estimator = Estimator::Average;
  const RunResult r = run(*toy, c);
  CHECK(r.theta_hat == r.trajectory.final_state.theta);
}

TEST_CASE("snapshots strictly increasing and include the last step") {
  const auto toy = make_gaussian_toy(4, 1.0, 1);
  AlgoConfig c = config(Algorithm::MYIPLA, 0.05, 0.1, 5, 95, 3);
  c.snapshot_stride = 10;
  const RunResult r = run(*toy, c);
  const auto& s = r.trajectory.snapshots;
  for (std::size_t k = 1; k < s.size(); ++k) CHECK(s[k].iteration > s[k - 1].iteration);
  CHECK(s.front().iteration == 0);
  CHECK(s.back().iteration == 95);
}

TEST_CASE("worker count does not change results") {
  const auto m = make_logistic_laplace(1);
  for (Algorithm a : {Algorithm::MYIPLA, Algorithm::PIPGLA, Algorithm::PIPULA}) {
    AlgoConfig c = config(a, 0.01, a == Algorithm::PIPULA ? 0.01 : 0.05, 13, 40, 8);
    WorkerPool one(1), eight(8);
    const RunResult r1 = run(*m, c, &one), r8 = run(*m, c, &eight);
    REQUIRE(r1.trajectory.snapshots.size() == r8.trajectory.snapshots.size());
    for (std::size_t k = 0; k < r1.trajectory.snapshots.size(); ++k)
      CHECK(r1.trajectory.snapshots[k].theta == r8.trajectory.snapshots[k].theta);
    CHECK(r1.trajectory.final_state.X == r8.trajectory.final_state.X);
  }
}

TEST_CASE("divergence reports the iteration and keeps the partial trajectory") {
  const auto toy = make_gaussian_toy(10, 1.0, 1);
  AlgoConfig c = config(Algorithm::MYIPLA, 1.5, 1.5, 4, 2000, 1);
  c.snapshot_stride = 5;
  try {
    run(*toy, c);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration > 0);
    CHECK(e.iteration <= 2000);
    CHECK(e.kind == ErrorKind::Divergence);
    REQUIRE(!e.partial.snapshots.empty());
    CHECK(e.partial.snapshots.back().iteration < e.iteration);
  }
}

TEST_CASE("initial state dimensions are checked") {
  const auto toy = make_gaussian_toy(3, 1.0, 1);
  ParticleSystem s = fixed_state(2, 4, 0.0, 1);
  CHECK_THROWS_AS(run(*toy, config(Algorithm::MYIPLA, 0.05, 0.1, 2, 5, 1), nullptr, {}, &s), Error);
}
