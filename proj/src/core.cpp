#include "pipla/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "pipla/rng.hpp"

namespace pipla {

void SplitModel::grad_g1_batch(const CRef& theta, const RowMat& X, RowMat& G_theta, RowMat& G_x) const {
  const Eigen::Index n = X.rows();
  G_theta.resize(n, d_theta());
  G_x.resize(n, d_x());
  Vec gt(d_theta()), gx(d_x());
  for (Eigen::Index i = 0; i < n; ++i) {
    grad_g1(theta, X.row(i).transpose(), gt, gx);
    G_theta.row(i) = gt.transpose();
    G_x.row(i) = gx.transpose();
  }
}

void SplitModel::init(std::uint64_t seed, int n_particles, Vec& theta, RowMat& X) const {
  CounterRng rng(seed, 0x1417);
  theta.resize(d_theta());
  for (auto& t : theta) t = rng.uniform(-5.0, 5.0);
  X.resize(n_particles, d_x());
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
}

namespace {
const char* kAlgoNames[] = {"MYIPLA", "PIPULA", "PIPGLA", "MYPGD", "PPGD", "IPLA", "PGD"};
}

std::string to_string(Algorithm a) { return kAlgoNames[int(a)]; }

Algorithm parse_algorithm(const std::string& s) {
  std::string u;
  for (char c : s) u += char(std::toupper(static_cast<unsigned char>(c)));
  for (int i = 0; i < 7; ++i)
    if (u == kAlgoNames[i]) return Algorithm(i);
  throw config_error("unknown algorithm '" + s + "'");
}

std::string to_string(Estimator e) { return e == Estimator::Last ? "last" : "average"; }

Estimator parse_estimator(const std::string& s) {
  if (s == "last") return Estimator::Last;
  if (s == "average" || s == "avg") return Estimator::Average;
  throw config_error("unknown estimator '" + s + "'");
}

std::vector<std::string> validate_config(AlgoConfig& cfg, const SplitModel& model) {
  std::vector<std::string> warnings;
  if (!(cfg.gamma > 0) || !std::isfinite(cfg.gamma)) throw config_error("gamma must be positive");
  if (cfg.n_particles < 1) throw config_error("n_particles must be >= 1");
  if (cfg.n_steps < 1) throw config_error("n_steps must be >= 1");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.n_steps) throw config_error("burn_in must lie in [0, n_steps)");
  if (cfg.snapshot_stride < 1) throw config_error("snapshot_stride must be >= 1");
  if (cfg.workers < 1) throw config_error("workers must be >= 1");
  const auto a = cfg.algorithm;
  if (a == Algorithm::PIPULA || a == Algorithm::PPGD) cfg.lambda = cfg.gamma;
  if (a != Algorithm::IPLA && a != Algorithm::PGD && (!(cfg.lambda > 0) || !std::isfinite(cfg.lambda)))
    throw config_error("lambda must be positive");
  if ((a == Algorithm::IPLA || a == Algorithm::PGD) && !model.has_total_grad())
    throw config_error("model '" + model.name() + "' has no total gradient, " + to_string(a) + " unsupported");
  if (cfg.theta_grad_scale.size() == 0) cfg.theta_grad_scale = model.theta_grad_scale();
  if (cfg.theta_grad_scale.size() != model.d_theta())
    throw config_error("theta_grad_scale must have " + std::to_string(model.d_theta()) + " entries");
  for (double s : cfg.theta_grad_scale)
    if (!(s >= 1.0)) throw config_error("theta_grad_scale entries must be >= 1");
  if ((a == Algorithm::MYIPLA || a == Algorithm::MYPGD) && cfg.gamma > cfg.lambda)
    warnings.push_back("gamma > lambda: relaxation coefficient 1 - gamma/lambda is negative");
  if (a == Algorithm::PIPGLA && cfg.lambda < cfg.gamma)
    warnings.push_back("PIPGLA with lambda < gamma is outside the admissible range");
  return warnings;
}

bool all_finite(const ParticleSystem& s) { return s.theta.allFinite() && s.X.allFinite(); }

std::vector<ValidationFailure> validate_model(const SplitModel& model, int probes, const ValidateOptions& opt) {
  if (probes < 1) throw config_error("validate_model: probes must be >= 1");
  std::vector<ValidationFailure> out;
  Vec theta;
  RowMat X;
  CounterRng rng(opt.seed, 0x5a11);
  for (int p = 0; p < probes; ++p) {
    auto fail = [&](const std::string& w) { out.push_back({p, w}); };
    try {
      model.init(opt.seed * 1000003u + std::uint64_t(p), 1, theta, X);
      const Vec x = X.row(0).transpose();
      const double lambda = opt.lambda > 0 ? opt.lambda : std::pow(10.0, rng.uniform(-3.0, -1.0));
      Vec gt = Vec::Zero(model.d_theta()), gx = Vec::Zero(model.d_x());
      model.grad_g1(theta, x, gt, gx);
      if (!gt.allFinite() || !gx.allFinite()) fail("grad_g1 non-finite");
      const ProxResult r = model.prox_g2(theta, x, lambda);
      if (r.theta.size() != model.d_theta()) fail("theta_part dimension");
      if (r.x.size() != model.d_x()) fail("x_part dimension");
      if (r.theta.size() != model.d_theta() || r.x.size() != model.d_x()) continue;
      if (!r.theta.allFinite() || !r.x.allFinite()) {
        fail("prox non-finite");
        continue;
      }
      if (!model.has_g2_value()) continue;
      auto objective = [&](const Vec& t, const Vec& z) {
        return model.g2_value(t, z) + ((t - theta).squaredNorm() + (z - x).squaredNorm()) / (2.0 * lambda);
      };
      const double at_prox = objective(r.theta, r.x);
      double best = model.g2_value(theta, x);
      const int dt = model.hybrid() ? 0 : model.d_theta();
      const int total = dt + model.d_x();
      const int coords = std::min(total, opt.max_coords);
      for (int c = 0; c < coords; ++c) {
        const int k = coords == total ? c : int(rng.below(std::uint64_t(total)));
        for (double s : {-lambda, lambda}) {
          Vec t = r.theta, z = r.x;
          if (k < dt) t[k] += s;
          else z[k - dt] += s;
          best = std::min(best, objective(t, z));
        }
      }
      if (at_prox > best + 1e-9 * std::max(1.0, std::abs(best))) {
        std::ostringstream ss;
        ss.precision(10);
        ss << "proximal objective increased (" << at_prox << " > candidate " << best << ", lambda=" << lambda << ")";
        fail(ss.str());
      }
    } catch (const std::exception& e) {
      fail(std::string("exception: ") + e.what());
    }
  }
  return out;
}

double envelope_value(const SplitModel& model, const CRef& theta, const CRef& x, double lambda) {
  if (!model.has_g2_value() || !model.has_g1_value())
    throw unsupported("envelope_value: model '" + model.name() + "' lacks g1/g2 values");
  const ProxResult p = model.prox_g2(theta, x, lambda);
  return model.g1_value(theta, x) + model.g2_value(p.theta, p.x) +
         ((p.theta - theta).squaredNorm() + (p.x - x).squaredNorm()) / (2.0 * lambda);
}

}  // namespace pipla
