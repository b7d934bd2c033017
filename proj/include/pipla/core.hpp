#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace pipla {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// particles are stored one per row so a particle is a contiguous span
using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CRef = Eigen::Ref<const Vec>;
using VRef = Eigen::Ref<Vec>;

enum class ErrorKind { Config, Divergence, Domain, Unsupported, Io, Numeric, InvalidArgument, Internal };

struct Error : std::runtime_error {
  ErrorKind kind;
  Error(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

inline Error config_error(const std::string& m) { return {ErrorKind::Config, m}; }
inline Error domain_error(const std::string& m) { return {ErrorKind::Domain, m}; }
inline Error unsupported(const std::string& m) { return {ErrorKind::Unsupported, m}; }
inline Error io_error(const std::string& m) { return {ErrorKind::Io, m}; }

struct ProxResult {
  Vec theta;
  Vec x;
  int iterations = 0;
  double residual = 0.0;
};

// U(theta, x) = g1 + g2. Implementations must be safe to call concurrently.
class SplitModel {
 public:
  virtual ~SplitModel() = default;

  virtual std::string name() const = 0;
  virtual int d_theta() const = 0;
  virtual int d_x() const = 0;

  virtual void grad_g1(const CRef& theta, const CRef& x, VRef g_theta, VRef g_x) const = 0;
  virtual ProxResult prox_g2(const CRef& theta, const CRef& x, double lambda) const = 0;

  // Full-matrix gradient. Rows of X are particles; G_theta has one row per particle.
  virtual void grad_g1_batch(const CRef& theta, const RowMat& X, RowMat& G_theta, RowMat& G_x) const;

  virtual bool has_g1_value() const { return false; }
  virtual double g1_value(const CRef&, const CRef&) const { throw unsupported(name() + ": g1_value"); }
  virtual bool has_g2_value() const { return false; }
  // +inf outside the domain of g2
  virtual double g2_value(const CRef&, const CRef&) const { throw unsupported(name() + ": g2_value"); }

  // grad g1 + (sub)gradient of g2 with sign(0)=0; used by IPLA and PGD
  virtual bool has_total_grad() const { return false; }
  virtual void grad_total(const CRef&, const CRef&, VRef, VRef) const {
    throw unsupported(name() + ": total gradient");
  }

  // Hybrid mode: prox_g2 acts on x only at fixed theta, and theta is driven by
  // grad_g1 plus hybrid_theta_grad (theta-derivative of g2 at fixed x).
  virtual bool hybrid() const { return false; }
  virtual void hybrid_theta_grad(const CRef&, const CRef&, VRef g_theta) const { g_theta.setZero(); }

  virtual Vec theta_grad_scale() const { return Vec::Ones(d_theta()); }

  // model-owned initialisation; fallback theta ~ U(-5,5), x ~ N(0, I)
  virtual void init(std::uint64_t seed, int n_particles, Vec& theta, RowMat& X) const;

  // reference parameter for NMSE, empty if unknown
  virtual Vec theta_true() const { return Vec(); }
};

using ModelPtr = std::shared_ptr<const SplitModel>;

enum class Algorithm { MYIPLA, PIPULA, PIPGLA, MYPGD, PPGD, IPLA, PGD };
enum class Estimator { Last, Average };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);
std::string to_string(Estimator e);
Estimator parse_estimator(const std::string& s);

struct AlgoConfig {
  Algorithm algorithm = Algorithm::MYIPLA;
  double gamma = 0.05;
  double lambda = 0.1;
  int n_particles = 50;
  int n_steps = 1000;
  std::uint64_t seed = 0;
  int burn_in = 0;
  Estimator estimator = Estimator::Last;
  Vec theta_grad_scale;  // empty: use the model default
  bool noise_enabled = true;
  int snapshot_stride = 10;
  int workers = 1;
};

// throws config_error; returns warnings
std::vector<std::string> validate_config(AlgoConfig& cfg, const SplitModel& model);

struct ParticleSystem {
  Vec theta;
  RowMat X;
  std::int64_t iteration = 0;
};

bool all_finite(const ParticleSystem& s);

struct ValidationFailure {
  int probe;
  std::string what;
};

struct ValidateOptions {
  std::uint64_t seed = 1;
  double lambda = 0.0;  // 0: draw lambda ~ 10^U(-3,-1) per probe
  int max_coords = 16;  // coordinates perturbed by the local optimality probe
};

// Probe points come from model.init. The proximal objective at the returned point
// is compared with the identity candidate and with +-lambda moves along coordinates
// (x coordinates only for hybrid models).
std::vector<ValidationFailure> validate_model(const SplitModel& model, int probes, const ValidateOptions& opt = {});

double envelope_value(const SplitModel& model, const CRef& theta, const CRef& x, double lambda);

}  // namespace pipla
