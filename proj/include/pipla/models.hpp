#pragma once

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "pipla/core.hpp"
#include "pipla/prox.hpp"

namespace pipla {

// ---- Gaussian toy: U = sum (x_i - theta)^2/2 + sum (y_i - x_i)^2/2, g2 = 0

class GaussianToy final : public SplitModel {
 public:
  explicit GaussianToy(Vec y) : y_(std::move(y)) {}
  std::string name() const override { return "gaussian_toy"; }
  int d_theta() const override { return 1; }
  int d_x() const override { return int(y_.size()); }
  void grad_g1(const CRef& theta, const CRef& x, VRef gt, VRef gx) const override;
  ProxResult prox_g2(const CRef& theta, const CRef& x, double) const override { return {theta, x, 0, 0.0}; }
  bool has_g1_value() const override { return true; }
  double g1_value(const CRef& theta, const CRef& x) const override;
  bool has_g2_value() const override { return true; }
  double g2_value(const CRef&, const CRef&) const override { return 0.0; }
  bool has_total_grad() const override { return true; }
  void grad_total(const CRef& t, const CRef& x, VRef gt, VRef gx) const override { grad_g1(t, x, gt, gx); }
  Vec theta_true() const override { return Vec::Constant(1, y_.mean()); }
  const Vec& y() const { return y_; }

 private:
  Vec y_;
};

std::shared_ptr<GaussianToy> make_gaussian_toy(int d, double theta_true, std::uint64_t seed);

// ---- Bayesian logistic regression

enum class LogisticPrior { Laplace, Uniform };

struct LogisticDataset {
  Mat V;      // d_y x d_x, entries U(-1,1)
  Vec y;      // labels in {0,1}
  Vec x_true;
  double theta_true = 0.0;
  std::uint64_t seed = 0;
};

LogisticDataset make_logistic_dataset(LogisticPrior prior, std::uint64_t seed, int d_x = 50, int d_y = 900,
                                      double theta_true = std::numeric_limits<double>::quiet_NaN());

class LogisticModel final : public SplitModel {
 public:
  LogisticModel(LogisticPrior prior, LogisticDataset data, bool iterative_prox = false, int prox_iters = 40);
  std::string name() const override { return prior_ == LogisticPrior::Laplace ? "logistic_laplace" : "logistic_uniform"; }
  int d_theta() const override { return 1; }
  int d_x() const override { return int(data_.V.cols()); }
  void grad_g1(const CRef& theta, const CRef& x, VRef gt, VRef gx) const override;
  void grad_g1_batch(const CRef& theta, const RowMat& X, RowMat& Gt, RowMat& Gx) const override;
  ProxResult prox_g2(const CRef& theta, const CRef& x, double lambda) const override;
  bool has_g1_value() const override { return true; }
  double g1_value(const CRef& theta, const CRef& x) const override;
  bool has_g2_value() const override { return true; }
  double g2_value(const CRef& theta, const CRef& x) const override;
  bool has_total_grad() const override { return prior_ == LogisticPrior::Laplace; }
  void grad_total(const CRef& theta, const CRef& x, VRef gt, VRef gx) const override;
  void init(std::uint64_t seed, int n, Vec& theta, RowMat& X) const override;
  Vec theta_true() const override { return Vec::Constant(1, data_.theta_true); }
  const LogisticDataset& data() const { return data_; }
  LogisticPrior prior() const { return prior_; }

 private:
  LogisticPrior prior_;
  LogisticDataset data_;
  Mat Vt_;  // V transposed, for the batched product
  bool iterative_;
  int prox_iters_;
};

std::shared_ptr<LogisticModel> make_logistic_laplace(std::uint64_t seed, bool iterative_prox = false);
std::shared_ptr<LogisticModel> make_logistic_uniform(std::uint64_t seed);

// ---- TV deblurring (hybrid)

struct DeblurProblem {
  Mat truth;
  Mat observed;
  int patch = 10;
  double sigma = 1.0;
};

// symmetric separable circular box blur
Mat apply_blur(const Mat& img, int patch);

// 64x64 synthetic piecewise-constant test image on the 0-255 scale
Mat phantom_image(int n1, int n2);

// sigma <= 0 selects the 30 dB blurred-SNR default
DeblurProblem make_deblur_problem(const Mat& truth, int patch, double sigma, std::uint64_t seed);

class DeblurModel final : public SplitModel {
 public:
  explicit DeblurModel(DeblurProblem p, TvSolverConfig tv = {});
  std::string name() const override { return "deblur"; }
  int d_theta() const override { return 1; }
  int d_x() const override { return int(p_.truth.size()); }
  void grad_g1(const CRef& theta, const CRef& x, VRef gt, VRef gx) const override;
  ProxResult prox_g2(const CRef& theta, const CRef& x, double lambda) const override;
  bool has_g1_value() const override { return true; }
  double g1_value(const CRef& theta, const CRef& x) const override;
  bool has_g2_value() const override { return true; }
  double g2_value(const CRef& theta, const CRef& x) const override;
  bool has_total_grad() const override { return true; }
  void grad_total(const CRef& theta, const CRef& x, VRef gt, VRef gx) const override;
  bool hybrid() const override { return true; }
  void hybrid_theta_grad(const CRef& theta, const CRef& x, VRef gt) const override;
  Vec theta_grad_scale() const override { return Vec::Constant(1, double(d_x())); }
  void init(std::uint64_t seed, int n, Vec& theta, RowMat& X) const override;
  const DeblurProblem& problem() const { return p_; }
  Mat as_image(const CRef& x) const;

 private:
  DeblurProblem p_;
  TvSolverConfig tv_;
};

std::shared_ptr<DeblurModel> make_deblur(const Mat& truth, int patch = 10, double sigma = 0.0,
                                         std::uint64_t seed = 0, TvSolverConfig tv = {});

// ---- nuclear-norm matrix completion (hybrid)

struct CompletionProblem {
  Mat truth;
  std::vector<int> observed;  // column-major linear indices, ascending
  Vec y;
  double sigma = 0.0;
  int rank = 0;
};

CompletionProblem make_completion_problem(int n1, int n2, int rank, double mask_fraction, double sigma,
                                          std::uint64_t seed, int block = 8);

class CompletionModel final : public SplitModel {
 public:
  explicit CompletionModel(CompletionProblem p);
  std::string name() const override { return "completion"; }
  int d_theta() const override { return 2; }
  int d_x() const override { return int(p_.truth.size()); }
  void grad_g1(const CRef& theta, const CRef& x, VRef gt, VRef gx) const override;
  ProxResult prox_g2(const CRef& theta, const CRef& x, double lambda) const override;
  bool has_g1_value() const override { return true; }
  double g1_value(const CRef& theta, const CRef& x) const override;
  bool has_g2_value() const override { return true; }
  double g2_value(const CRef& theta, const CRef& x) const override;
  bool has_total_grad() const override { return true; }
  void grad_total(const CRef& theta, const CRef& x, VRef gt, VRef gx) const override;
  bool hybrid() const override { return true; }
  void hybrid_theta_grad(const CRef& theta, const CRef& x, VRef gt) const override;
  Vec theta_grad_scale() const override;
  void init(std::uint64_t seed, int n, Vec& theta, RowMat& X) const override;
  const CompletionProblem& problem() const { return p_; }
  Mat as_matrix(const CRef& x) const;

 private:
  CompletionProblem p_;
};

std::shared_ptr<CompletionModel> make_completion(int n1 = 32, int n2 = 32, int rank = 2, double mask_fraction = 0.3,
                                                 double sigma = -1.0, std::uint64_t seed = 0);

// ---- two-layer Bayesian neural network with Laplace-scale priors

enum class Activation { Tanh, ClippedLinear };

struct ClassData {
  Mat F;                 // samples x features
  std::vector<int> label;
  int classes = 2;
};

struct BnnSpec {
  int hidden = 40;
  Activation activation = Activation::Tanh;
  ClassData train, test;
};

// two Gaussian blobs; n samples per split
BnnSpec make_blob_spec(int n_train, int n_test, int dim, std::uint64_t seed);

// two digit classes from IDX image/label files; pixels scaled to [0,1]
BnnSpec make_idx_spec(const std::string& images, const std::string& labels, int class_a, int class_b, int n_train,
                      int n_test);

class BnnModel final : public SplitModel {
 public:
  explicit BnnModel(BnnSpec spec);
  std::string name() const override { return "bnn"; }
  int d_theta() const override { return 2; }
  int d_x() const override { return dw_ + dv_; }
  void grad_g1(const CRef& theta, const CRef& x, VRef gt, VRef gx) const override;
  ProxResult prox_g2(const CRef& theta, const CRef& x, double lambda) const override;
  bool has_g1_value() const override { return true; }
  double g1_value(const CRef& theta, const CRef& x) const override;
  bool has_g2_value() const override { return true; }
  double g2_value(const CRef& theta, const CRef& x) const override;
  bool has_total_grad() const override { return true; }
  void grad_total(const CRef& theta, const CRef& x, VRef gt, VRef gx) const override;
  Vec theta_grad_scale() const override;
  void init(std::uint64_t seed, int n, Vec& theta, RowMat& X) const override;
  const BnnSpec& spec() const { return spec_; }
  int d_w() const { return dw_; }
  int d_v() const { return dv_; }
  // class probabilities for every row of F, one particle
  Mat predict(const CRef& x, const Mat& F) const;

 private:
  double activation(double z) const;
  double activation_grad(double z) const;
  BnnSpec spec_;
  int p_, m_, k_, dw_, dv_;
};

std::shared_ptr<BnnModel> make_bnn(BnnSpec spec);

}  // namespace pipla
