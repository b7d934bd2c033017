#include "pipla/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pipla/io.hpp"
#include "pipla/rng.hpp"

namespace pipla {

namespace {
inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}
inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
}  // namespace

// ---------------------------------------------------------------- Gaussian toy

void GaussianToy::grad_g1(const CRef& theta, const CRef& x, VRef gt, VRef gx) const {
  const double t = theta[0];
  gt[0] = -(x.array() - t).sum();
  gx = (x.array() - t).matrix() - (y_ - x);
}

double GaussianToy::g1_value(const CRef& theta, const CRef& x) const {
  return 0.5 * (x.array() - theta[0]).square().sum() + 0.5 * (y_ - x).squaredNorm();
}

std::shared_ptr<GaussianToy> make_gaussian_toy(int d, double theta_true, std::uint64_t seed) {
  if (d < 1) throw config_error("gaussian_toy: d must be >= 1");
  CounterRng rng(seed, 0x70);
  Vec y(d);
  for (auto& v : y) v = theta_true + std::sqrt(2.0) * rng.normal();
  return std::make_shared<GaussianToy>(std::move(y));
}

// ---------------------------------------------------------------- logistic

LogisticDataset make_logistic_dataset(LogisticPrior prior, std::uint64_t seed, int d_x, int d_y, double theta_true) {
  if (d_x < 1 || d_y < 1) throw config_error("logistic: dimensions must be positive");
  LogisticDataset ds;
  ds.seed = seed;
  ds.theta_true = std::isnan(theta_true) ? (prior == LogisticPrior::Laplace ? -4.0 : 1.5) : theta_true;
  if (prior == LogisticPrior::Uniform && !(ds.theta_true > 0)) throw config_error("logistic_uniform: theta must be > 0");
  CounterRng rng(seed, 0x10);
  ds.x_true.resize(d_x);
  for (auto& v : ds.x_true) {
    if (prior == LogisticPrior::Laplace) {
      // theta + Laplace(0,1)
      const double e = -std::log(rng.uniform());
      v = ds.theta_true + (rng.uniform() < 0.5 ? -e : e);
    } else {
      v = rng.uniform(-ds.theta_true, ds.theta_true);
    }
  }
  ds.V.resize(d_y, d_x);
  for (int j = 0; j < d_y; ++j)
    for (int i = 0; i < d_x; ++i) ds.V(j, i) = rng.uniform(-1.0, 1.0);
  const Vec z = ds.V * ds.x_true;
  ds.y.resize(d_y);
  for (int j = 0; j < d_y; ++j) ds.y[j] = rng.bernoulli(sigmoid(z[j])) ? 1.0 : 0.0;
  return ds;
}

LogisticModel::LogisticModel(LogisticPrior prior, LogisticDataset data, bool iterative_prox, int prox_iters)
    : prior_(prior), data_(std::move(data)), Vt_(data_.V.transpose()), iterative_(iterative_prox),
      prox_iters_(prox_iters) {}

void LogisticModel::grad_g1(const CRef&, const CRef& x, VRef gt, VRef gx) const {
  const Vec z = data_.V * x;
  Vec s(z.size());
  for (Eigen::Index j = 0; j < z.size(); ++j) s[j] = sigmoid(z[j]) - data_.y[j];
  gt.setZero();
  gx = data_.V.transpose() * s;
}

void LogisticModel::grad_g1_batch(const CRef&, const RowMat& X, RowMat& Gt, RowMat& Gx) const {
  RowMat Z = X * Vt_;
  for (Eigen::Index i = 0; i < Z.rows(); ++i)
    for (Eigen::Index j = 0; j < Z.cols(); ++j) Z(i, j) = sigmoid(Z(i, j)) - data_.y[j];
  Gx.noalias() = Z * data_.V;
  Gt.setZero(X.rows(), 1);
}

double LogisticModel::g1_value(const CRef&, const CRef& x) const {
  const Vec z = data_.V * x;
  double s = 0.0;
  for (Eigen::Index j = 0; j < z.size(); ++j) s += softplus(z[j]) - data_.y[j] * z[j];
  if (prior_ == LogisticPrior::Laplace) s += double(x.size()) * std::log(2.0);
  return s;
}

double LogisticModel::g2_value(const CRef& theta, const CRef& x) const {
  const double t = theta[0];
  if (prior_ == LogisticPrior::Laplace) return (x.array() - t).abs().sum();
  if (!(t > 0) || (x.size() && x.cwiseAbs().maxCoeff() > t)) return std::numeric_limits<double>::infinity();
  return double(x.size()) * std::log(2.0 * t);
}

ProxResult LogisticModel::prox_g2(const CRef& theta, const CRef& x, double lambda) const {
  if (prior_ == LogisticPrior::Uniform) return prox_uniform(theta[0], x, lambda);
  return iterative_ ? prox_l1_shift_iterative(theta[0], x, lambda, prox_iters_)
                    : prox_l1_shift_approx(theta[0], x, lambda);
}

void LogisticModel::grad_total(const CRef& theta, const CRef& x, VRef gt, VRef gx) const {
  if (prior_ != LogisticPrior::Laplace) throw unsupported("logistic_uniform: no total gradient");
  grad_g1(theta, x, gt, gx);
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double g = sign0(x[i] - theta[0]);
    gx[i] += g;
    s += g;
  }
  gt[0] = -s;
}

void LogisticModel::init(std::uint64_t seed, int n, Vec& theta, RowMat& X) const {
  CounterRng rng(seed, 0x1417);
  theta.resize(1);
  X.resize(n, d_x());
  if (prior_ == LogisticPrior::Laplace) {
    theta[0] = rng.uniform(-5.0, 5.0);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.normal();
  } else {
    theta[0] = rng.uniform(0.5, 3.0);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = rng.uniform(-theta[0], theta[0]);
  }
}

std::shared_ptr<LogisticModel> make_logistic_laplace(std::uint64_t seed, bool iterative_prox) {
  return std::make_shared<LogisticModel>(LogisticPrior::Laplace, make_logistic_dataset(LogisticPrior::Laplace, seed),
                                         iterative_prox);
}

std::shared_ptr<LogisticModel> make_logistic_uniform(std::uint64_t seed) {
  return std::make_shared<LogisticModel>(LogisticPrior::Uniform, make_logistic_dataset(LogisticPrior::Uniform, seed));
}

// ---------------------------------------------------------------- deblurring

namespace {
// taps for offsets -h..h; even patches get half weights at both ends
std::vector<double> blur_taps(int patch, int& h) {
  h = patch / 2;
  std::vector<double> w(2 * h + 1, 1.0 / patch);
  if (patch % 2 == 0) w.front() = w.back() = 0.5 / patch;
  return w;
}

inline int wrap(int i, int n) {
  i %= n;
  return i < 0 ? i + n : i;
}
}  // namespace

Mat apply_blur(const Mat& img, int patch) {
  if (patch < 1) throw config_error("blur patch must be >= 1");
  int h;
  const auto w = blur_taps(patch, h);
  const int n1 = int(img.rows()), n2 = int(img.cols());
  Mat tmp = Mat::Zero(n1, n2), out = Mat::Zero(n1, n2);
  for (int j = 0; j < n2; ++j)
    for (int k = -h; k <= h; ++k) tmp.col(j) += w[k + h] * img.col(wrap(j + k, n2));
  for (int i = 0; i < n1; ++i)
    for (int k = -h; k <= h; ++k) out.row(i) += w[k + h] * tmp.row(wrap(i + k, n1));
  return out;
}

Mat phantom_image(int n1, int n2) {
  Mat img = Mat::Constant(n1, n2, 40.0);
  auto rect = [&](double r0, double r1, double c0, double c1, double v) {
    for (int i = int(r0 * n1); i < int(r1 * n1); ++i)
      for (int j = int(c0 * n2); j < int(c1 * n2); ++j) img(i, j) = v;
  };
  rect(0.12, 0.45, 0.15, 0.62, 150.0);
  rect(0.62, 0.88, 0.12, 0.35, 90.0);
  rect(0.06, 0.10, 0.45, 0.95, 255.0);
  const double ci = 0.68 * n1, cj = 0.70 * n2, r = 0.19 * std::min(n1, n2);
  for (int i = 0; i < n1; ++i)
    for (int j = 0; j < n2; ++j)
      if ((i - ci) * (i - ci) + (j - cj) * (j - cj) <= r * r) img(i, j) = 215.0;
  return img;
}

DeblurProblem make_deblur_problem(const Mat& truth, int patch, double sigma, std::uint64_t seed) {
  if (patch > truth.rows() || patch > truth.cols()) throw config_error("deblur: patch larger than image");
  DeblurProblem p;
  p.truth = truth;
  p.patch = patch;
  const Mat hx = apply_blur(truth, patch);
  if (!(sigma > 0)) {
    const double mean = hx.mean();
    const double var = (hx.array() - mean).square().mean();
    sigma = std::sqrt(var * 1e-3);
  }
  p.sigma = sigma;
  CounterRng rng(seed, 0xdb);
  p.observed = hx;
  for (Eigen::Index k = 0; k < p.observed.size(); ++k) p.observed.data()[k] += sigma * rng.normal();
  return p;
}

DeblurModel::DeblurModel(DeblurProblem p, TvSolverConfig tv) : p_(std::move(p)), tv_(tv) {
  if (!(p_.sigma > 0)) throw config_error("deblur: sigma must be positive");
}

Mat DeblurModel::as_image(const CRef& x) const {
  return Eigen::Map<const Mat>(x.data(), p_.truth.rows(), p_.truth.cols());
}

void DeblurModel::grad_g1(const CRef&, const CRef& x, VRef gt, VRef gx) const {
  const Mat r = apply_blur(as_image(x), p_.patch) - p_.observed;
  const Mat g = apply_blur(r, p_.patch) / (p_.sigma * p_.sigma);
  gx = Eigen::Map<const Vec>(g.data(), g.size());
  gt[0] = -double(x.size());
}

double DeblurModel::g1_value(const CRef& theta, const CRef& x) const {
  const Mat r = apply_blur(as_image(x), p_.patch) - p_.observed;
  return r.squaredNorm() / (2.0 * p_.sigma * p_.sigma) - double(x.size()) * theta[0];
}

double DeblurModel::g2_value(const CRef& theta, const CRef& x) const {
  return std::exp(theta[0]) * tv2d(as_image(x));
}

ProxResult DeblurModel::prox_g2(const CRef& theta, const CRef& x, double lambda) const {
  const TvResult t = prox_tv2d(as_image(x), std::exp(theta[0]), lambda, tv_);
  ProxResult r;
  r.theta = theta;
  r.x = Eigen::Map<const Vec>(t.z.data(), t.z.size());
  r.iterations = t.iterations;
  r.residual = t.residual;
  return r;
}

void DeblurModel::hybrid_theta_grad(const CRef& theta, const CRef& x, VRef gt) const {
  gt[0] = std::exp(theta[0]) * tv2d(as_image(x));
}

void DeblurModel::grad_total(const CRef& theta, const CRef& x, VRef gt, VRef gx) const {
  grad_g1(theta, x, gt, gx);
  const Mat img = as_image(x);
  const double e = std::exp(theta[0]);
  gt[0] += e * tv2d(img);
  const Mat s = tv2d_subgrad(img);
  gx += e * Eigen::Map<const Vec>(s.data(), s.size());
}

void DeblurModel::init(std::uint64_t seed, int n, Vec& theta, RowMat& X) const {
  CounterRng rng(seed, 0x1417);
  theta.resize(1);
  theta[0] = rng.uniform(-15.0, 0.0);
  X.resize(n, d_x());
  for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = 50.0 + 10.0 * rng.normal();
}

std::shared_ptr<DeblurModel> make_deblur(const Mat& truth, int patch, double sigma, std::uint64_t seed,
                                         TvSolverConfig tv) {
  return std::make_shared<DeblurModel>(make_deblur_problem(truth, patch, sigma, seed), tv);
}

// ---------------------------------------------------------------- completion

CompletionProblem make_completion_problem(int n1, int n2, int rank, double mask_fraction, double sigma,
                                          std::uint64_t seed, int block) {
  if (n1 < 1 || n2 < 1) throw config_error("completion: dimensions must be positive");
  if (!(mask_fraction > 0 && mask_fraction < 1)) throw config_error("completion: mask fraction must lie in (0,1)");
  if (rank < 1 || rank > std::min(n1, n2)) throw config_error("completion: bad rank");
  if (block < 1) throw config_error("completion: block must be >= 1");
  CompletionProblem p;
  p.sigma = sigma < 0 ? 0.1 : sigma;
  CounterRng rng(seed, 0xc0);
  if (rank == 2) {
    // 0/1 checkerboard: (1 + f g^T)/2
    Vec f(n1), g(n2);
    for (int i = 0; i < n1; ++i) f[i] = (i / block) % 2 ? -1.0 : 1.0;
    for (int j = 0; j < n2; ++j) g[j] = (j / block) % 2 ? -1.0 : 1.0;
    p.truth = 0.5 * (Mat::Ones(n1, n2) + f * g.transpose());
  } else {
    Mat a(n1, rank), b(n2, rank);
    for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = rng.normal();
    for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = rng.normal();
    p.truth = a * b.transpose() / std::sqrt(double(rank));
  }
  Eigen::JacobiSVD<Mat> svd(p.truth);
  const Vec s = svd.singularValues();
  p.rank = int((s.array() > 1e-9 * s[0]).count());

  const int total = n1 * n2;
  const int n_obs = int(std::lround((1.0 - mask_fraction) * total));
  std::vector<int> idx(total);
  std::iota(idx.begin(), idx.end(), 0);
  for (int i = total - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(std::uint64_t(i) + 1)]);
  p.observed.assign(idx.begin(), idx.begin() + n_obs);
  std::sort(p.observed.begin(), p.observed.end());
  p.y.resize(n_obs);
  for (int k = 0; k < n_obs; ++k) p.y[k] = p.truth.data()[p.observed[k]] + p.sigma * rng.normal();
  return p;
}

CompletionModel::CompletionModel(CompletionProblem p) : p_(std::move(p)) {}

Mat CompletionModel::as_matrix(const CRef& x) const {
  return Eigen::Map<const Mat>(x.data(), p_.truth.rows(), p_.truth.cols());
}

Vec CompletionModel::theta_grad_scale() const {
  Vec s(2);
  s << double(d_x()), double(p_.observed.size());
  return s;
}

void CompletionModel::grad_g1(const CRef& theta, const CRef& x, VRef gt, VRef gx) const {
  const double prec = std::exp(-2.0 * theta[1]);
  gx.setZero();
  double rr = 0.0;
  for (std::size_t k = 0; k < p_.observed.size(); ++k) {
    const double r = x[p_.observed[k]] - p_.y[Eigen::Index(k)];
    rr += r * r;
    gx[p_.observed[k]] = r * prec;
  }
  gt[0] = -double(x.size());
  gt[1] = double(p_.observed.size()) - rr * prec;
}

double CompletionModel::g1_value(const CRef& theta, const CRef& x) const {
  double rr = 0.0;
  for (std::size_t k = 0; k < p_.observed.size(); ++k) {
    const double r = x[p_.observed[k]] - p_.y[Eigen::Index(k)];
    rr += r * r;
  }
  return -double(x.size()) * theta[0] + double(p_.observed.size()) * theta[1] + 0.5 * rr * std::exp(-2.0 * theta[1]);
}

double CompletionModel::g2_value(const CRef& theta, const CRef& x) const {
  return std::exp(theta[0]) * nuclear_norm(as_matrix(x));
}

ProxResult CompletionModel::prox_g2(const CRef& theta, const CRef& x, double lambda) const {
  const SvtResult s = svt(as_matrix(x), std::exp(theta[0]) * lambda);
  ProxResult r;
  r.theta = theta;
  r.x = Eigen::Map<const Vec>(s.x.data(), s.x.size());
  return r;
}

void CompletionModel::hybrid_theta_grad(const CRef& theta, const CRef& x, VRef gt) const {
  gt[0] = std::exp(theta[0]) * nuclear_norm(as_matrix(x));
  gt[1] = 0.0;
}

void CompletionModel::grad_total(const CRef& theta, const CRef& x, VRef gt, VRef gx) const {
  grad_g1(theta, x, gt, gx);
  Eigen::JacobiSVD<Mat> svd(as_matrix(x), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vec s = svd.singularValues();
  const double e = std::exp(theta[0]);
  gt[0] += e * s.sum();
  const double tol = s.size() ? 1e-12 * std::max(1.0, s[0]) : 0.0;
  const Eigen::Index r = (s.array() > tol).count();
  const Mat sub = svd.matrixU().leftCols(r) * svd.matrixV().leftCols(r).transpose();
  gx += e * Eigen::Map<const Vec>(sub.data(), sub.size());
}

void CompletionModel::init(std::uint64_t seed, int n, Vec& theta, RowMat& X) const {
  CounterRng rng(seed, 0x1417);
  theta.resize(2);
  theta[0] = rng.uniform(-2.0, 2.0);
  theta[1] = rng.uniform(-2.0, 0.0);
  X.resize(n, d_x());
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < d_x(); ++k) X(i, k) = p_.sigma * rng.normal();
    for (std::size_t k = 0; k < p_.observed.size(); ++k) X(i, p_.observed[k]) += p_.y[Eigen::Index(k)];
  }
}

std::shared_ptr<CompletionModel> make_completion(int n1, int n2, int rank, double mask_fraction, double sigma,
                                                 std::uint64_t seed) {
  return std::make_shared<CompletionModel>(make_completion_problem(n1, n2, rank, mask_fraction, sigma, seed));
}

// ---------------------------------------------------------------- BNN

BnnSpec make_blob_spec(int n_train, int n_test, int dim, std::uint64_t seed) {
  if (n_train < 1 || n_test < 1 || dim < 1) throw config_error("bnn blobs: sizes must be positive");
  CounterRng rng(seed, 0xb1);
  BnnSpec spec;
  auto fill = [&](ClassData& d, int n) {
    d.F.resize(n, dim);
    d.label.resize(n);
    d.classes = 2;
    for (int i = 0; i < n; ++i) {
      const int l = int(rng.below(2));
      d.label[i] = l;
      for (int j = 0; j < dim; ++j) d.F(i, j) = (l ? 1.0 : -1.0) * 0.6 / std::sqrt(double(dim)) * 2.0 + rng.normal();
    }
  };
  fill(spec.train, n_train);
  fill(spec.test, n_test);
  return spec;
}

BnnSpec make_idx_spec(const std::string& images, const std::string& labels, int class_a, int class_b, int n_train,
                      int n_test) {
  const IdxImages img = read_idx_images(images);
  const auto lab = read_idx_labels(labels);
  if (int(lab.size()) != img.count) throw io_error("IDX image/label counts differ");
  const int dim = img.rows * img.cols;
  BnnSpec spec;
  std::vector<int> picked;
  for (int i = 0; i < img.count && int(picked.size()) < n_train + n_test; ++i)
    if (lab[i] == class_a || lab[i] == class_b) picked.push_back(i);
  if (int(picked.size()) < n_train + n_test) throw io_error("IDX files hold too few samples of the requested classes");
  auto fill = [&](ClassData& d, int off, int n) {
    d.F.resize(n, dim);
    d.label.resize(n);
    d.classes = 2;
    for (int r = 0; r < n; ++r) {
      const int i = picked[off + r];
      d.label[r] = lab[i] == class_b ? 1 : 0;
      for (int j = 0; j < dim; ++j) d.F(r, j) = img.pixels[std::size_t(i) * dim + j] / 255.0;
    }
  };
  fill(spec.train, 0, n_train);
  fill(spec.test, n_train, n_test);
  return spec;
}

BnnModel::BnnModel(BnnSpec spec) : spec_(std::move(spec)) {
  p_ = int(spec_.train.F.cols());
  m_ = spec_.hidden;
  k_ = spec_.train.classes;
  if (p_ < 1 || m_ < 1 || k_ < 2) throw config_error("bnn: bad dimensions");
  dw_ = m_ * p_;
  dv_ = k_ * m_;
}

double BnnModel::activation(double z) const {
  return spec_.activation == Activation::Tanh ? std::tanh(z) : std::clamp(z, -1.0, 1.0);
}

double BnnModel::activation_grad(double z) const {
  if (spec_.activation == Activation::Tanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  return std::abs(z) < 1.0 ? 1.0 : 0.0;
}

namespace {
using RM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
}

Mat BnnModel::predict(const CRef& x, const Mat& F) const {
  const Eigen::Map<const RM> w(x.data(), m_, p_);
  const Eigen::Map<const RM> v(x.data() + dw_, k_, m_);
  Mat H = F * w.transpose();
  H = H.unaryExpr([this](double z) { return activation(z); });
  Mat L = H * v.transpose();
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    const double mx = L.row(i).maxCoeff();
    L.row(i) = (L.row(i).array() - mx).exp().matrix();
    L.row(i) /= L.row(i).sum();
  }
  return L;
}

void BnnModel::grad_g1(const CRef&, const CRef& x, VRef gt, VRef gx) const {
  const Eigen::Map<const RM> w(x.data(), m_, p_);
  const Eigen::Map<const RM> v(x.data() + dw_, k_, m_);
  const Mat& F = spec_.train.F;
  const Mat A = F * w.transpose();
  const Mat H = A.unaryExpr([this](double z) { return activation(z); });
  Mat P = H * v.transpose();
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    const double mx = P.row(i).maxCoeff();
    P.row(i) = (P.row(i).array() - mx).exp().matrix();
    P.row(i) /= P.row(i).sum();
    P(i, spec_.train.label[i]) -= 1.0;
  }
  const Mat dv = P.transpose() * H;
  Mat dA = P * v;
  dA.array() *= A.unaryExpr([this](double z) { return activation_grad(z); }).array();
  const Mat dw = dA.transpose() * F;
  Eigen::Map<RM>(gx.data(), m_, p_) = dw;
  Eigen::Map<RM>(gx.data() + dw_, k_, m_) = dv;
  gt.setZero();
}

double BnnModel::g1_value(const CRef&, const CRef& x) const {
  const Eigen::Map<const RM> w(x.data(), m_, p_);
  const Eigen::Map<const RM> v(x.data() + dw_, k_, m_);
  const Mat& F = spec_.train.F;
  const Mat H = (F * w.transpose()).unaryExpr([this](double z) { return activation(z); });
  const Mat L = H * v.transpose();
  double s = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    const double mx = L.row(i).maxCoeff();
    s += mx + std::log((L.row(i).array() - mx).exp().sum()) - L(i, spec_.train.label[i]);
  }
  return s;
}

double BnnModel::g2_value(const CRef& theta, const CRef& x) const {
  const double a = theta[0], b = theta[1];
  return dw_ * a + x.head(dw_).cwiseAbs().sum() * std::exp(-2.0 * a) + dv_ * b +
         x.tail(dv_).cwiseAbs().sum() * std::exp(-2.0 * b);
}

ProxResult BnnModel::prox_g2(const CRef& theta, const CRef& x, double lambda) const {
  const ProxResult pw = prox_laplace_scale(theta[0], x.head(dw_), lambda);
  const ProxResult pv = prox_laplace_scale(theta[1], x.tail(dv_), lambda);
  ProxResult r;
  r.theta.resize(2);
  r.theta << pw.theta[0], pv.theta[0];
  r.x.resize(dw_ + dv_);
  r.x << pw.x, pv.x;
  return r;
}

void BnnModel::grad_total(const CRef& theta, const CRef& x, VRef gt, VRef gx) const {
  grad_g1(theta, x, gt, gx);
  const double ea = std::exp(-2.0 * theta[0]), eb = std::exp(-2.0 * theta[1]);
  double sw = 0.0, sv = 0.0;
  for (int i = 0; i < dw_; ++i) {
    sw += std::abs(x[i]);
    gx[i] += ea * sign0(x[i]);
  }
  for (int i = dw_; i < dw_ + dv_; ++i) {
    sv += std::abs(x[i]);
    gx[i] += eb * sign0(x[i]);
  }
  gt[0] = dw_ - 2.0 * ea * sw;
  gt[1] = dv_ - 2.0 * eb * sv;
}

Vec BnnModel::theta_grad_scale() const {
  Vec s(2);
  s << double(dw_), double(dv_);
  return s;
}

void BnnModel::init(std::uint64_t seed, int n, Vec& theta, RowMat& X) const {
  CounterRng rng(seed, 0x1417);
  theta = Vec::Zero(2);
  X.resize(n, d_x());
  const double aw = 1.0 / std::sqrt(2.0 * m_), av = 1.6 / std::sqrt(2.0 * m_);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < d_x(); ++k) {
      const double a = k < dw_ ? aw : av;
      const double mag = -a * std::log(rng.uniform());
      X(i, k) = rng.uniform() < 0.5 ? -mag : mag;
    }
}

std::shared_ptr<BnnModel> make_bnn(BnnSpec spec) { return std::make_shared<BnnModel>(std::move(spec)); }

}  // namespace pipla
