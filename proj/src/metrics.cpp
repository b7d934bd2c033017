#include "pipla/metrics.hpp"

#include <cmath>

#include "pipla/models.hpp"

namespace pipla {

MetricReport summarize(const std::string& name, std::vector<double> per_seed) {
  MetricReport r;
  r.name = name;
  if (!per_seed.empty()) {
    double m = 0.0;
    for (double v : per_seed) m += v;
    m /= double(per_seed.size());
    double s = 0.0;
    for (double v : per_seed) s += (v - m) * (v - m);
    r.value = m;
    r.dispersion = std::sqrt(s / double(per_seed.size()));
  }
  r.per_seed = std::move(per_seed);
  r.metadata["count"] = std::to_string(r.per_seed.size());
  return r;
}

double nmse(const Vec& est, const Vec& truth) {
  if (est.size() != truth.size()) throw Error(ErrorKind::InvalidArgument, "nmse: size mismatch");
  const double t = truth.squaredNorm();
  if (t == 0.0) throw domain_error("nmse: reference is zero");
  return (est - truth).squaredNorm() / t * 100.0;
}

double variance_slope(const std::vector<std::pair<double, double>>& n_var) {
  std::vector<double> xs, ys;
  for (const auto& [n, v] : n_var) {
    if (!(v > 0) || !(n > 0)) throw domain_error("variance_slope: N and variance must be positive");
    xs.push_back(std::log(n));
    ys.push_back(std::log(v));
  }
  int distinct = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    bool dup = false;
    for (std::size_t j = 0; j < i; ++j) dup |= xs[j] == xs[i];
    distinct += !dup;
  }
  if (distinct < 3) throw domain_error("variance_slope: need at least 3 distinct N");
  const double n = double(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxy / sxx;
}

namespace {
double ssim_window(const Mat& a, const Mat& b) {
  const double c1 = std::pow(0.01 * 255.0, 2), c2 = std::pow(0.03 * 255.0, 2);
  const double n = double(a.size());
  const double ma = a.mean(), mb = b.mean();
  const double va = (a.array() - ma).square().sum() / n;
  const double vb = (b.array() - mb).square().sum() / n;
  const double cov = ((a.array() - ma) * (b.array() - mb)).sum() / n;
  return ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
}
}  // namespace

double ssim(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw Error(ErrorKind::InvalidArgument, "ssim: shape mismatch");
  const Eigen::Index w1 = std::min<Eigen::Index>(8, a.rows()), w2 = std::min<Eigen::Index>(8, a.cols());
  double s = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i + w1 <= a.rows(); ++i)
    for (Eigen::Index j = 0; j + w2 <= a.cols(); ++j) {
      s += ssim_window(a.block(i, j, w1, w2), b.block(i, j, w1, w2));
      ++count;
    }
  return s / count;
}

ImageScores image_scores(const Mat& reconstruction, const Mat& truth) {
  if (reconstruction.rows() != truth.rows() || reconstruction.cols() != truth.cols())
    throw Error(ErrorKind::InvalidArgument, "image_scores: shape mismatch");
  return {(reconstruction - truth).squaredNorm() / double(truth.size()), ssim(reconstruction, truth)};
}

ClassScores classification_scores(const Mat& mean_probs, const std::vector<int>& labels) {
  if (mean_probs.rows() == 0 || mean_probs.rows() != Eigen::Index(labels.size()))
    throw Error(ErrorKind::InvalidArgument, "classification_scores: empty or mismatched test set");
  int wrong = 0;
  double lppd = 0.0;
  for (Eigen::Index i = 0; i < mean_probs.rows(); ++i) {
    Eigen::Index arg;
    mean_probs.row(i).maxCoeff(&arg);
    wrong += int(arg) != labels[i];
    lppd += std::log(std::max(mean_probs(i, labels[i]), 1e-300));
  }
  const double n = double(mean_probs.rows());
  return {100.0 * wrong / n, lppd / n};
}

ClassScores classification_scores(const RowMat& cloud, const BnnModel& model, const ClassData& test) {
  if (cloud.rows() == 0) throw Error(ErrorKind::InvalidArgument, "classification_scores: empty cloud");
  Mat acc = Mat::Zero(test.F.rows(), test.classes);
  for (Eigen::Index i = 0; i < cloud.rows(); ++i) acc += model.predict(cloud.row(i).transpose(), test.F);
  acc /= double(cloud.rows());
  return classification_scores(acc, test.label);
}

}  // namespace pipla
