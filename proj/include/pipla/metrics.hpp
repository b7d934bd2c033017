#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pipla/core.hpp"

namespace pipla {

struct MetricReport {
  std::string name;
  double value = 0.0;
  std::vector<double> per_seed;
  double dispersion = 0.0;
  std::map<std::string, std::string> metadata;
};

// mean and population std of per_seed
MetricReport summarize(const std::string& name, std::vector<double> per_seed);

// ||est - truth||^2 / ||truth||^2 * 100
double nmse(const Vec& est, const Vec& truth);

// least-squares slope of log(var) against log(N)
double variance_slope(const std::vector<std::pair<double, double>>& n_var);

struct ImageScores {
  double mse;
  double ssim;
};

// SSIM: mean over all 8x8 sliding windows (whole image when smaller), 8-bit constants
ImageScores image_scores(const Mat& reconstruction, const Mat& truth);
double ssim(const Mat& a, const Mat& b);

struct ClassScores {
  double error_percent;
  double lppd;
};

class BnnModel;
struct ClassData;
ClassScores classification_scores(const RowMat& cloud, const BnnModel& model, const ClassData& test);
// from particle-averaged class probabilities, rows = test points
ClassScores classification_scores(const Mat& mean_probs, const std::vector<int>& labels);

}  // namespace pipla
