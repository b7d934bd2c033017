#pragma once

#include <cmath>
#include <string>

#include "pipla/core.hpp"
#include "pipla/prox.hpp"

namespace testing {

using namespace pipla;

// g1 = c ||x||^2 / 2, g2 = w sum |x_i|, no parameters
class AbsModel : public SplitModel {
 public:
  AbsModel(int d, double c, double w) : d_(d), c_(c), w_(w) {}
  std::string name() const override { return "abs"; }
  int d_theta() const override { return 0; }
  int d_x() const override { return d_; }
  void grad_g1(const CRef&, const CRef& x, VRef gt, VRef gx) const override {
    gt.setZero();
    gx = c_ * x;
  }
  ProxResult prox_g2(const CRef& theta, const CRef& x, double lambda) const override {
    return {theta, soft_threshold(x, w_ * lambda), 0, 0.0};
  }
  bool has_g1_value() const override { return true; }
  double g1_value(const CRef&, const CRef& x) const override { return 0.5 * c_ * x.squaredNorm(); }
  bool has_g2_value() const override { return true; }
  double g2_value(const CRef&, const CRef& x) const override { return w_ * x.lpNorm<1>(); }

 private:
  int d_;
  double c_, w_;
};

// quadratic with theta: U = sum (x_i - theta)^2 / 2 + |.| on x, used where a parameter block is needed
class ShiftAbsModel : public SplitModel {
 public:
  explicit ShiftAbsModel(int d) : d_(d) {}
  std::string name() const override { return "shift_abs"; }
  int d_theta() const override { return 1; }
  int d_x() const override { return d_; }
  void grad_g1(const CRef& theta, const CRef& x, VRef gt, VRef gx) const override {
    gt[0] = -(x.array() - theta[0]).sum();
    gx = (x.array() - theta[0]).matrix();
  }
  ProxResult prox_g2(const CRef& theta, const CRef& x, double lambda) const override {
    return {theta, soft_threshold(x, lambda), 0, 0.0};
  }

 private:
  int d_;
};

inline Vec vec(std::initializer_list<double> v) {
  Vec out(Eigen::Index(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

}  // namespace testing
