#include "pipla/prox.hpp"

#include <boost/math/special_functions/lambert_w.hpp>

#include <algorithm>
#include <cmath>

namespace pipla {

double lambert_w0(double z) {
  const double zmin = -std::exp(-1.0);
  if (!(z >= zmin)) throw domain_error("lambert_w0: argument below -1/e");
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return z;
  return boost::math::lambert_w0(z);
}

Vec soft_threshold(const CRef& v, double t) {
  Vec out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - t;
    out[i] = a > 0 ? sign0(v[i]) * a : 0.0;
  }
  return out;
}

Vec moreau_grad(const JointProx& prox, const CRef& theta, const CRef& x, double lambda) {
  if (!(lambda > 0)) throw domain_error("moreau_grad: lambda must be positive");
  const ProxResult p = prox(theta, x, lambda);
  Vec g(theta.size() + x.size());
  g.head(theta.size()) = (theta - p.theta) / lambda;
  g.tail(x.size()) = (x - p.x) / lambda;
  return g;
}

ProxResult prox_l1_shift_approx(double theta, const CRef& x, double lambda) {
  ProxResult r;
  r.x.resize(x.size());
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = x[i] - theta;
    r.x[i] = std::abs(d) >= lambda ? theta + (d - lambda * sign0(d)) : theta;
    s += sign0(r.x[i] - theta);
  }
  r.theta = Vec::Constant(1, theta + lambda * s);
  return r;
}

ProxResult prox_l1_shift_iterative(double theta, const CRef& x, double lambda, int max_iters, double tol) {
  const auto d = double(x.size());
  // F(u) = u - theta - lambda * sum clip((x_i - u)/lambda, -1, 1), increasing in u
  auto eval = [&](double u, double& slope) {
    double s = 0.0;
    slope = 1.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double t = (x[i] - u) / lambda;
      if (t >= 1.0) s += 1.0;
      else if (t <= -1.0) s -= 1.0;
      else {
        s += t;
        slope += 1.0;
      }
    }
    return u - theta - lambda * s;
  };
  double lo = theta - lambda * d, hi = theta + lambda * d;
  double u = theta, slope = 1.0;
  double f = eval(u, slope);
  int it = 1;
  const double scale = std::max(1.0, std::abs(theta));
  while (std::abs(f) > tol * scale && it < max_iters) {
    if (f > 0) hi = u;
    else lo = u;
    double next = u - f / slope;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    u = next;
    f = eval(u, slope);
    ++it;
  }
  ProxResult r;
  r.theta = Vec::Constant(1, u);
  r.x.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double t = x[i] - u;
    r.x[i] = std::abs(t) > lambda ? u + t - lambda * sign0(t) : u;
  }
  r.iterations = it;
  r.residual = std::abs(f);
  return r;
}

ProxResult prox_laplace_scale(double alpha, const CRef& w, double lambda) {
  const double thr = lambda * std::exp(-2.0 * alpha);
  ProxResult r;
  r.x.resize(w.size());
  double s = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double a = std::abs(w[i]);
    r.x[i] = a >= thr ? w[i] - thr * sign0(w[i]) : 0.0;
    s += std::abs(r.x[i]);
  }
  const double dw = double(w.size());
  r.theta = Vec::Constant(1, alpha - lambda * dw + 0.5 * lambert_w0(4.0 * thr * s));
  return r;
}

ProxResult prox_uniform(double theta, const CRef& x, double lambda) {
  if (!(theta > 0)) throw domain_error("prox_uniform: theta must be positive");
  const double dx = double(x.size());
  const double disc = theta * theta - 4.0 * lambda * dx;
  double u0;
  if (disc >= 0) u0 = 0.5 * (theta + std::sqrt(disc));
  else u0 = x.size() ? x.cwiseAbs().maxCoeff() : 0.0;
  ProxResult r;
  r.theta = Vec::Constant(1, u0);
  r.x.resize(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) r.x[i] = sign0(x[i]) * std::min(std::abs(x[i]), u0);
  return r;
}

Vec prox_piecewise_linear(const CRef& x, double lambda) {
  if (!(lambda > 0 && lambda < 1)) throw domain_error("prox_piecewise_linear: lambda must lie in (0,1)");
  Vec out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double v = x[i];
    if (v < -1.0) out[i] = v;
    else if (v <= -1.0 + lambda) out[i] = -1.0;
    else if (v < 1.0 - lambda) out[i] = v - lambda;
    else if (v <= 1.0) out[i] = 1.0;
    else out[i] = v;
  }
  return out;
}

ProxResult approx_prox_full(const SplitModel& model, const CRef& theta, const CRef& x, double gamma) {
  if (!(gamma > 0)) throw domain_error("approx_prox_full: gamma must be positive");
  Vec gt(model.d_theta()), gx(model.d_x());
  model.grad_g1(theta, x, gt, gx);
  const Vec vt = theta - gamma * gt;
  const Vec vx = x - gamma * gx;
  return model.prox_g2(vt, vx, gamma);
}

// ---- nuclear norm

namespace {
struct Svd {
  Mat U, V;
  Vec s;
};

Svd svd_of(const Mat& x) {
  Eigen::JacobiSVD<Mat> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw Error(ErrorKind::Numeric, "SVD failed for " + std::to_string(x.rows()) + "x" +
                                        std::to_string(x.cols()) + " matrix, max |entry| " +
                                        std::to_string(x.cwiseAbs().maxCoeff()));
  }
  return {svd.matrixU(), svd.matrixV(), svd.singularValues()};
}

SvtResult rebuild(const Svd& d, double tau) {
  SvtResult r;
  Vec s = (d.s.array() - tau).max(0.0).matrix();
  r.rank = int((s.array() > 0).count());
  r.x = d.U * s.asDiagonal() * d.V.transpose();
  return r;
}
}  // namespace

double nuclear_norm(const Mat& x) {
  if (x.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(x);
  return svd.singularValues().sum();
}

SvtResult svt(const Mat& x, double tau) {
  if (!(tau >= 0)) throw domain_error("svt: threshold must be nonnegative");
  return rebuild(svd_of(x), tau);
}

SvtResult prox_nuclear(double theta1, const Mat& x, double lambda) {
  if (!(lambda > 0)) throw domain_error("prox_nuclear: lambda must be positive");
  const Svd d = svd_of(x);
  const double tau0 = std::exp(theta1) * lambda;
  const double c = (d.s.array() - tau0).max(0.0).sum();
  const double alpha = theta1 - lambert_w0(tau0 * c);
  SvtResult r = rebuild(d, std::exp(alpha) * lambda);
  r.theta1 = alpha;
  return r;
}

}  // namespace pipla
