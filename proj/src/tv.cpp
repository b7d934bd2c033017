#include <algorithm>
#include <cmath>
#include <vector>

#include "pipla/prox.hpp"

namespace pipla {

double tv2d(const Mat& z) {
  double s = 0.0;
  const Eigen::Index n1 = z.rows(), n2 = z.cols();
  for (Eigen::Index j = 0; j < n2; ++j)
    for (Eigen::Index i = 0; i < n1; ++i) {
      if (i + 1 < n1) s += std::abs(z(i + 1, j) - z(i, j));
      if (j + 1 < n2) s += std::abs(z(i, j + 1) - z(i, j));
    }
  return s;
}

Mat tv2d_subgrad(const Mat& z) {
  const Eigen::Index n1 = z.rows(), n2 = z.cols();
  Mat g = Mat::Zero(n1, n2);
  for (Eigen::Index j = 0; j < n2; ++j)
    for (Eigen::Index i = 0; i < n1; ++i) {
      if (i + 1 < n1) {
        const double s = sign0(z(i + 1, j) - z(i, j));
        g(i + 1, j) += s;
        g(i, j) -= s;
      }
      if (j + 1 < n2) {
        const double s = sign0(z(i, j + 1) - z(i, j));
        g(i, j + 1) += s;
        g(i, j) -= s;
      }
    }
  return g;
}

// Condat's direct algorithm
void tv1d_denoise(const double* input, double* output, int width, double lambda) {
  if (width <= 0) return;
  if (lambda <= 0) {
    std::copy(input, input + width, output);
    return;
  }
  int k = 0, k0 = 0, kplus = 0, kminus = 0;
  double umin = lambda, umax = -lambda;
  double vmin = input[0] - lambda, vmax = input[0] + lambda;
  const double twolambda = 2.0 * lambda, minlambda = -lambda;
  for (;;) {
    while (k == width - 1) {
      if (umin < 0.0) {
        do output[k0++] = vmin;
        while (k0 <= kminus);
        umax = (vmin = input[kminus = k = k0]) + (umin = lambda) - vmax;
      } else if (umax > 0.0) {
        do output[k0++] = vmax;
        while (k0 <= kplus);
        umin = (vmax = input[kplus = k = k0]) + (umax = minlambda) - vmin;
      } else {
        vmin += umin / (k - k0 + 1);
        do output[k0++] = vmin;
        while (k0 <= k);
        return;
      }
    }
    if ((umin += input[k + 1] - vmin) < minlambda) {
      do output[k0++] = vmin;
      while (k0 <= kminus);
      vmax = (vmin = input[kplus = kminus = k = k0]) + twolambda;
      umin = lambda;
      umax = minlambda;
    } else if ((umax += input[k + 1] - vmax) > lambda) {
      do output[k0++] = vmax;
      while (k0 <= kplus);
      vmin = (vmax = input[kplus = kminus = k = k0]) - twolambda;
      umin = lambda;
      umax = minlambda;
    } else {
      ++k;
      if (umin >= lambda) {
        vmin += (umin - lambda) / ((kminus = k) - k0 + 1);
        umin = lambda;
      }
      if (umax <= minlambda) {
        vmax += (umax + lambda) / ((kplus = k) - k0 + 1);
        umax = minlambda;
      }
    }
  }
}

namespace {

// 1-d TV along every column (contiguous in column-major storage)
void tv_columns(const Mat& in, Mat& out, double w) {
  out.resize(in.rows(), in.cols());
  for (Eigen::Index j = 0; j < in.cols(); ++j)
    tv1d_denoise(in.col(j).data(), out.col(j).data(), int(in.rows()), w);
}

void tv_rows(const Mat& in, Mat& out, double w, std::vector<double>& a, std::vector<double>& b) {
  out.resize(in.rows(), in.cols());
  const auto n2 = in.cols();
  a.resize(n2);
  b.resize(n2);
  for (Eigen::Index i = 0; i < in.rows(); ++i) {
    for (Eigen::Index j = 0; j < n2; ++j) a[j] = in(i, j);
    tv1d_denoise(a.data(), b.data(), int(n2), w);
    for (Eigen::Index j = 0; j < n2; ++j) out(i, j) = b[j];
  }
}

// forward differences: horizontal and vertical components
void grad_op(const Mat& z, Mat& ph, Mat& pv) {
  const Eigen::Index n1 = z.rows(), n2 = z.cols();
  ph.setZero(n1, n2);
  pv.setZero(n1, n2);
  if (n2 > 1) ph.leftCols(n2 - 1) = z.rightCols(n2 - 1) - z.leftCols(n2 - 1);
  if (n1 > 1) pv.topRows(n1 - 1) = z.bottomRows(n1 - 1) - z.topRows(n1 - 1);
}

// adjoint of grad_op
Mat grad_adj(const Mat& ph, const Mat& pv) {
  const Eigen::Index n1 = ph.rows(), n2 = ph.cols();
  Mat out = Mat::Zero(n1, n2);
  if (n2 > 1) {
    out.leftCols(n2 - 1) -= ph.leftCols(n2 - 1);
    out.rightCols(n2 - 1) += ph.leftCols(n2 - 1);
  }
  if (n1 > 1) {
    out.topRows(n1 - 1) -= pv.topRows(n1 - 1);
    out.bottomRows(n1 - 1) += pv.topRows(n1 - 1);
  }
  return out;
}

TvResult solve_dr(const Mat& y, double w, double lambda, const TvSolverConfig& cfg) {
  const double t = lambda;
  const double tau = lambda * t / (lambda + t);
  TvResult r;
  Mat s = y, x, xprev, m, a;
  std::vector<double> b1, b2;
  for (int k = 0; k < cfg.max_iterations; ++k) {
    m = (t * y + lambda * s) / (lambda + t);
    tv_columns(m, x, w * tau);
    tv_rows(2.0 * x - s, a, w * t, b1, b2);
    s += a - x;
    r.iterations = k + 1;
    if (k > 0) {
      r.residual = (x - xprev).norm() / std::max(1.0, x.norm());
      if (r.residual <= cfg.tolerance) {
        r.converged = true;
        break;
      }
    }
    xprev = x;
  }
  r.z = std::move(x);
  return r;
}

TvResult solve_chambolle(const Mat& y, double w, double lambda, const TvSolverConfig& cfg) {
  const Eigen::Index n1 = y.rows(), n2 = y.cols();
  Mat ph = Mat::Zero(n1, n2), pv = Mat::Zero(n1, n2);
  Mat qh = ph, qv = pv, gh, gv;
  double tk = 1.0;
  const double step = 1.0 / (8.0 * lambda);
  const double y2 = y.squaredNorm();
  TvResult r;
  Mat z = y;
  for (int k = 0; k < cfg.max_iterations; ++k) {
    const Mat zq = y - lambda * grad_adj(qh, qv);
    grad_op(zq, gh, gv);
    Mat nh = (qh + step * gh).cwiseMax(-w).cwiseMin(w);
    Mat nv = (qv + step * gv).cwiseMax(-w).cwiseMin(w);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    qh = nh + ((tk - 1.0) / tn) * (nh - ph);
    qv = nv + ((tk - 1.0) / tn) * (nv - pv);
    ph = std::move(nh);
    pv = std::move(nv);
    tk = tn;
    z = y - lambda * grad_adj(ph, pv);
    const double primal = w * tv2d(z) + (z - y).squaredNorm() / (2.0 * lambda);
    const double dual = (y2 - z.squaredNorm()) / (2.0 * lambda);
    r.iterations = k + 1;
    r.residual = std::max(0.0, primal - dual) / std::max(1.0, std::abs(primal));
    if (r.residual <= cfg.tolerance) {
      r.converged = true;
      break;
    }
  }
  r.z = std::move(z);
  return r;
}

}  // namespace

TvResult prox_tv2d(const Mat& image, double weight, double lambda, const TvSolverConfig& cfg) {
  if (!(lambda > 0)) throw domain_error("prox_tv2d: lambda must be positive");
  if (!(weight >= 0) || !std::isfinite(weight * lambda)) throw domain_error("prox_tv2d: bad weight");
  if (cfg.max_iterations < 1 || !(cfg.tolerance > 0)) throw config_error("prox_tv2d: bad solver config");
  if (weight == 0.0 || image.size() == 0) {
    TvResult r;
    r.z = image;
    r.converged = true;
    return r;
  }
  if (image.rows() == 1 || image.cols() == 1) {
    // a single line is solved exactly
    TvResult r;
    r.z.resize(image.rows(), image.cols());
    Mat tmp = image;
    tv1d_denoise(tmp.data(), r.z.data(), int(image.size()), weight * lambda);
    r.iterations = 1;
    r.converged = true;
    return r;
  }
  return cfg.algo == TvSolverConfig::Algo::Chambolle ? solve_chambolle(image, weight, lambda, cfg)
                                                     : solve_dr(image, weight, lambda, cfg);
}

}  // namespace pipla
