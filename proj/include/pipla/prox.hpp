#pragma once

#include "pipla/core.hpp"

namespace pipla {

// sign with sign(0) = 0
inline double sign0(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

// principal branch, z >= -1/e
double lambert_w0(double z);

Vec soft_threshold(const CRef& v, double t);

using JointProx = std::function<ProxResult(const CRef& theta, const CRef& x, double lambda)>;

// (v - prox(v)) / lambda, theta block first
Vec moreau_grad(const JointProx& prox, const CRef& theta, const CRef& x, double lambda);

// g2 = sum |x_i - theta|
ProxResult prox_l1_shift_approx(double theta, const CRef& x, double lambda);
ProxResult prox_l1_shift_iterative(double theta, const CRef& x, double lambda, int max_iters = 40,
                                   double tol = 1e-13);

// g2 = d alpha + sum |w_i| e^{-2 alpha}
ProxResult prox_laplace_scale(double alpha, const CRef& w, double lambda);

// g2 = d log(2 theta) + indicator(|x_i| <= theta)
ProxResult prox_uniform(double theta, const CRef& x, double lambda);

// prox of the clipped-linear activation, five-case map
Vec prox_piecewise_linear(const CRef& x, double lambda);

// prox_{g2}^gamma(v - gamma grad g1(v))
ProxResult approx_prox_full(const SplitModel& model, const CRef& theta, const CRef& x, double gamma);

// ---- total variation (anisotropic, forward differences, zero-gradient boundary)

struct TvSolverConfig {
  enum class Algo { Chambolle, DouglasRachford };
  int max_iterations = 200;
  double tolerance = 1e-6;
  Algo algo = Algo::DouglasRachford;
};

struct TvResult {
  Mat z;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

double tv2d(const Mat& z);
// subgradient of tv2d with sign(0)=0
Mat tv2d_subgrad(const Mat& z);

// exact 1-d TV denoising: argmin 0.5||z-y||^2 + w sum |z_{k+1}-z_k|
void tv1d_denoise(const double* y, double* z, int n, double w);

// argmin weight*TV(z) + ||z - image||^2 / (2 lambda)
TvResult prox_tv2d(const Mat& image, double weight, double lambda, const TvSolverConfig& cfg = {});

// ---- nuclear norm

struct SvtResult {
  Mat x;
  int rank = 0;
  double theta1 = 0.0;
};

// soft-threshold singular values by tau
SvtResult svt(const Mat& x, double tau);

// joint prox of e^{theta1} ||x||_tr, two-stage Lambert-W approximation
SvtResult prox_nuclear(double theta1, const Mat& x, double lambda);

double nuclear_norm(const Mat& x);

}  // namespace pipla
