#include "pipla/prox_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include "pipla/io.hpp"
#include "pipla/oracles.hpp"
#include "pipla/prox.hpp"
#include "pipla/rng.hpp"

namespace pipla {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Prop { Optimality, Nonexpansive, Taylor, Subgradient, Envelope };

// v is flattened: scalar parameter first for joint operators, matrices column-major
struct Case {
  Vec v;
  double lambda = 0.1;
  int rows = 0, cols = 0;
};

struct Op {
  std::string name;
  bool exact = true;
  std::function<Vec(const Case&)> prox;
  std::function<double(const Vec&, const Case&)> g2;
  std::function<Vec(const Case&)> grad;
  std::function<Case(CounterRng&, Prop)> sample;
  std::function<double(const Case&, const Vec&)> subgrad;  // violation, empty: skipped
  std::function<bool(const Case&)> smooth_envelope;        // empty: envelope row skipped
  bool nonexpansive = false;
  int theta_dim = 0;  // leading entries of v passed as theta to moreau_grad
  std::string domain, smooth_domain, subgrad_note;
};

double log_uniform(CounterRng& rng, double lo_exp, double hi_exp) { return std::pow(10.0, rng.uniform(lo_exp, hi_exp)); }

int pick(CounterRng& rng, int lo, int hi) { return lo + int(rng.below(std::uint64_t(hi - lo + 1))); }

double sym(CounterRng& rng, double lo, double hi) { return (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(lo, hi); }

Vec cat(const Vec& a, const Vec& b) {
  Vec r(a.size() + b.size());
  r << a, b;
  return r;
}

Mat as_mat(const Vec& v, Eigen::Index offset, int rows, int cols) {
  return Eigen::Map<const Mat>(v.data() + offset, rows, cols);
}

Vec flat(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

double nuc(const Mat& m) {
  if (m.rows() == 1 || m.cols() == 1) return m.norm();
  return nuclear_norm(m);
}

// distance of s to the convex subdifferential of |.| at r
double abs_subgrad_violation(double r, double s, double scale = 1.0) {
  if (r > 0) return std::abs(s - scale);
  if (r < 0) return std::abs(s + scale);
  return std::max(0.0, std::abs(s) - scale);
}

// G in the subdifferential of ||.||_tr at P: ||G||_2 <= 1 and U_r^T G V_r = I on the range of P
double nuclear_subgrad_violation(const Mat& P, const Mat& G) {
  Eigen::JacobiSVD<Mat> sg(G);
  double viol = std::max(0.0, sg.singularValues()(0) - 1.0);
  Eigen::JacobiSVD<Mat> sp(P, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double smax = sp.singularValues().size() ? sp.singularValues()(0) : 0.0;
  int r = 0;
  for (Eigen::Index i = 0; i < sp.singularValues().size(); ++i) r += sp.singularValues()(i) > 1e-10 * std::max(1.0, smax);
  if (r > 0) {
    const Mat inner = sp.matrixU().leftCols(r).transpose() * G * sp.matrixV().leftCols(r);
    viol = std::max(viol, (inner - Mat::Identity(r, r)).cwiseAbs().maxCoeff());
  }
  return viol;
}

Mat uv_t(const Mat& X) {
  Eigen::JacobiSVD<Mat> s(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return s.matrixU() * s.matrixV().transpose();
}

// singular values bounded away from zero and from each other
Mat well_separated(CounterRng& rng, int rows, int cols) {
  for (;;) {
    Mat X(rows, cols);
    for (Eigen::Index i = 0; i < X.size(); ++i) X.data()[i] = 2.0 * rng.normal();
    Eigen::JacobiSVD<Mat> s(X);
    const Vec sv = s.singularValues();
    bool ok = sv(sv.size() - 1) > 0.5;
    for (Eigen::Index i = 1; i < sv.size(); ++i) ok &= sv(i - 1) - sv(i) > 0.2;
    if (ok) return X;
  }
}

std::vector<Op> build_ops(const std::string& fault) {
  std::vector<Op> ops;
  const bool flip = fault == "soft_threshold_sign";

  {
    Op o;
    o.name = "soft_threshold";
    o.domain = "v_i~U(-3,3), d in 1..4, lambda=10^U(-2,0)";
    o.smooth_domain = "|v_i| in [0.25,3]";
    o.prox = [flip](const Case& c) {
      if (!flip) return soft_threshold(c.v, c.lambda);
      Vec p = soft_threshold(c.v, c.lambda);
      for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p[i] != 0.0) p[i] = c.v[i] + c.lambda * sign0(c.v[i]);
      return p;
    };
    o.g2 = [](const Vec& z, const Case&) { return z.lpNorm<1>(); };
    o.grad = [](const Case& c) { return Vec(c.v.unaryExpr([](double t) { return sign0(t); })); };
    o.sample = [](CounterRng& rng, Prop p) {
      Case c;
      const int d = p == Prop::Envelope ? 1 : pick(rng, 1, 4);
      c.v.resize(d);
      for (auto& t : c.v) t = p == Prop::Taylor ? sym(rng, 0.25, 3.0) : rng.uniform(-3.0, 3.0);
      c.lambda = log_uniform(rng, -2, 0);
      return c;
    };
    o.subgrad = [](const Case& c, const Vec& p) {
      double w = 0;
      for (Eigen::Index i = 0; i < p.size(); ++i) w = std::max(w, abs_subgrad_violation(p[i], (c.v[i] - p[i]) / c.lambda));
      return w;
    };
    o.smooth_envelope = [](const Case& c) { return std::abs(std::abs(c.v[0]) - c.lambda) > 0.02; };
    o.nonexpansive = true;
    ops.push_back(o);
  }

  auto l1_g2 = [](const Vec& z, const Case&) { return (z.tail(z.size() - 1).array() - z[0]).abs().sum(); };
  auto l1_grad = [](const Case& c) {
    Vec g(c.v.size());
    g[0] = 0;
    for (Eigen::Index i = 1; i < c.v.size(); ++i) {
      g[i] = sign0(c.v[i] - c.v[0]);
      g[0] -= g[i];
    }
    return g;
  };
  auto l1_sample = [](double lo, double hi) {
    return [lo, hi](CounterRng& rng, Prop p) {
      Case c;
      const int d = p == Prop::Envelope ? 1 : pick(rng, 1, 5);
      c.v.resize(d + 1);
      c.v[0] = rng.uniform(-2.0, 2.0);
      for (int i = 1; i <= d; ++i) c.v[i] = c.v[0] + (p == Prop::Taylor ? sym(rng, 1.0, 3.0) : rng.uniform(-3.0, 3.0));
      c.lambda = log_uniform(rng, lo, hi);
      return c;
    };
  };
  {
    Op o;
    o.name = "l1_shift_approx";
    o.exact = false;
    o.domain = "theta~U(-2,2), x_i-theta~U(-3,3), d_x in 1..5, lambda=10^U(-3,-1)";
    o.smooth_domain = "|x_i-theta| in [1,3]";
    o.prox = [](const Case& c) {
      auto r = prox_l1_shift_approx(c.v[0], c.v.tail(c.v.size() - 1), c.lambda);
      return cat(r.theta, r.x);
    };
    o.g2 = l1_g2;
    o.grad = l1_grad;
    o.sample = l1_sample(-3, -1);
    o.subgrad = [](const Case& c, const Vec& p) {
      double w = 0;
      for (Eigen::Index i = 1; i < p.size(); ++i)
        w = std::max(w, abs_subgrad_violation(p[i] - c.v[0], (c.v[i] - p[i]) / c.lambda));
      return w;
    };
    o.subgrad_note = "x part at fixed input theta";
    ops.push_back(o);
  }
  {
    Op o;
    o.name = "l1_shift_iterative";
    o.domain = "theta~U(-2,2), x_i-theta~U(-3,3), d_x in 1..5, lambda=10^U(-2,0)";
    o.smooth_domain = "|x_i-theta| in [1,3]";
    o.prox = [](const Case& c) {
      auto r = prox_l1_shift_iterative(c.v[0], c.v.tail(c.v.size() - 1), c.lambda);
      return cat(r.theta, r.x);
    };
    o.g2 = l1_g2;
    o.grad = l1_grad;
    o.sample = l1_sample(-2, 0);
    o.subgrad = [](const Case& c, const Vec& p) {
      double w = 0, sum = 0;
      for (Eigen::Index i = 1; i < p.size(); ++i) {
        const double s = (c.v[i] - p[i]) / c.lambda;
        sum += s;
        w = std::max(w, abs_subgrad_violation(p[i] - p[0], s));
      }
      return std::max(w, std::abs((c.v[0] - p[0]) / c.lambda + sum));
    };
    o.subgrad_note = "joint condition";
    o.smooth_envelope = [](const Case& c) { return std::abs(std::abs(c.v[1] - c.v[0]) - 2 * c.lambda) > 0.02; };
    o.nonexpansive = true;
    o.theta_dim = 1;
    ops.push_back(o);
  }
  {
    Op o;
    o.name = "laplace_scale";
    o.exact = false;
    o.domain = "alpha~U(-1,1), w_i~N(0,1)U(0.5,2), d_w in 1..5, lambda=10^U(-3,-1)";
    o.smooth_domain = "alpha~U(-0.5,1), |w_i| in [1,3]";
    o.prox = [](const Case& c) {
      auto r = prox_laplace_scale(c.v[0], c.v.tail(c.v.size() - 1), c.lambda);
      return cat(r.theta, r.x);
    };
    o.g2 = [](const Vec& z, const Case&) {
      const double d = double(z.size() - 1);
      return d * z[0] + z.tail(z.size() - 1).lpNorm<1>() * std::exp(-2.0 * z[0]);
    };
    o.grad = [](const Case& c) {
      const double e = std::exp(-2.0 * c.v[0]);
      Vec g(c.v.size());
      g[0] = double(c.v.size() - 1) - 2.0 * c.v.tail(c.v.size() - 1).lpNorm<1>() * e;
      for (Eigen::Index i = 1; i < c.v.size(); ++i) g[i] = sign0(c.v[i]) * e;
      return g;
    };
    o.sample = [](CounterRng& rng, Prop p) {
      Case c;
      const int d = pick(rng, 1, 5);
      c.v.resize(d + 1);
      if (p == Prop::Taylor) {
        c.v[0] = rng.uniform(-0.5, 1.0);
        for (int i = 1; i <= d; ++i) c.v[i] = sym(rng, 1.0, 3.0);
      } else {
        c.v[0] = rng.uniform(-1.0, 1.0);
        for (int i = 1; i <= d; ++i) c.v[i] = rng.normal() * rng.uniform(0.5, 2.0);
      }
      c.lambda = log_uniform(rng, -3, -1);
      return c;
    };
    o.subgrad = [](const Case& c, const Vec& p) {
      const double e = std::exp(-2.0 * c.v[0]);
      double w = 0;
      for (Eigen::Index i = 1; i < p.size(); ++i)
        w = std::max(w, abs_subgrad_violation(p[i], (c.v[i] - p[i]) / c.lambda, e));
      return w;
    };
    o.subgrad_note = "w part at fixed input alpha";
    ops.push_back(o);
  }
  {
    Op o;
    o.name = "uniform";
    o.exact = false;
    o.domain = "theta~U(0.5,3), x_i~U(-1.2theta,1.2theta), d_x in 1..5, lambda=10^U(-3,-1), theta^2>=4 lambda d_x; "
               "oracle restricted to u above the smaller stationary root";
    o.smooth_domain = "theta~U(2,3), |x_i|<theta-0.5, d_x in 1..3";
    o.prox = [](const Case& c) {
      auto r = prox_uniform(c.v[0], c.v.tail(c.v.size() - 1), c.lambda);
      return cat(r.theta, r.x);
    };
    o.g2 = [](const Vec& z, const Case& c) {
      const double d = double(z.size() - 1);
      const double disc = c.v[0] * c.v[0] - 4.0 * c.lambda * d;
      const double lo = disc >= 0 ? 0.5 * (c.v[0] - std::sqrt(disc)) : 0.0;
      if (!(z[0] > lo) || !(z[0] > 0)) return kInf;
      if (z.size() > 1 && z.tail(z.size() - 1).cwiseAbs().maxCoeff() > z[0]) return kInf;
      return d * std::log(2.0 * z[0]);
    };
    o.grad = [](const Case& c) {
      Vec g = Vec::Zero(c.v.size());
      g[0] = double(c.v.size() - 1) / c.v[0];
      return g;
    };
    o.sample = [](CounterRng& rng, Prop p) {
      Case c;
      if (p == Prop::Taylor) {
        const int d = pick(rng, 1, 3);
        c.v.resize(d + 1);
        c.v[0] = rng.uniform(2.0, 3.0);
        for (int i = 1; i <= d; ++i) c.v[i] = rng.uniform(-1.0, 1.0) * (c.v[0] - 0.5);
        c.lambda = 0.1;
        return c;
      }
      for (;;) {
        const int d = pick(rng, 1, 5);
        c.v.resize(d + 1);
        c.v[0] = rng.uniform(0.5, 3.0);
        for (int i = 1; i <= d; ++i) c.v[i] = rng.uniform(-1.2, 1.2) * c.v[0];
        c.lambda = log_uniform(rng, -3, -1);
        if (c.v[0] * c.v[0] >= 4.0 * c.lambda * d) return c;
      }
    };
    o.subgrad = [](const Case& c, const Vec& p) {
      double w = 0;
      for (Eigen::Index i = 1; i < p.size(); ++i) w = std::max(w, std::abs(p[i] - std::clamp(c.v[i], -p[0], p[0])));
      return w;
    };
    o.subgrad_note = "x part is the projection at the returned theta";
    ops.push_back(o);
  }
  {
    Op o;
    o.name = "tv2d";
    o.domain = "2x2 or 2x3 images, pixels~U(0,5), weight 1, lambda=10^U(-2,0)";
    o.smooth_domain = "pixels a permutation of 0,2,4,.. plus U(-0.2,0.2)";
    o.prox = [](const Case& c) {
      TvSolverConfig cfg;
      cfg.max_iterations = 20000;
      cfg.tolerance = 1e-14;
      return flat(prox_tv2d(as_mat(c.v, 0, c.rows, c.cols), 1.0, c.lambda, cfg).z);
    };
    o.g2 = [](const Vec& z, const Case& c) { return tv2d(as_mat(z, 0, c.rows, c.cols)); };
    o.grad = [](const Case& c) { return flat(tv2d_subgrad(as_mat(c.v, 0, c.rows, c.cols))); };
    o.sample = [](CounterRng& rng, Prop p) {
      Case c;
      if (p == Prop::Envelope) {
        c.rows = 1;
        c.cols = 2;
      } else {
        c.rows = 2;
        c.cols = pick(rng, 2, 3);
      }
      const int n = c.rows * c.cols;
      c.v.resize(n);
      if (p == Prop::Taylor) {
        std::vector<int> perm(n);
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(std::uint64_t(i + 1))]);
        for (int i = 0; i < n; ++i) c.v[i] = 2.0 * perm[i] + rng.uniform(-0.2, 0.2);
        c.lambda = 0.1;
      } else {
        for (auto& t : c.v) t = rng.uniform(0.0, 5.0);
        c.lambda = log_uniform(rng, -2, 0);
      }
      return c;
    };
    o.subgrad_note = "no closed-form subdifferential test";
    o.smooth_envelope = [](const Case& c) { return std::abs(std::abs(c.v[1] - c.v[0]) - 2 * c.lambda) > 0.02; };
    o.nonexpansive = true;
    ops.push_back(o);
  }
  {
    Op o;
    o.name = "svt";
    o.domain = "2x2 or 2x3 matrices, entries 2N(0,1), lambda=10^U(-2,0)";
    o.smooth_domain = "singular values > 0.5 with gaps > 0.2";
    o.prox = [](const Case& c) { return flat(svt(as_mat(c.v, 0, c.rows, c.cols), c.lambda).x); };
    o.g2 = [](const Vec& z, const Case& c) { return nuc(as_mat(z, 0, c.rows, c.cols)); };
    o.grad = [](const Case& c) { return flat(uv_t(as_mat(c.v, 0, c.rows, c.cols))); };
    o.sample = [](CounterRng& rng, Prop p) {
      Case c;
      if (p == Prop::Envelope) {
        c.rows = 1;
        c.cols = 2;
      } else {
        c.rows = 2;
        c.cols = pick(rng, 2, 3);
      }
      if (p == Prop::Taylor) {
        c.v = flat(well_separated(rng, c.rows, c.cols));
        c.lambda = 0.1;
      } else {
        c.v.resize(c.rows * c.cols);
        for (auto& t : c.v) t = 2.0 * rng.normal();
        c.lambda = log_uniform(rng, -2, 0);
      }
      return c;
    };
    o.subgrad = [](const Case& c, const Vec& p) {
      const Mat P = as_mat(p, 0, c.rows, c.cols);
      return nuclear_subgrad_violation(P, (as_mat(c.v, 0, c.rows, c.cols) - P) / c.lambda);
    };
    o.smooth_envelope = [](const Case& c) { return std::abs(c.v.norm() - c.lambda) > 0.02; };
    o.nonexpansive = true;
    ops.push_back(o);
  }
  {
    Op o;
    o.name = "nuclear";
    o.exact = false;
    o.domain = "theta1~U(-1,1), 2x2 or 1x3 matrices, entries 2N(0,1), lambda=10^U(-3,-1)";
    o.smooth_domain = "theta1~U(-1,0.5), singular values > 0.5 with gaps > 0.2";
    o.prox = [](const Case& c) {
      auto r = prox_nuclear(c.v[0], as_mat(c.v, 1, c.rows, c.cols), c.lambda);
      return cat(Vec::Constant(1, r.theta1), flat(r.x));
    };
    o.g2 = [](const Vec& z, const Case& c) { return std::exp(z[0]) * nuc(as_mat(z, 1, c.rows, c.cols)); };
    o.grad = [](const Case& c) {
      const Mat X = as_mat(c.v, 1, c.rows, c.cols);
      const double e = std::exp(c.v[0]);
      return cat(Vec::Constant(1, e * nuc(X)), flat(e * uv_t(X)));
    };
    o.sample = [](CounterRng& rng, Prop p) {
      Case c;
      if (rng.uniform() < 0.5) {
        c.rows = 2;
        c.cols = 2;
      } else {
        c.rows = 1;
        c.cols = 3;
      }
      if (p == Prop::Taylor) {
        c.v = cat(Vec::Constant(1, rng.uniform(-1.0, 0.5)), flat(well_separated(rng, c.rows, c.cols)));
        c.lambda = 0.1;
      } else {
        c.v.resize(1 + c.rows * c.cols);
        c.v[0] = rng.uniform(-1.0, 1.0);
        for (Eigen::Index i = 1; i < c.v.size(); ++i) c.v[i] = 2.0 * rng.normal();
        c.lambda = log_uniform(rng, -3, -1);
      }
      return c;
    };
    o.subgrad = [](const Case& c, const Vec& p) {
      const Mat P = as_mat(p, 1, c.rows, c.cols);
      const double tau = std::exp(p[0]) * c.lambda;
      return nuclear_subgrad_violation(P, (as_mat(c.v, 1, c.rows, c.cols) - P) / tau);
    };
    o.subgrad_note = "matrix part at the returned threshold";
    ops.push_back(o);
  }
  {
    Op o;
    o.name = "piecewise_linear";
    o.domain = "x_i~U(-2.5,2.5), d in 1..3, lambda=10^U(-2,log10 0.95)";
    o.smooth_domain = "||x_i|-1| >= 0.25";
    o.prox = [](const Case& c) { return prox_piecewise_linear(c.v, c.lambda); };
    o.g2 = [](const Vec& z, const Case&) { return z.array().max(-1.0).min(1.0).sum(); };
    o.grad = [](const Case& c) { return Vec(c.v.unaryExpr([](double t) { return std::abs(t) < 1 ? 1.0 : 0.0; })); };
    o.sample = [](CounterRng& rng, Prop p) {
      Case c;
      const int d = p == Prop::Envelope ? 1 : pick(rng, 1, 3);
      c.v.resize(d);
      for (auto& t : c.v) {
        if (p == Prop::Taylor) {
          t = rng.uniform() < 0.5 ? rng.uniform(-0.75, 0.75) : sym(rng, 1.25, 2.5);
        } else {
          t = rng.uniform(-2.5, 2.5);
        }
      }
      c.lambda = log_uniform(rng, -2, std::log10(0.95));
      return c;
    };
    // limiting subdifferential of clip(., -1, 1): [0,1] at -1, {0,1} at +1
    o.subgrad = [](const Case& c, const Vec& p) {
      double w = 0;
      for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double s = (c.v[i] - p[i]) / c.lambda;
        double v;
        if (p[i] == -1.0) v = std::max({0.0, -s, s - 1.0});
        else if (p[i] == 1.0) v = std::min(std::abs(s), std::abs(s - 1.0));
        else if (std::abs(p[i]) < 1.0) v = std::abs(s - 1.0);
        else v = std::abs(s);
        w = std::max(w, v);
      }
      return w;
    };
    o.subgrad_note = "limiting subdifferential";
    o.smooth_envelope = [](const Case& c) {
      const double x = c.v[0], l = c.lambda;
      return std::abs(x + 1) > 0.02 && std::abs(x + 1 - l) > 0.02 && std::abs(x - 1 - l / 2) > 0.02;
    };
    o.nonexpansive = true;
    ops.push_back(o);
  }
  return ops;
}

double objective(const Op& op, const Case& c, const Vec& z) {
  return op.g2(z, c) + (z - c.v).squaredNorm() / (2.0 * c.lambda);
}

OracleSpec oracle_spec(const Op& op, const Case& c, std::uint64_t seed) {
  OracleSpec s;
  s.seed = seed;
  s.grad_bound = 1.0 + 2.0 * op.grad(c).norm();
  if (op.name == "uniform") {
    Vec f = c.v;
    f[0] = std::max(c.v[0], c.v.tail(c.v.size() - 1).cwiseAbs().maxCoeff()) + 1e-3;
    s.extra_starts.push_back(f);
  }
  return s;
}

struct Tally {
  int cases = 0, failures = 0;
  double worst;
  std::string note;
};

ProxCheckRow row_from(const Op& op, const std::string& prop, const Tally& t, const std::string& tol,
                      const std::string& domain) {
  ProxCheckRow r;
  r.op = op.name;
  r.property = prop;
  r.cases = t.cases;
  r.failures = t.failures;
  r.worst = t.worst;
  r.tolerance = tol;
  r.domain = domain;
  r.note = t.note;
  r.status = t.failures ? "fail" : "pass";
  return r;
}

ProxCheckRow skipped(const Op& op, const std::string& prop, const std::string& why) {
  ProxCheckRow r;
  r.op = op.name;
  r.property = prop;
  r.status = "skip";
  r.worst = std::numeric_limits<double>::quiet_NaN();
  r.note = why;
  return r;
}

void note_first(Tally& t, const std::string& what) {
  if (t.note.empty()) t.note = what;
}

std::string describe(const Case& c) {
  std::ostringstream s;
  s.precision(6);
  s << "v=(";
  for (Eigen::Index i = 0; i < c.v.size(); ++i) s << (i ? " " : "") << c.v[i];
  s << ") lambda=" << c.lambda;
  return s.str();
}

ProxCheckRow check_optimality(const Op& op, const ProxCheckOptions& opt) {
  CounterRng rng(opt.seed, 101);
  Tally t{0, 0, -kInf, ""};
  for (int k = 0; k < opt.cases; ++k) {
    const Case c = op.sample(rng, Prop::Optimality);
    const double tol = op.exact ? 1e-5 : 0.05 * c.lambda;
    double gap;
    try {
      const Vec p = op.prox(c);
      const double ours = objective(op, c, p);
      const auto orc = oracle_prox([&](const Vec& z) { return op.g2(z, c); }, c.v, c.lambda,
                                   oracle_spec(op, c, opt.seed + std::uint64_t(k)));
      gap = ours - orc.objective;
      if (std::isnan(gap)) gap = kInf;
    } catch (const Error& e) {
      gap = kInf;
      note_first(t, e.what());
    }
    ++t.cases;
    t.worst = std::max(t.worst, gap);
    if (!(gap <= tol)) {
      ++t.failures;
      note_first(t, describe(c) + " gap=" + fmt17(gap));
    }
  }
  return row_from(op, "optimality", t, op.exact ? "1e-5" : "0.05*lambda", op.domain);
}

ProxCheckRow check_nonexpansive(const Op& op, const ProxCheckOptions& opt) {
  if (!op.nonexpansive) return skipped(op, "nonexpansive", "approximate operator");
  CounterRng rng(opt.seed, 102);
  Tally t{0, 0, 0.0, ""};
  const double abs_tol = op.name == "tv2d" ? 1e-9 : 1e-12;
  for (int k = 0; k < opt.cases; ++k) {
    const Case a = op.sample(rng, Prop::Nonexpansive);
    Case b = a;
    if (k % 2 == 0) {
      b = op.sample(rng, Prop::Nonexpansive);
      while (b.v.size() != a.v.size() || b.rows != a.rows) b = op.sample(rng, Prop::Nonexpansive);
      b.lambda = a.lambda;
    } else {
      const double s = log_uniform(rng, -3, 0);
      for (auto& z : b.v) z += s * rng.normal();
    }
    const Vec pa = op.prox(a), pb = op.prox(b);
    const double du = (a.v - b.v).norm(), dp = (pa - pb).norm();
    ++t.cases;
    if (du > 0) t.worst = std::max(t.worst, dp / du);
    if (dp > du * (1 + 1e-9) + abs_tol) {
      ++t.failures;
      note_first(t, describe(a) + " ratio=" + fmt17(dp / du));
    }
  }
  return row_from(op, "nonexpansive", t, "ratio<=1", op.domain);
}

// Frobenius norm of the finite-difference Hessian of g2 at c.v
double hessian_norm(const Op& op, const Case& c) {
  const double h = 1e-6;
  double f = 0;
  for (Eigen::Index j = 0; j < c.v.size(); ++j) {
    Case a = c, b = c;
    a.v[j] += h;
    b.v[j] -= h;
    f += ((op.grad(a) - op.grad(b)) / (2 * h)).squaredNorm();
  }
  return std::sqrt(f);
}

ProxCheckRow check_taylor(const Op& op, const ProxCheckOptions& opt) {
  CounterRng rng(opt.seed, 103);
  Tally t{0, 0, kInf, ""};
  const double lambdas[3] = {1e-1, 1e-2, 1e-3};
  for (int k = 0; k < opt.cases; ++k) {
    Case c = op.sample(rng, Prop::Taylor);
    while (lambdas[0] * hessian_norm(op, c) > 0.2) c = op.sample(rng, Prop::Taylor);
    const Vec g = op.grad(c);
    const double floor = 1e-11 * (1.0 + c.v.norm());
    std::vector<double> xs, ys;
    for (double l : lambdas) {
      c.lambda = l;
      const double r = (op.prox(c) - (c.v - l * g)).norm();
      if (r > floor) {
        xs.push_back(std::log(l));
        ys.push_back(std::log(r));
      }
    }
    double order = kInf;  // residual at rounding level
    if (xs.size() >= 2) {
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
      }
      mx /= double(xs.size());
      my /= double(xs.size());
      double sxy = 0, sxx = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
      }
      order = sxy / sxx;
    }
    ++t.cases;
    t.worst = std::min(t.worst, order);
    if (!(order >= 1.9)) {
      ++t.failures;
      note_first(t, describe(c) + " order=" + fmt17(order));
    }
  }
  return row_from(op, "taylor", t, "order>=1.9", op.smooth_domain + "; 0.1*||hess g2||_F<=0.2");
}

ProxCheckRow check_subgradient(const Op& op, const ProxCheckOptions& opt) {
  if (!op.subgrad) return skipped(op, "subgradient", op.subgrad_note);
  CounterRng rng(opt.seed, 104);
  Tally t{0, 0, 0.0, op.subgrad_note};
  for (int k = 0; k < opt.cases; ++k) {
    const Case c = op.sample(rng, Prop::Subgradient);
    const double v = op.subgrad(c, op.prox(c));
    ++t.cases;
    t.worst = std::max(t.worst, v);
    if (!(v <= 1e-8)) {
      ++t.failures;
      if (t.failures == 1) t.note += "; " + describe(c) + " violation=" + fmt17(v);
    }
  }
  return row_from(op, "subgradient", t, "1e-8", op.domain);
}

ProxCheckRow check_envelope(const Op& op, const ProxCheckOptions& opt) {
  if (!op.exact) return skipped(op, "envelope_grad", "approximate operator");
  if (!op.smooth_envelope) return skipped(op, "envelope_grad", "no low-dimensional case");
  CounterRng rng(opt.seed, 105);
  Tally t{0, 0, 0.0, ""};
  for (int k = 0; k < opt.cases; ++k) {
    Case c = op.sample(rng, Prop::Envelope);
    while (!op.smooth_envelope(c)) c = op.sample(rng, Prop::Envelope);
    JointProx jp = [&](const CRef& th, const CRef& x, double l) {
      Case q = c;
      q.v = cat(th, x);
      q.lambda = l;
      const Vec p = op.prox(q);
      ProxResult r;
      r.theta = p.head(op.theta_dim);
      r.x = p.tail(p.size() - op.theta_dim);
      return r;
    };
    const Vec mg = moreau_grad(jp, c.v.head(op.theta_dim), c.v.tail(c.v.size() - op.theta_dim), c.lambda);
    auto env = [&](const Vec& v) {
      OracleSpec s;
      s.seed = opt.seed;
      s.grad_bound = 3.0;
      return oracle_prox([&](const Vec& z) { return op.g2(z, c); }, v, c.lambda, s).objective;
    };
    const Vec fd = finite_diff_grad(env, c.v);
    const double rel = (mg - fd).norm() / std::max(fd.norm(), 1e-3);
    ++t.cases;
    t.worst = std::max(t.worst, rel);
    if (!(rel <= 1e-4)) {
      ++t.failures;
      note_first(t, describe(c) + " rel=" + fmt17(rel));
    }
  }
  return row_from(op, "envelope_grad", t, "1e-4 relative", op.domain + "; envelope cases are 1-d/2-d");
}

}  // namespace

const std::vector<std::string>& prox_check_operators() {
  static const std::vector<std::string> v = {"soft_threshold", "l1_shift_approx", "l1_shift_iterative",
                                             "laplace_scale",  "uniform",         "tv2d",
                                             "svt",            "nuclear",         "piecewise_linear"};
  return v;
}

const std::vector<std::string>& prox_check_properties() {
  static const std::vector<std::string> v = {"optimality", "nonexpansive", "taylor", "subgradient", "envelope_grad"};
  return v;
}

std::vector<ProxCheckRow> run_prox_check(const ProxCheckOptions& opt) {
  if (opt.cases < 1) throw config_error("prox_check.cases must be >= 1");
  if (!opt.fault.empty() && opt.fault != "soft_threshold_sign")
    throw config_error("unknown value for 'prox_check.fault': '" + opt.fault + "'");
  for (const auto& o : opt.operators)
    if (std::find(prox_check_operators().begin(), prox_check_operators().end(), o) == prox_check_operators().end())
      throw config_error("unknown operator in 'prox_check.operators': '" + o + "'");
  for (const auto& p : opt.properties)
    if (std::find(prox_check_properties().begin(), prox_check_properties().end(), p) == prox_check_properties().end())
      throw config_error("unknown prox-check property '" + p + "'");
  auto wanted = [](const std::vector<std::string>& sel, const std::string& s) {
    return sel.empty() || std::find(sel.begin(), sel.end(), s) != sel.end();
  };
  std::vector<ProxCheckRow> rows;
  for (const Op& op : build_ops(opt.fault)) {
    if (!wanted(opt.operators, op.name)) continue;
    if (wanted(opt.properties, "optimality")) rows.push_back(check_optimality(op, opt));
    if (wanted(opt.properties, "nonexpansive")) rows.push_back(check_nonexpansive(op, opt));
    if (wanted(opt.properties, "taylor")) rows.push_back(check_taylor(op, opt));
    if (wanted(opt.properties, "subgradient")) rows.push_back(check_subgradient(op, opt));
    if (wanted(opt.properties, "envelope_grad")) rows.push_back(check_envelope(op, opt));
  }
  return rows;
}


std::string prox_report_csv(const std::vector<ProxCheckRow>& rows) {
  std::string out = "operator,property,status,cases,failures,worst,tolerance,domain,note\n";
  for (const auto& r : rows) {
    out += r.op + "," + r.property + "," + r.status + "," + std::to_string(r.cases) + "," + std::to_string(r.failures) +
           "," + (r.status == "skip" ? std::string() : fmt17(r.worst)) + "," + csv_escape(r.tolerance) + "," +
           csv_escape(r.domain) + "," + csv_escape(r.note) + "\n";
  }
  return out;
}

}  // namespace pipla
