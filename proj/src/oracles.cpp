#include "pipla/oracles.hpp"

#include <cmath>
#include <limits>

#include "pipla/rng.hpp"

namespace pipla {

double golden_min(const std::function<double(double)>& f, double a, double b, double tol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol * std::max(1.0, std::abs(a) + std::abs(b))) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

namespace {

// grid scan then golden refinement around the best cell; robust to a few local minima
double min_1d(const std::function<double(double)>& f, double lo, double hi, int grid, double& best_x) {
  double bx = lo, bf = std::numeric_limits<double>::infinity();
  const double h = (hi - lo) / grid;
  for (int k = 0; k <= grid; ++k) {
    const double x = lo + k * h;
    const double v = f(x);
    if (v < bf) {
      bf = v;
      bx = x;
    }
  }
  const double x = golden_min(f, bx - h, bx + h, 1e-14);
  const double fx = f(x);
  if (fx < bf) {
    bf = fx;
    bx = x;
  }
  best_x = bx;
  return bf;
}

double pattern_search(const ScalarFn& F, Vec& x, double step, double min_step, CounterRng& rng) {
  const Eigen::Index d = x.size();
  std::vector<Vec> fixed;
  for (Eigen::Index i = 0; i < d; ++i) {
    Vec e = Vec::Zero(d);
    e[i] = 1.0;
    fixed.push_back(e);
    fixed.push_back(-e);
    for (Eigen::Index j = i + 1; j < d; ++j) {
      for (double s : {1.0, -1.0}) {
        Vec u = Vec::Zero(d);
        u[i] = 1.0 / std::sqrt(2.0);
        u[j] = s / std::sqrt(2.0);
        fixed.push_back(u);
        fixed.push_back(-u);
      }
    }
  }
  fixed.push_back(Vec::Constant(d, 1.0 / std::sqrt(double(d))));
  fixed.push_back(Vec::Constant(d, -1.0 / std::sqrt(double(d))));
  double fx = F(x);
  std::vector<Vec> dirs;
  while (step > min_step) {
    dirs = fixed;
    for (Eigen::Index k = 0; k < 4 * d; ++k) {
      Vec u(d);
      for (auto& c : u) c = rng.normal();
      dirs.push_back(u / u.norm());
    }
    bool improved = true;
    while (improved) {
      improved = false;
      for (const Vec& u : dirs) {
        double s = step;
        for (;;) {
          const Vec y = x + s * u;
          const double fy = F(y);
          if (!(fy < fx)) break;
          x = y;
          fx = fy;
          improved = true;
          s *= 2.0;
        }
      }
    }
    step *= 0.5;
  }
  return fx;
}

}  // namespace

namespace {
OracleResult oracle_impl(const ScalarFn& g2, const Vec& v, double lambda, const OracleSpec& spec);
}

OracleResult oracle_prox(const ScalarFn& g2, const Vec& v, double lambda, const OracleSpec& spec) {
  if (v.size() > 6) throw unsupported("oracle_prox: dimension " + std::to_string(v.size()) + " exceeds 6");
  if (!(lambda > 0)) throw domain_error("oracle_prox: lambda must be positive");
  OracleResult r = oracle_impl(g2, v, lambda, spec);
  const double fv = g2(v);  // identity candidate
  if (fv <= r.objective) r = {v, fv};
  return r;
}

namespace {
OracleResult oracle_impl(const ScalarFn& g2, const Vec& v, double lambda, const OracleSpec& spec) {
  const Eigen::Index d = v.size();
  auto F = [&](const Vec& z) { return g2(z) + (z - v).squaredNorm() / (2.0 * lambda); };
  if (d == 0) return {v, F(v)};
  const double R = spec.radius > 0 ? spec.radius : 3.0 * (v.norm() + lambda * spec.grad_bound) + 1e-3;

  if (d == 1) {
    double x;
    auto f = [&](double t) { return F(Vec::Constant(1, t)); };
    double fx = min_1d(f, v[0] - R, v[0] + R, 20000, x);
    for (const Vec& s : spec.extra_starts) {
      const double fs = f(s[0]);
      if (fs < fx) {
        fx = fs;
        x = s[0];
      }
    }
    return {Vec::Constant(1, x), fx};
  }

  if (d == 2) {
    auto inner = [&](double a, double& bx) {
      auto f = [&](double b) {
        Vec z(2);
        z << a, b;
        return F(z);
      };
      return min_1d(f, v[1] - R, v[1] + R, 400, bx);
    };
    double ax;
    auto outer = [&](double a) {
      double bx;
      return inner(a, bx);
    };
    min_1d(outer, v[0] - R, v[0] + R, 400, ax);
    double bx;
    inner(ax, bx);
    Vec z(2);
    z << ax, bx;
    // a pattern-search polish guards against kinks between grid lines
    CounterRng rng(spec.seed, 2);
    double fz = pattern_search(F, z, 1e-3 * R, spec.min_step, rng);
    for (const Vec& s : spec.extra_starts) {
      Vec w = s;
      const double fw = pattern_search(F, w, 1e-2 * R, spec.min_step, rng);
      if (fw < fz) {
        fz = fw;
        z = w;
      }
    }
    return {z, fz};
  }

  CounterRng rng(spec.seed, d);
  std::vector<Vec> starts{v};
  for (const Vec& s : spec.extra_starts) starts.push_back(s);
  for (int k = 0; k < spec.starts; ++k) {
    Vec s(d);
    for (auto& c : s) c = rng.uniform(-1.0, 1.0);
    starts.push_back(v + 0.5 * R * s / std::sqrt(double(d)));
  }
  OracleResult best{v, std::numeric_limits<double>::infinity()};
  for (Vec x : starts) {
    const double fx = pattern_search(F, x, 0.25 * R, spec.min_step, rng);
    if (fx < best.objective) best = {x, fx};
  }
  // restart from the best point at a finer scale
  Vec x = best.point;
  const double fx = pattern_search(F, x, 1e-3 * R, spec.min_step, rng);
  if (fx < best.objective) best = {x, fx};
  return best;
}
}  // namespace

Vec finite_diff_grad(const ScalarFn& f, const Vec& v, double h) {
  Vec g(v.size());
  Vec a = v, b = v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    a[i] = v[i] + h;
    b[i] = v[i] - h;
    g[i] = (f(a) - f(b)) / (2.0 * h);
    a[i] = b[i] = v[i];
  }
  return g;
}

}  // namespace pipla
