#pragma once

#include <functional>
#include <string>
#include <vector>

#include "pipla/core.hpp"

namespace pipla {

using ScalarFn = std::function<double(const Vec&)>;

struct OracleSpec {
  std::uint64_t seed = 7;
  int starts = 4;            // random starts inside the search box, besides v and extra_starts
  double radius = 0.0;       // 0: 3 (||v|| + lambda * grad_bound) as documented
  double grad_bound = 1.0;   // estimate of ||dg2|| used for the default radius
  double min_step = 1e-11;
  std::vector<Vec> extra_starts;
};

struct OracleResult {
  Vec point;
  double objective;
};

// numeric argmin of g2(z) + ||z - v||^2 / (2 lambda), dimension <= 6
OracleResult oracle_prox(const ScalarFn& g2, const Vec& v, double lambda, const OracleSpec& spec = {});

// golden-section minimum of a unimodal f on [a, b]
double golden_min(const std::function<double(double)>& f, double a, double b, double tol = 1e-13);

Vec finite_diff_grad(const ScalarFn& f, const Vec& v, double h = 1e-5);

}  // namespace pipla
