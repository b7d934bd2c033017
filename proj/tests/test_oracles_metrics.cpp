#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "pipla/metrics.hpp"
#include "pipla/models.hpp"
#include "pipla/oracles.hpp"
#include "pipla/rng.hpp"

using namespace pipla;
using testing::vec;

TEST_CASE("oracle prox") {
  const ScalarFn abs1 = [](const Vec& z) { return std::abs(z[0]); };
  CHECK(oracle_prox(abs1, vec({2.0}), 0.5).point[0] == doctest::Approx(1.5).epsilon(1e-7));

  const ScalarFn zero = [](const Vec&) { return 0.0; };
  const OracleResult z = oracle_prox(zero, vec({0.3, -1.2}), 0.7);
  CHECK((z.point - vec({0.3, -1.2})).norm() < 1e-7);

  const ScalarFn box = [](const Vec& z) {
    return std::abs(z[0]) <= 1.0 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  CHECK(oracle_prox(box, vec({3.0}), 1.0).point[0] == doctest::Approx(1.0).epsilon(1e-7));

  CHECK_THROWS_AS(oracle_prox(zero, Vec::Zero(7), 1.0), Error);
}

TEST_CASE("oracle objective never exceeds the identity candidate") {
  CounterRng rng(3, 3);
  const ScalarFn g = [](const Vec& z) { return std::abs(z[0] - z[1]) + 0.5 * std::abs(z[1]); };
  for (int k = 0; k < 20; ++k) {
    const Vec v = vec({3 * rng.normal(), 3 * rng.normal()});
    const double lambda = rng.uniform(0.01, 1.0);
    CHECK(oracle_prox(g, v, lambda).objective <= g(v) + 1e-15);
  }
}

TEST_CASE("finite differences") {
  const ScalarFn sq = [](const Vec& v) { return v[0] * v[0]; };
  CHECK(std::abs(finite_diff_grad(sq, vec({1.0}))[0] - 2.0) < 1e-6);
  const ScalarFn abs1 = [](const Vec& v) { return std::abs(v[0]); };
  CHECK(finite_diff_grad(abs1, vec({0.0}))[0] == 0.0);
}

TEST_CASE("golden section") {
  CHECK(golden_min([](double t) { return (t - 0.3) * (t - 0.3); }, -2, 2) == doctest::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("nmse") {
  CHECK(nmse(vec({-4.0}), vec({-4.0})) == 0.0);
  CHECK(nmse(vec({-3.6}), vec({-4.0})) == doctest::Approx(1.0));
  CHECK(nmse(vec({1.0, 1.0}), vec({2.0, 0.0})) == doctest::Approx(50.0));
  CHECK(nmse(vec({-7.2}), vec({-8.0})) == doctest::Approx(nmse(vec({-3.6}), vec({-4.0}))));
  CHECK_THROWS_AS(nmse(vec({1.0}), vec({0.0})), Error);
}

TEST_CASE("variance slope") {
  CHECK(variance_slope({{1, 1}, {2, 0.5}, {4, 0.25}}) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(variance_slope({{1, 1}, {2, 1}, {4, 1}}) == doctest::Approx(0.0));
  CHECK_THROWS_AS(variance_slope({{1, 1}, {2, 0.0}, {4, 1}}), Error);
  CHECK_THROWS_AS(variance_slope({{1, 1}, {2, 1}}), Error);
}

TEST_CASE("summarize") {
  const MetricReport r = summarize("x", {1.0, 3.0});
  CHECK(r.value == 2.0);
  CHECK(r.dispersion == 1.0);
  CHECK(r.per_seed.size() == 2);
}

TEST_CASE("image scores") {
  Mat a(9, 10);
  CounterRng rng(8, 8);
  for (Eigen::Index k = 0; k < a.size(); ++k) a.data()[k] = 255 * rng.uniform();
  const ImageScores same = image_scores(a, a);
  CHECK(same.mse == 0.0);
  CHECK(same.ssim == doctest::Approx(1.0));

  const Mat bright = (a.array() + 255.0).min(255.0).matrix();
  CHECK(ssim(bright, a) < 1.0);

  Mat b(9, 10);
  for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = 255 * rng.uniform();
  const double s = ssim(a, b);
  CHECK(s == doctest::Approx(ssim(b, a)).epsilon(1e-14));
  CHECK(s >= -1.0);
  CHECK(s <= 1.0);

  // whole-image window on a 2x2 pair, evaluated by hand:
  // means 25, 27.5; variances 125, 218.75; covariance 162.5
  Mat p(2, 2), q(2, 2);
  p << 10, 30, 20, 40;
  q << 10, 30, 20, 50;
  const double c1 = 6.5025, c2 = 58.5225;
  const double hand = ((2 * 25 * 27.5 + c1) * (2 * 162.5 + c2)) / ((25 * 25 + 27.5 * 27.5 + c1) * (125 + 218.75 + c2));
  CHECK(ssim(p, q) == doctest::Approx(hand).epsilon(1e-14));

  CHECK_THROWS_AS(image_scores(a, Mat::Zero(3, 3)), Error);
}

TEST_CASE("classification scores") {
  Mat perfect(3, 2);
  perfect << 1, 0, 0, 1, 1, 0;
  const ClassScores s = classification_scores(perfect, {0, 1, 0});
  CHECK(s.error_percent == 0.0);
  CHECK(s.lppd == 0.0);

  const ClassScores u = classification_scores(Mat::Constant(4, 2, 0.5), {0, 1, 1, 0});
  CHECK(u.lppd == doctest::Approx(std::log(0.5)));

  // two particles giving 1 and e^-2 to the true label, averaged
  Mat avg(2, 2);
  const double p = (1 + std::exp(-2.0)) / 2;
  avg << p, 1 - p, 1 - p, p;
  CHECK(classification_scores(avg, {0, 1}).lppd == doctest::Approx(std::log((1 + std::exp(-2.0)) / 2)));

  Mat degenerate(1, 2);
  degenerate << 1, 0;
  CHECK(std::isfinite(classification_scores(degenerate, {1}).lppd));
  CHECK(classification_scores(degenerate, {1}).error_percent == 100.0);
}

TEST_CASE("classification scores average the cloud's predictions") {
  BnnSpec spec = make_blob_spec(20, 30, 3, 1);
  spec.hidden = 4;
  const auto model = make_bnn(spec);
  RowMat cloud = RowMat::Zero(2, model->d_x());
  const ClassScores s = classification_scores(cloud, *model, spec.test);
  CHECK(s.lppd == doctest::Approx(std::log(0.5)));
}
