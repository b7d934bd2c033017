#include <doctest.h>

#include <set>

#include "pipla/core.hpp"
#include "pipla/prox_check.hpp"

using namespace pipla;

TEST_CASE("report shape") {
  ProxCheckOptions o;
  o.cases = 5;
  o.operators = {"soft_threshold", "svt", "uniform"};
  const auto rows = run_prox_check(o);
  CHECK(rows.size() == 3 * prox_check_properties().size());
  const std::string csv = prox_report_csv(rows);
  CHECK(csv.rfind("operator,property,status,cases,failures,worst,tolerance,domain,note\n", 0) == 0);
  for (const auto& r : rows) CHECK((r.status == "pass" || r.status == "fail" || r.status == "skip"));
}

TEST_CASE("full catalogue covers at least 7 operators and 3 properties") {
  CHECK(prox_check_operators().size() >= 7);
  CHECK(prox_check_properties().size() >= 3);
  ProxCheckOptions o;
  o.cases = 3;
  o.properties = {"nonexpansive", "taylor", "subgradient"};
  const auto rows = run_prox_check(o);
  std::set<std::string> ops, props;
  for (const auto& r : rows) {
    ops.insert(r.op);
    props.insert(r.property);
  }
  CHECK(ops.size() >= 7);
  CHECK(props.size() == 3);
}

TEST_CASE("soft threshold passes, and the sign fault breaks the taylor row") {
  ProxCheckOptions o;
  o.cases = 30;
  o.operators = {"soft_threshold"};
  for (const auto& r : run_prox_check(o)) {
    INFO(r.property << " " << r.note);
    CHECK(r.status != "fail");
  }
  o.fault = "soft_threshold_sign";
  bool taylor_failed = false;
  for (const auto& r : run_prox_check(o))
    if (r.property == "taylor") taylor_failed = r.status == "fail";
  CHECK(taylor_failed);
}

TEST_CASE("reproducible for a fixed seed") {
  ProxCheckOptions o;
  o.cases = 8;
  o.operators = {"laplace_scale", "tv2d"};
  CHECK(prox_report_csv(run_prox_check(o)) == prox_report_csv(run_prox_check(o)));
}

TEST_CASE("unknown selections are config errors") {
  ProxCheckOptions o;
  o.operators = {"sharpen"};
  CHECK_THROWS_AS(run_prox_check(o), Error);
  ProxCheckOptions f;
  f.fault = "everything";
  CHECK_THROWS_AS(run_prox_check(f), Error);
}
