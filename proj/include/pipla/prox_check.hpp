#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pipla {

struct ProxCheckOptions {
  int cases = 100;
  std::uint64_t seed = 1;
  std::vector<std::string> operators;  // empty: all
  std::string fault;                   // "soft_threshold_sign" flips the shrink direction
  std::vector<std::string> properties; // empty: all
};

// worst: largest objective gap (optimality), largest Lipschitz ratio (nonexpansive),
// smallest fitted order (taylor), largest violation (subgradient), largest relative error (envelope_grad)
struct ProxCheckRow {
  std::string op;
  std::string property;
  std::string status;  // pass fail skip
  int cases = 0;
  int failures = 0;
  double worst = 0.0;
  std::string tolerance;
  std::string domain;
  std::string note;
};

const std::vector<std::string>& prox_check_operators();
const std::vector<std::string>& prox_check_properties();

std::vector<ProxCheckRow> run_prox_check(const ProxCheckOptions& opt);

// header + rows, numbers at 17 significant digits
std::string prox_report_csv(const std::vector<ProxCheckRow>& rows);

}  // namespace pipla
