#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "histoband/scenario.hpp"

namespace histoband {

/// Optional pass/fail thresholds carried in a run-config file; the CLI
/// exits 1 when an asserted threshold fails. Each experiment kind accepts
/// only the thresholds that apply to it.
struct Assertions {
  std::optional<double> min_coverage;
  std::optional<double> slope_min;
  std::optional<double> slope_max;
  std::optional<double> max_ks;
  std::optional<bool> require_decreasing_tail;
  std::optional<double> max_identity_error;
  std::optional<bool> require_bounded_trend;

  bool any() const {
    return min_coverage || slope_min || slope_max || max_ks ||
           require_decreasing_tail || max_identity_error || require_bounded_trend;
  }
};

/// Enumeration grid for the binomial verification sweep.
struct BinomialGridConfig {
  std::vector<std::int64_t> ns;
  std::vector<double> ps;
  std::vector<int> qs;
};

/// Contents of a run-config file: a scenario plus, for the multi-n
/// experiments (rate, phat), the list of sample sizes, plus optional
/// assertions and an optional binomial sweep grid.
struct RunConfig {
  ScenarioConfig scenario;
  std::vector<std::size_t> n_values;
  Assertions assertions;
  std::optional<BinomialGridConfig> binomial;
};

/// Scenario as a JSON value (no schema marker); embedded inside reports.
nlohmann::json scenario_to_json_value(const ScenarioConfig& config);

/// Strict inverse of scenario_to_json_value: unknown keys are an error.
ScenarioConfig scenario_from_json_value(const nlohmann::json& value);

/// Parse a config file. Requires "schema": 1 at top level; every other key
/// must be a known scenario field (or "n_values"). Parse or schema errors
/// throw std::runtime_error with a message naming the offending key.
RunConfig parse_run_config(const std::string& text);

std::string serialize_run_config(const RunConfig& config);

}  // namespace histoband
