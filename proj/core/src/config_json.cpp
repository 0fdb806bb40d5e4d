#include "histoband/config_json.hpp"

#include <initializer_list>
#include <stdexcept>
#include <string>

namespace histoband {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& message) {
  throw std::runtime_error("config: " + message);
}

void expect_object(const json& value, const std::string& path) {
  if (!value.is_object()) config_error(path + " must be an object");
}

void expect_keys(const json& obj, const std::string& path,
                 std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      config_error("unknown field \"" + (path.empty() ? item.key() : path + "." + item.key()) + "\"");
    }
  }
}

template <typename T>
T get_or(const json& obj, const std::string& path, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    config_error("field \"" + path + key + "\" has the wrong type");
  }
}

std::string require_string(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) config_error("missing field \"" + path + key + "\"");
  if (!it->is_string()) config_error("field \"" + path + key + "\" must be a string");
  return it->get<std::string>();
}

}  // namespace

nlohmann::json scenario_to_json_value(const ScenarioConfig& config) {
  json regression{{"id", to_string(config.regression.id)}};
  switch (config.regression.id) {
    case RegressionId::kPiecewiseConstant:
      regression["amplitude"] = config.regression.amplitude;
      regression["ref_inv_mesh"] = config.regression.ref_inv_mesh;
      break;
    case RegressionId::kAffine:
      regression["a"] = config.regression.a;
      regression["b"] = config.regression.b;
      break;
    case RegressionId::kHolderBump:
      regression["alpha"] = config.regression.alpha;
      regression["c_h"] = config.regression.c_h;
      break;
  }

  json noise{{"id", to_string(config.noise.id)}, {"sigma", config.noise.sigma}};
  if (config.noise.id == NoiseId::kScaledT) noise["df"] = config.noise.df;

  json covariate{{"id", to_string(config.covariate.id)}};
  if (config.covariate.id == CovariateId::kBetaMixture) {
    covariate["weight"] = config.covariate.weight;
  }

  return json{{"beta", config.beta},
              {"covariate", covariate},
              {"dim", config.dim},
              {"inv_mesh", config.inv_mesh},
              {"n", config.n},
              {"noise", noise},
              {"regression", regression},
              {"replications", config.replications},
              {"seed", config.seed},
              {"tau_mode", to_string(config.tau_mode)},
              {"use_mesh_rule", config.use_mesh_rule}};
}

ScenarioConfig scenario_from_json_value(const nlohmann::json& value) {
  expect_object(value, "scenario");
  expect_keys(value, "",
              {"beta", "covariate", "dim", "inv_mesh", "n", "noise", "regression",
               "replications", "seed", "tau_mode", "use_mesh_rule"});

  ScenarioConfig config;
  config.dim = get_or(value, "", "dim", config.dim);
  config.inv_mesh = get_or(value, "", "inv_mesh", config.inv_mesh);
  config.use_mesh_rule = get_or(value, "", "use_mesh_rule", config.use_mesh_rule);
  config.n = get_or(value, "", "n", config.n);
  config.beta = get_or(value, "", "beta", config.beta);
  config.replications = get_or(value, "", "replications", config.replications);
  config.seed = get_or(value, "", "seed", config.seed);
  if (value.contains("tau_mode")) {
    config.tau_mode = tau_mode_from_string(require_string(value, "", "tau_mode"));
  }

  if (value.contains("regression")) {
    const json& reg = value.at("regression");
    expect_object(reg, "regression");
    config.regression.id =
        regression_id_from_string(require_string(reg, "regression.", "id"));
    switch (config.regression.id) {
      case RegressionId::kPiecewiseConstant:
        expect_keys(reg, "regression", {"id", "amplitude", "ref_inv_mesh"});
        config.regression.amplitude =
            get_or(reg, "regression.", "amplitude", config.regression.amplitude);
        config.regression.ref_inv_mesh =
            get_or(reg, "regression.", "ref_inv_mesh", config.regression.ref_inv_mesh);
        break;
      case RegressionId::kAffine:
        expect_keys(reg, "regression", {"id", "a", "b"});
        config.regression.a = get_or(reg, "regression.", "a", config.regression.a);
        config.regression.b = get_or(reg, "regression.", "b", config.regression.b);
        break;
      case RegressionId::kHolderBump:
        expect_keys(reg, "regression", {"id", "alpha", "c_h"});
        config.regression.alpha =
            get_or(reg, "regression.", "alpha", config.regression.alpha);
        config.regression.c_h = get_or(reg, "regression.", "c_h", config.regression.c_h);
        break;
    }
  }

  if (value.contains("noise")) {
    const json& noise = value.at("noise");
    expect_object(noise, "noise");
    config.noise.id = noise_id_from_string(require_string(noise, "noise.", "id"));
    if (config.noise.id == NoiseId::kScaledT) {
      expect_keys(noise, "noise", {"id", "sigma", "df"});
      config.noise.df = get_or(noise, "noise.", "df", config.noise.df);
    } else {
      expect_keys(noise, "noise", {"id", "sigma"});
    }
    config.noise.sigma = get_or(noise, "noise.", "sigma", config.noise.sigma);
  }

  if (value.contains("covariate")) {
    const json& cov = value.at("covariate");
    expect_object(cov, "covariate");
    config.covariate.id =
        covariate_id_from_string(require_string(cov, "covariate.", "id"));
    if (config.covariate.id == CovariateId::kBetaMixture) {
      expect_keys(cov, "covariate", {"id", "weight"});
      config.covariate.weight =
          get_or(cov, "covariate.", "weight", config.covariate.weight);
    } else {
      expect_keys(cov, "covariate", {"id"});
    }
  }

  config.validate();
  return config;
}

namespace {

Assertions parse_assertions(const json& obj) {
  expect_object(obj, "assert");
  expect_keys(obj, "assert",
              {"min_coverage", "slope_min", "slope_max", "max_ks",
               "require_decreasing_tail", "max_identity_error",
               "require_bounded_trend"});
  Assertions a;
  if (obj.contains("min_coverage")) {
    a.min_coverage = get_or(obj, "assert.", "min_coverage", 0.0);
  }
  if (obj.contains("slope_min")) a.slope_min = get_or(obj, "assert.", "slope_min", 0.0);
  if (obj.contains("slope_max")) a.slope_max = get_or(obj, "assert.", "slope_max", 0.0);
  if (obj.contains("max_ks")) a.max_ks = get_or(obj, "assert.", "max_ks", 0.0);
  if (obj.contains("require_decreasing_tail")) {
    a.require_decreasing_tail = get_or(obj, "assert.", "require_decreasing_tail", false);
  }
  if (obj.contains("max_identity_error")) {
    a.max_identity_error = get_or(obj, "assert.", "max_identity_error", 0.0);
  }
  if (obj.contains("require_bounded_trend")) {
    a.require_bounded_trend = get_or(obj, "assert.", "require_bounded_trend", false);
  }
  return a;
}

BinomialGridConfig parse_binomial_grid(const json& obj) {
  expect_object(obj, "binomial");
  expect_keys(obj, "binomial", {"ns", "ps", "qs"});
  BinomialGridConfig grid;
  for (const char* key : {"ns", "ps", "qs"}) {
    if (!obj.contains(key) || !obj.at(key).is_array() || obj.at(key).empty()) {
      config_error(std::string("\"binomial.") + key + "\" must be a nonempty array");
    }
  }
  try {
    grid.ns = obj.at("ns").get<std::vector<std::int64_t>>();
    grid.ps = obj.at("ps").get<std::vector<double>>();
    grid.qs = obj.at("qs").get<std::vector<int>>();
  } catch (const json::exception&) {
    config_error("\"binomial\" arrays have the wrong element type");
  }
  return grid;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    config_error(std::string("not valid JSON: ") + e.what());
  }
  expect_object(doc, "document");

  const auto schema_it = doc.find("schema");
  if (schema_it == doc.end()) config_error("missing field \"schema\"");
  if (!schema_it->is_number_integer() || schema_it->get<int>() != 1) {
    config_error("unsupported schema version (expected 1)");
  }

  RunConfig run;
  if (doc.contains("n_values")) {
    const json& values = doc.at("n_values");
    if (!values.is_array() || values.empty()) {
      config_error("\"n_values\" must be a nonempty array");
    }
    for (const auto& v : values) {
      if (!v.is_number_unsigned() && !v.is_number_integer()) {
        config_error("\"n_values\" entries must be positive integers");
      }
      const auto n = v.get<std::int64_t>();
      if (n < 1) config_error("\"n_values\" entries must be positive integers");
      run.n_values.push_back(static_cast<std::size_t>(n));
    }
  }
  if (doc.contains("assert")) run.assertions = parse_assertions(doc.at("assert"));
  if (doc.contains("binomial")) run.binomial = parse_binomial_grid(doc.at("binomial"));

  json scenario = doc;
  scenario.erase("schema");
  scenario.erase("n_values");
  scenario.erase("assert");
  scenario.erase("binomial");
  run.scenario = scenario_from_json_value(scenario);
  return run;
}

std::string serialize_run_config(const RunConfig& config) {
  json doc = scenario_to_json_value(config.scenario);
  doc["schema"] = 1;
  if (!config.n_values.empty()) doc["n_values"] = config.n_values;

  json assertions = json::object();
  const Assertions& a = config.assertions;
  if (a.min_coverage) assertions["min_coverage"] = *a.min_coverage;
  if (a.slope_min) assertions["slope_min"] = *a.slope_min;
  if (a.slope_max) assertions["slope_max"] = *a.slope_max;
  if (a.max_ks) assertions["max_ks"] = *a.max_ks;
  if (a.require_decreasing_tail) {
    assertions["require_decreasing_tail"] = *a.require_decreasing_tail;
  }
  if (a.max_identity_error) assertions["max_identity_error"] = *a.max_identity_error;
  if (a.require_bounded_trend) {
    assertions["require_bounded_trend"] = *a.require_bounded_trend;
  }
  if (!assertions.empty()) doc["assert"] = assertions;

  if (config.binomial) {
    doc["binomial"] = json{{"ns", config.binomial->ns},
                           {"ps", config.binomial->ps},
                           {"qs", config.binomial->qs}};
  }
  return doc.dump(2);
}

}  // namespace histoband
