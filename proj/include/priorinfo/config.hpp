#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "priorinfo/closedform.hpp"
#include "priorinfo/discretescan.hpp"
#include "priorinfo/weakinfo.hpp"

namespace priorinfo {

/// Invalid or missing configuration entry; the message names the key.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct SliceSpec {
  bool vary_intercept = false;  // which scale moves along the axis
  double fixed = 1.0;
  Axis axis;
};

struct ScanSpec {
  std::string kind;  // betabinom, logistic, reduction, multinomial
  Axis x;
  Axis y;
  AltFamily family = AltFamily::NormalNormal;
  double t_dof = 1.0;
  std::array<long, 2> u1{0, 0};
  std::array<long, 2> u2{0, 0};
  std::vector<double> contour_levels;
  std::vector<SliceSpec> slices;
};

struct CalibrateSpec {
  std::string family = "normal";  // normal or t
  double lambda = 3.0;
  double p = 0.5;
  double base_variance = 1.0;
  long n = 0;  // 0 selects the large-sample limit
};

struct RegressSpec {
  RegressionPrior base;
  RegressionPrior alt;
};

struct RunConfig {
  std::optional<SamplingModel> model;
  std::optional<PriorSpec> base;
  std::optional<PriorSpec> alt;
  std::optional<SufficientStat> observed;
  std::optional<std::array<long, 2>> condition_u1;
  std::optional<std::array<long, 2>> condition_u2;
  double gamma = 0.05;
  std::uint64_t seed = 20100101;
  Method method = Method::Auto;
  std::size_t mc_samples = 100000;
  LogisticRule rule;
  std::optional<ScanSpec> scan;
  std::optional<CalibrateSpec> calibrate;
  std::optional<RegressSpec> regress;
  nlohmann::json source;  // the document the fields were read from
};

SamplingModel parse_model(const nlohmann::json& j, const std::string& key = "model");
PriorSpec parse_prior(const nlohmann::json& j, const std::string& key);
SufficientStat parse_statistic(const nlohmann::json& j, const SamplingModel& model,
                               const std::string& key = "observed");
Axis parse_axis(const nlohmann::json& j, const std::string& key);

/// Reads and validates every section present in the document.
RunConfig parse_config(const nlohmann::json& doc);

/// Finds a config by path, or by preset name (with or without .json) in the
/// directory named by PRIORINFO_CONFIG_DIR, falling back to the built-in one.
std::string resolve_config_path(const std::string& name_or_path);
nlohmann::json load_config(const std::string& name_or_path);

/// FNV-1a over the compact serialization (object keys are sorted).
std::uint64_t config_hash(const nlohmann::json& doc);
std::string hex64(std::uint64_t v);

}  // namespace priorinfo
