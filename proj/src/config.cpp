#include "priorinfo/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>

#ifndef PRIORINFO_DEFAULT_CONFIG_DIR
#define PRIORINFO_DEFAULT_CONFIG_DIR "configs"
#endif

namespace priorinfo {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

const json& need(const json& j, const std::string& name, const std::string& key) {
  if (!j.is_object()) fail(key, "expected an object");
  auto it = j.find(name);
  if (it == j.end()) fail(key + "." + name, "missing");
  return *it;
}

double number(const json& j, const std::string& key) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  }
  if (!j.is_number()) fail(key, "expected a number");
  return j.get<double>();
}

double number_or(const json& j, const std::string& name, const std::string& key, double fallback) {
  auto it = j.find(name);
  return it == j.end() ? fallback : number(*it, key + "." + name);
}

long integer(const json& j, const std::string& key) {
  if (!j.is_number_integer()) fail(key, "expected an integer");
  return j.get<long>();
}

bool flag_or(const json& j, const std::string& name, const std::string& key, bool fallback) {
  auto it = j.find(name);
  if (it == j.end()) return fallback;
  if (!it->is_boolean()) fail(key + "." + name, "expected true or false");
  return it->get<bool>();
}

std::string text(const json& j, const std::string& key) {
  if (!j.is_string()) fail(key, "expected a string");
  return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& key) {
  if (!j.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<long> integers(const json& j, const std::string& key) {
  if (!j.is_array()) fail(key, "expected an array of integers");
  std::vector<long> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(integer(j[i], key + "[" + std::to_string(i) + "]"));
  return out;
}

Eigen::VectorXd vector_of(const json& j, const std::string& key) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  const auto v = numbers(j, key);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), Eigen::Index(v.size()));
}

Eigen::MatrixXd matrix_of(const json& j, const std::string& key) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  if (!j.is_array() || j.empty()) fail(key, "expected a number or a nonempty array of rows");
  const Eigen::Index rows = Eigen::Index(j.size());
  Eigen::MatrixXd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto row = numbers(j[std::size_t(r)], key + "[" + std::to_string(r) + "]");
    if (r == 0) m.resize(rows, Eigen::Index(row.size()));
    if (Eigen::Index(row.size()) != m.cols()) fail(key, "rows must have equal length");
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = row[std::size_t(c)];
  }
  return m;
}

std::array<long, 2> pair_of(const json& j, const std::string& key) {
  const auto v = integers(j, key);
  if (v.size() != 2) fail(key, "expected two integers");
  return {v[0], v[1]};
}

ScalarPrior scalar_prior(const json& j, const std::string& key) {
  const PriorSpec p = parse_prior(j, key);
  if (const auto* n = std::get_if<NormalPrior>(&p)) return *n;
  if (const auto* t = std::get_if<StudentTPrior>(&p)) return *t;
  fail(key, "product components must be normal or t");
}

template <class F>
auto guarded(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::logic_error& e) {
    fail(key, e.what());
  }
}

RegressionPrior regression_prior(const json& j, const std::string& key) {
  RegressionPrior r;
  r.alpha = number(need(j, "alpha", key), key + ".alpha");
  r.rate = number(need(j, "rate", key), key + ".rate");
  r.sigma = matrix_of(need(j, "sigma", key), key + ".sigma");
  r.lambda = number_or(j, "lambda", key, std::numeric_limits<double>::infinity());
  return r;
}

ScanSpec parse_scan(const json& j) {
  const std::string key = "scan";
  ScanSpec s;
  s.kind = text(need(j, "kind", key), key + ".kind");
  if (s.kind != "betabinom" && s.kind != "logistic" && s.kind != "reduction" && s.kind != "multinomial")
    fail(key + ".kind", "expected betabinom, logistic, reduction or multinomial");
  s.x = parse_axis(need(j, "x", key), key + ".x");
  s.y = parse_axis(need(j, "y", key), key + ".y");
  if (auto it = j.find("family"); it != j.end())
    s.family = guarded(key + ".family", [&] { return parse_alt_family(text(*it, key + ".family")); });
  s.t_dof = number_or(j, "t_dof", key, 1.0);
  if (s.kind == "multinomial") {
    s.u1 = pair_of(need(j, "u1", key), key + ".u1");
    s.u2 = pair_of(need(j, "u2", key), key + ".u2");
  }
  if (auto it = j.find("contours"); it != j.end()) s.contour_levels = numbers(*it, key + ".contours");
  if (auto it = j.find("slices"); it != j.end()) {
    if (!it->is_array()) fail(key + ".slices", "expected an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string k = key + ".slices[" + std::to_string(i) + "]";
      const json& e = (*it)[i];
      SliceSpec sl;
      const std::string vary = text(need(e, "vary", k), k + ".vary");
      if (vary != "sigma0" && vary != "sigma1") fail(k + ".vary", "expected sigma0 or sigma1");
      sl.vary_intercept = vary == "sigma0";
      sl.fixed = number(need(e, "fixed", k), k + ".fixed");
      sl.axis = parse_axis(need(e, "axis", k), k + ".axis");
      sl.axis.name = vary;
      s.slices.push_back(sl);
    }
  }
  return s;
}

}  // namespace

Axis parse_axis(const json& j, const std::string& key) {
  Axis a;
  a.name = j.contains("name") ? text(j["name"], key + ".name") : key;
  a.lo = number(need(j, "lo", key), key + ".lo");
  a.hi = number(need(j, "hi", key), key + ".hi");
  a.steps = int(j.contains("steps") ? integer(j["steps"], key + ".steps") : 50);
  if (a.steps < 1) fail(key + ".steps", "must be at least 1");
  if (a.steps > 1 && !(a.lo < a.hi)) fail(key, "lo must be below hi");
  return a;
}

SamplingModel parse_model(const json& j, const std::string& key) {
  const std::string type = text(need(j, "type", key), key + ".type");
  const bool asymptotic = flag_or(j, "asymptotic", key, false);
  auto sample_size = [&] {
    const long n = integer(need(j, "n", key), key + ".n");
    if (n < 1) fail(key + ".n", "sample size must be >= 1");
    return n;
  };
  auto n_of = [&] { return asymptotic && !j.contains("n") ? 1L : sample_size(); };
  SamplingModel m;
  if (type == "location-normal") {
    m = LocationNormal{int(j.contains("dim") ? integer(j["dim"], key + ".dim") : 1), n_of(), asymptotic};
  } else if (type == "scale-normal") {
    m = ScaleNormal{n_of(), asymptotic};
  } else if (type == "binomial") {
    m = Binomial{n_of(), asymptotic};
  } else if (type == "multinomial") {
    if (asymptotic) fail(key + ".asymptotic", "the multinomial model has no limiting form here");
    m = ShiftedMultinomial{sample_size()};
  } else if (type == "logistic") {
    if (asymptotic) fail(key + ".asymptotic", "the logistic model has no limiting form here");
    const auto sizes = integers(need(j, "group_sizes", key), key + ".group_sizes");
    std::vector<int> groups(sizes.begin(), sizes.end());
    if (j.contains("doses")) {
      const auto doses = numbers(j["doses"], key + ".doses");
      const double sd = number_or(j, "dose_sd", key, 0.5);
      m = guarded(key, [&] { return logistic_from_doses(doses, groups, sd); });
    } else {
      Logistic lg;
      lg.predictors = matrix_of(need(j, "predictors", key), key + ".predictors");
      lg.group_sizes = groups;
      if (lg.predictors.rows() != Eigen::Index(groups.size()))
        fail(key + ".predictors", "need one row per group");
      m = lg;
    }
  } else {
    fail(key + ".type", "expected location-normal, scale-normal, binomial, multinomial or logistic");
  }
  guarded(key, [&] {
    validate_model(m);
    return 0;
  });
  return m;
}

PriorSpec parse_prior(const json& j, const std::string& key) {
  const std::string family = text(need(j, "family", key), key + ".family");
  return guarded(key, [&]() -> PriorSpec {
    if (family == "normal") {
      const json& mean = j.contains("mean") ? j["mean"] : json(0.0);
      const json& cov = j.contains("cov") ? j["cov"] : need(j, "variance", key);
      const Eigen::VectorXd mu = vector_of(mean, key + ".mean");
      Eigen::MatrixXd c = matrix_of(cov, key + (j.contains("cov") ? ".cov" : ".variance"));
      if (c.size() == 1 && mu.size() > 1) c = c(0, 0) * Eigen::MatrixXd::Identity(mu.size(), mu.size());
      return normal_prior(mu, c);
    }
    if (family == "t") {
      const json& loc = j.contains("location") ? j["location"] : json(0.0);
      const Eigen::VectorXd mu = vector_of(loc, key + ".location");
      Eigen::MatrixXd s = matrix_of(need(j, "scale", key), key + ".scale");
      if (s.size() == 1 && mu.size() > 1) s = s(0, 0) * Eigen::MatrixXd::Identity(mu.size(), mu.size());
      return student_t_prior(mu, s, number(need(j, "dof", key), key + ".dof"));
    }
    if (family == "gamma")
      return gamma_rate_prior(number(need(j, "shape", key), key + ".shape"),
                              number(need(j, "rate", key), key + ".rate"));
    if (family == "beta")
      return beta_prior(number(need(j, "alpha", key), key + ".alpha"), number(need(j, "beta", key), key + ".beta"));
    if (family == "product") {
      const json& comps = need(j, "components", key);
      if (!comps.is_array() || comps.empty()) fail(key + ".components", "expected a nonempty array");
      std::vector<ScalarPrior> parts;
      for (std::size_t i = 0; i < comps.size(); ++i)
        parts.push_back(scalar_prior(comps[i], key + ".components[" + std::to_string(i) + "]"));
      return product_prior(std::move(parts));
    }
    fail(key + ".family", "expected normal, t, gamma, beta or product");
  });
}

SufficientStat parse_statistic(const json& j, const SamplingModel& model, const std::string& key) {
  const bool counts = std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, Binomial>) return !m.asymptotic;
        return std::is_same_v<M, Logistic> || std::is_same_v<M, ShiftedMultinomial>;
      },
      model);
  SufficientStat t = counts ? SufficientStat::counts(j.is_number() ? std::vector<long>{integer(j, key)}
                                                                    : integers(j, key))
                            : SufficientStat::real(vector_of(j, key));
  guarded(key, [&] {
    validate_stat(model, t);
    return 0;
  });
  return t;
}

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: the document must be a JSON object");
  RunConfig c;
  c.source = doc;
  if (doc.contains("model")) c.model = parse_model(doc["model"]);
  if (doc.contains("base")) c.base = parse_prior(doc["base"], "base");
  if (doc.contains("alt")) c.alt = parse_prior(doc["alt"], "alt");
  if (doc.contains("observed")) {
    if (!c.model) fail("observed", "needs a model");
    c.observed = parse_statistic(doc["observed"], *c.model);
  }
  if (doc.contains("condition_on")) {
    const json& u = doc["condition_on"];
    if (u.contains("u1")) c.condition_u1 = pair_of(u["u1"], "condition_on.u1");
    if (u.contains("u2")) c.condition_u2 = pair_of(u["u2"], "condition_on.u2");
  }
  c.gamma = number_or(doc, "gamma", "", c.gamma);
  if (!(c.gamma > 0.0 && c.gamma < 1.0)) fail("gamma", "must lie in (0,1)");
  if (doc.contains("seed")) {
    if (!doc["seed"].is_number_unsigned()) fail("seed", "expected a nonnegative integer");
    c.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("method"))
    c.method = guarded("method", [&] { return parse_method(text(doc["method"], "method")); });
  if (doc.contains("mc_samples")) {
    const long s = integer(doc["mc_samples"], "mc_samples");
    if (s < 1) fail("mc_samples", "must be positive");
    c.mc_samples = std::size_t(s);
  }
  if (doc.contains("quadrature")) {
    const json& q = doc["quadrature"];
    c.rule.normal_span = number_or(q, "normal_span", "quadrature", c.rule.normal_span);
    c.rule.normal_max_step = number_or(q, "normal_max_step", "quadrature", c.rule.normal_max_step);
    c.rule.normal_steps_per_sd = number_or(q, "normal_steps_per_sd", "quadrature", c.rule.normal_steps_per_sd);
    if (q.contains("t_nodes")) c.rule.t_nodes = int(integer(q["t_nodes"], "quadrature.t_nodes"));
  }
  if (doc.contains("scan")) c.scan = parse_scan(doc["scan"]);
  if (doc.contains("calibrate")) {
    const json& j = doc["calibrate"];
    CalibrateSpec s;
    if (j.contains("family")) s.family = text(j["family"], "calibrate.family");
    if (s.family != "normal" && s.family != "t") fail("calibrate.family", "expected normal or t");
    s.lambda = number_or(j, "lambda", "calibrate", s.lambda);
    s.p = number_or(j, "p", "calibrate", s.p);
    s.base_variance = number_or(j, "base_variance", "calibrate", s.base_variance);
    if (j.contains("n")) s.n = integer(j["n"], "calibrate.n");
    if (s.n < 0) fail("calibrate.n", "must be nonnegative");
    c.calibrate = s;
  }
  if (doc.contains("regress")) {
    const json& j = doc["regress"];
    c.regress = RegressSpec{regression_prior(need(j, "base", "regress"), "regress.base"),
                            regression_prior(need(j, "alt", "regress"), "regress.alt")};
  }
  if (c.model && c.base) guarded("base", [&] {
      validate(*c.model, *c.base);
      return 0;
    });
  if (c.model && c.alt) guarded("alt", [&] {
      validate(*c.model, *c.alt);
      return 0;
    });
  return c;
}

std::string resolve_config_path(const std::string& name) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(name)) return name;
  std::vector<fs::path> dirs;
  if (const char* env = std::getenv("PRIORINFO_CONFIG_DIR"); env && *env) dirs.emplace_back(env);
  dirs.emplace_back(PRIORINFO_DEFAULT_CONFIG_DIR);
  for (const auto& d : dirs)
    for (const std::string& suffix : {std::string(), std::string(".json")}) {
      const fs::path p = d / (name + suffix);
      if (fs::is_regular_file(p)) return p.string();
    }
  throw ConfigError("config '" + name + "': no such file or preset");
}

json load_config(const std::string& name) {
  const std::string path = resolve_config_path(name);
  std::ifstream in(path);
  if (!in) throw ConfigError("config '" + path + "': cannot be opened");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
}

std::uint64_t config_hash(const json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : doc.dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace priorinfo
