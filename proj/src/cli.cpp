#include "priorinfo/cli.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "priorinfo/config.hpp"

namespace priorinfo {

namespace {

using nlohmann::json;

std::string six(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Flags {
  std::string config;
  std::optional<double> gamma;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string grid;
  bool asymptotic = false;
  std::string method;
  // kappa
  std::optional<double> lambda;
  std::string lambda_grid;
  std::optional<long> n;
};

/// Applies command-line overrides to the document so the provenance copy
/// records what actually ran.
json merged_document(const Flags& f, bool need_config) {
  json doc = json::object();
  if (!f.config.empty())
    doc = load_config(f.config);
  else if (need_config)
    throw ConfigError("config: this command needs --config");
  if (f.gamma) doc["gamma"] = *f.gamma;
  if (f.seed) doc["seed"] = *f.seed;
  if (!f.method.empty()) doc["method"] = f.method;
  if (f.asymptotic) {
    if (doc.contains("model")) doc["model"]["asymptotic"] = true;
    doc["asymptotic"] = true;
  }
  if (!f.grid.empty()) {
    int a = 0, b = 0;
    char tail = 0;
    if (std::sscanf(f.grid.c_str(), "%dx%d%c", &a, &b, &tail) != 2 || a < 1 || b < 1)
      throw ConfigError("config key 'grid': expected AxB with positive integers, got '" + f.grid + "'");
    if (!doc.contains("scan")) throw ConfigError("config key 'grid': needs a scan section");
    doc["scan"]["x"]["steps"] = a;
    doc["scan"]["y"]["steps"] = b;
  }
  return doc;
}

template <class T>
const T& require(const std::optional<T>& v, const char* key) {
  if (!v) throw ConfigError(std::string("config key '") + key + "': missing");
  return *v;
}

WiOptions wi_options(const RunConfig& c) {
  WiOptions o;
  o.conflict.method = c.method;
  o.conflict.seed = c.seed;
  o.conflict.mc_samples = c.mc_samples;
  o.conflict.logistic = c.rule;
  return o;
}

std::string provenance(const RunConfig& c) {
  return "seed=" + std::to_string(c.seed) + " config_hash=" + hex64(config_hash(c.source));
}

void write_file(const std::string& path, const std::string& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("config key 'out': cannot write '" + path + "'");
  os << body;
}

void write_provenance(const RunConfig& c, const std::string& out) {
  if (!out.empty()) write_file(out + ".config.json", c.source.dump(2) + "\n");
}

json report_json(const ConflictReport& r) {
  json j = {{"pvalue", r.pvalue}, {"density_at_t0", r.density_at_t0}, {"method", method_name(r.method)}};
  if (r.mc_stderr) {
    j["mc_stderr"] = *r.mc_stderr;
    j["mc_samples"] = r.mc_samples;
    j["seed"] = r.seed;
  }
  if (!r.component_pvalues.empty()) j["component_pvalues"] = r.component_pvalues;
  return j;
}

std::string report_line(const std::string& label, const ConflictReport& r) {
  std::string s = label + " " + six(r.pvalue) + "  method=" + method_name(r.method);
  if (r.mc_stderr) s += "  stderr=" + six(*r.mc_stderr) + "  seed=" + std::to_string(r.seed);
  return s;
}

json verdict_json(const WiVerdict& v) {
  json j = {{"classification", wi_class_name(v.classification)},
            {"gamma", v.gamma},
            {"conflict_rate", v.conflict_rate},
            {"quantile", v.quantile},
            {"route", v.evidence.route},
            {"method", method_name(v.evidence.method)},
            {"indeterminate", v.evidence.indeterminate}};
  if (v.reduction) j["reduction"] = *v.reduction;
  if (v.gamma0) j["gamma0"] = *v.gamma0;
  if (v.evidence.mc_stderr) j["mc_stderr"] = *v.evidence.mc_stderr;
  return j;
}

std::string verdict_line(const std::string& label, const WiVerdict& v) {
  std::string s = label + " " + wi_class_name(v.classification);
  if (v.gamma0) s += "  gamma0=" + six(*v.gamma0);
  if (!v.gamma0) {
    s += "  rate=" + six(v.conflict_rate) + "  quantile=" + six(v.quantile);
    if (v.reduction) s += "  reduction=" + six(*v.reduction);
  }
  s += "  route=" + v.evidence.route;
  if (v.evidence.mc_stderr) s += "  stderr=" + six(*v.evidence.mc_stderr);
  if (v.evidence.indeterminate) s += "  (indeterminate)";
  if (v.evidence.grid_warning) s += "  (grid warning)";
  return s;
}

int cmd_pvalue(const RunConfig& c, const Flags& f, std::ostream& out) {
  const auto& model = require(c.model, "model");
  const auto& prior = require(c.base, "base");
  const auto& t0 = require(c.observed, "observed");
  ConflictOptions o = wi_options(c).conflict;
  const ConflictReport r = conflict_pvalue(model, prior, t0, o);
  out << report_line("p-value", r) << "\n";
  json doc = {{"pvalue", report_json(r)}, {"config_hash", hex64(config_hash(c.source))}, {"seed", c.seed}};
  if (std::holds_alternative<ShiftedMultinomial>(model)) {
    const AncillaryReport a = multiple_ancillary_check(model, prior, t0, o);
    out << report_line("given-u1", a.u1) << "\n" << report_line("given-u2", a.u2) << "\n";
    doc["given_u1"] = report_json(a.u1);
    doc["given_u2"] = report_json(a.u2);
  }
  if (!f.out.empty()) {
    write_file(f.out, doc.dump(2) + "\n");
    write_provenance(c, f.out);
  }
  return 0;
}

int cmd_check(const RunConfig& c, const Flags& f, std::ostream& out) {
  const auto& model = require(c.model, "model");
  const auto& base = require(c.base, "base");
  const auto& alt = require(c.alt, "alt");
  json doc = {{"config_hash", hex64(config_hash(c.source))}, {"seed", c.seed}};
  if (std::holds_alternative<ShiftedMultinomial>(model) && (c.condition_u1 || c.condition_u2)) {
    const auto& u1 = require(c.condition_u1, "condition_on.u1");
    const auto& u2 = require(c.condition_u2, "condition_on.u2");
    const AncillaryVerdict v = check_given_ancillaries(model, base, alt, u1, u2, c.gamma);
    const WiVerdict w1 = conditional_uniform(model, base, alt, AncillaryKind::U1, u1);
    const WiVerdict w2 = conditional_uniform(model, base, alt, AncillaryKind::U2, u2);
    out << verdict_line("given-u1 level", v.u1) << "\n" << verdict_line("given-u2 level", v.u2) << "\n";
    out << verdict_line("given-u1 uniform", w1) << "\n" << verdict_line("given-u2 uniform", w2) << "\n";
    out << "both ancillaries: " << (v.weakly_informative() ? "weakly-informative-at-level" : "not-wi-at-level")
        << "\n";
    doc["given_u1"] = {{"level", verdict_json(v.u1)}, {"uniform", verdict_json(w1)}};
    doc["given_u2"] = {{"level", verdict_json(v.u2)}, {"uniform", verdict_json(w2)}};
  } else {
    const WiOptions o = wi_options(c);
    const WiVerdict level = check_at_level(model, base, alt, c.gamma, o);
    const WiVerdict uniform = is_uniformly_wi(model, base, alt, o);
    out << verdict_line("level", level) << "\n" << verdict_line("uniform", uniform) << "\n";
    doc["level"] = verdict_json(level);
    doc["uniform"] = verdict_json(uniform);
  }
  if (!f.out.empty()) {
    write_file(f.out, doc.dump(2) + "\n");
    write_provenance(c, f.out);
  }
  return 0;
}

int cmd_reduce(const RunConfig& c, std::ostream& out) {
  const auto& model = require(c.model, "model");
  const auto r = reduction(model, require(c.base, "base"), require(c.alt, "alt"), c.gamma, wi_options(c));
  out << "reduction " << (r ? six(*r) : std::string("undefined")) << "  gamma=" << six(c.gamma) << "\n";
  return 0;
}

template <class M>
const M& model_as(const RunConfig& c, const char* what) {
  const auto& m = require(c.model, "model");
  if (const auto* p = std::get_if<M>(&m)) return *p;
  throw ConfigError(std::string("config key 'model.type': this scan needs a ") + what + " model");
}

template <class P>
const P& prior_as(const RunConfig& c, const char* what) {
  const auto& p = require(c.base, "base");
  if (const auto* q = std::get_if<P>(&p)) return *q;
  throw ConfigError(std::string("config key 'base.family': this scan needs a ") + what + " prior");
}

int cmd_scan(const RunConfig& c, const Flags& f, std::ostream& out) {
  const ScanSpec& s = require(c.scan, "scan");
  std::ostringstream body;
  std::string summary;
  std::vector<std::pair<std::string, std::string>> extra;  // (suffix, body)
  body << "# priorinfo scan kind=" << s.kind << " gamma=" << full(c.gamma) << " " << provenance(c) << "\n";
  if (s.kind == "reduction") {
    const auto& lg = model_as<Logistic>(c, "logistic");
    const auto& base = prior_as<ProductPrior>(c, "product");
    const ReductionField field = logistic_reduction(lg, base, s.family, c.gamma, s.x, s.y, c.rule, s.t_dof);
    write_reduction_csv(body, field);
    summary = "reduction field " + std::to_string(s.x.steps) + "x" + std::to_string(s.y.steps) +
              "  quantile=" + six(field.quantile) + "  max=" + six(field.values.maxCoeff());
    if (!s.contour_levels.empty()) {
      std::ostringstream cs;
      cs << "# priorinfo contours " << provenance(c) << "\n";
      const auto lines = contour_lines(field, s.contour_levels);
      write_contours_csv(cs, lines);
      extra.emplace_back(".contours.csv", cs.str());
      summary += "\ncontours " + std::to_string(lines.size()) + " polylines";
    }
    if (!s.slices.empty()) {
      std::ostringstream ss;
      ss << "# priorinfo slices " << provenance(c) << "\n" << "vary,fixed,value,reduction\n";
      for (const auto& sl : s.slices) {
        const SliceMax m =
            logistic_slice_argmax(lg, base, s.family, c.gamma, sl.vary_intercept, sl.fixed, sl.axis, c.rule, s.t_dof);
        for (std::size_t i = 0; i < m.grid.size(); ++i)
          ss << sl.axis.name << ',' << full(sl.fixed) << ',' << full(m.grid[i]) << ',' << full(m.reductions[i])
             << "\n";
        summary += "\nslice " + sl.axis.name + " (other fixed at " + six(sl.fixed) + "): argmax " +
                   six(m.argmax) + " on [" + six(m.plateau_lo) + ", " + six(m.plateau_hi) + "]  reduction " +
                   six(m.max_reduction);
      }
      extra.emplace_back(".slices.csv", ss.str());
    }
  } else {
    RegionScan scan;
    if (s.kind == "betabinom") {
      const auto& m = model_as<Binomial>(c, "binomial");
      scan = betabinom_scan(m.n, m.asymptotic, prior_as<BetaPrior>(c, "beta"), c.gamma, s.x, s.y);
    } else if (s.kind == "logistic") {
      scan = logistic_scan(model_as<Logistic>(c, "logistic"), prior_as<ProductPrior>(c, "product"), s.family,
                           c.gamma, s.x, s.y, c.rule, s.t_dof);
    } else {
      const auto& m = model_as<ShiftedMultinomial>(c, "multinomial");
      scan = multinomial_ancillary_scan(m.n, s.u1, s.u2, prior_as<BetaPrior>(c, "beta"), c.gamma, s.x, s.y);
    }
    scan.seed = c.seed;
    write_scan_csv(body, scan);
    std::size_t counts[4] = {0, 0, 0, 0};
    for (auto cell : scan.cells) ++counts[int(cell)];
    summary = s.kind + " scan " + std::to_string(s.x.steps) + "x" + std::to_string(s.y.steps) +
              ": uniformly-wi " + std::to_string(counts[0]) + ", wi-at-level " + std::to_string(counts[1]) +
              ", not-wi " + std::to_string(counts[2]) + ", indeterminate " + std::to_string(counts[3]);
  }
  if (f.out.empty()) {
    out << body.str();
  } else {
    write_file(f.out, body.str());
    for (const auto& [suffix, text] : extra) write_file(f.out + suffix, text);
    write_provenance(c, f.out);
  }
  out << summary << "\n";
  return 0;
}

int cmd_calibrate(const RunConfig& c, const Flags& f, std::ostream& out) {
  const CalibrateSpec& s = require(c.calibrate, "calibrate");
  const Regime regime = (f.asymptotic || s.n == 0) ? Regime::limit() : Regime::finite(s.n);
  const CalibrationResult r = s.family == "normal" ? calibrate_normal(regime, s.base_variance, c.gamma, s.p)
                                                   : calibrate_t(s.lambda, regime, s.base_variance, c.gamma, s.p);
  out << "calibrated " << s.family << (s.family == "t" ? "(" + six(s.lambda) + ")" : std::string())
      << "  parameter=" << six(r.parameter) << "  ratio=" << six(r.ratio) << "  target=" << six(r.target_reduction)
      << "  achieved=" << six(r.achieved_reduction) << "  gamma=" << six(r.gamma)
      << "  n=" << (regime.asymptotic ? std::string("inf") : std::to_string(regime.n)) << "\n";
  if (!f.out.empty()) {
    json doc = {{"parameter", r.parameter}, {"ratio", r.ratio},   {"target_reduction", r.target_reduction},
                {"achieved_reduction", r.achieved_reduction},       {"gamma", r.gamma},
                {"asymptotic", regime.asymptotic},                  {"config_hash", hex64(config_hash(c.source))}};
    if (!regime.asymptotic) doc["n"] = regime.n;
    write_file(f.out, doc.dump(2) + "\n");
    write_provenance(c, f.out);
  }
  return 0;
}

int cmd_kappa(const Flags& f, std::ostream& out) {
  if (f.lambda) {
    const double l = *f.lambda;
    out << "kappa(" << six(l) << ") = " << six(t_variance_threshold(l)) << "  quantile-ratio sup "
        << six(t_quantile_ratio_sup(l));
    if (f.n) out << "  finite-n ratio (n=" << *f.n << ", unit base variance) " << six(finite_n_t_threshold(*f.n, 1.0, l));
    out << "\n";
  }
  if (!f.lambda_grid.empty()) {
    double lo = 0.0, hi = 0.0;
    int steps = 0;
    char tail = 0;
    if (std::sscanf(f.lambda_grid.c_str(), "%lf:%lf:%d%c", &lo, &hi, &steps, &tail) != 3 || !(lo > 0.0) ||
        !(hi > lo) || steps < 2)
      throw ConfigError("config key 'lambda-grid': expected LO:HI:STEPS with 0 < LO < HI and STEPS >= 2");
    std::ostringstream body;
    body << "# priorinfo kappa grid " << f.lambda_grid << "\nlambda,kappa,quantile_ratio_sup\n";
    for (int i = 0; i < steps; ++i) {
      const double l = i == steps - 1 ? hi : lo + (hi - lo) * double(i) / double(steps - 1);
      body << full(l) << ',' << full(t_variance_threshold(l)) << ',' << full(t_quantile_ratio_sup(l)) << "\n";
    }
    if (f.out.empty())
      out << body.str();
    else {
      write_file(f.out, body.str());
      out << "wrote " << steps << " rows to " << f.out << "\n";
    }
  }
  if (!f.lambda && f.lambda_grid.empty()) throw ConfigError("config key 'lambda': give --lambda or --lambda-grid");
  return 0;
}

int cmd_regress(const RunConfig& c, std::ostream& out) {
  const RegressSpec& s = require(c.regress, "regress");
  const RegressionVerdict v = regression_compose(s.base, s.alt);
  out << "variance prior: " << gamma_prior_verdict_name(v.variance) << "  (mode-line rate for shape "
      << six(s.alt.alpha) << ": " << six(gamma_mode_line_rate(s.base.alpha, s.base.rate, s.alt.alpha)) << ")\n";
  out << "coefficient prior: " << (v.coefficients_wi ? "wi-asymptotic" : "not-covered") << "  (threshold "
      << six(v.threshold) << " times the base scale)\n";
  const bool both = v.coefficients_wi && v.variance == GammaPriorVerdict::WiAsymptotic;
  out << "joint prior: " << (both ? "wi-asymptotic" : "not-covered") << "\n";
  return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Prior-data conflict and weak informativity checks"};
  app.require_subcommand(1);
  Flags f;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", f.config, "config file or preset name");
    sub->add_option("--gamma", f.gamma, "level gamma in (0,1)");
    sub->add_option("--seed", f.seed, "64-bit seed");
    sub->add_option("--out", f.out, "output path");
    sub->add_option("--grid", f.grid, "scan resolution AxB");
    sub->add_flag("--asymptotic", f.asymptotic, "use the large-sample limit");
    sub->add_option("--method", f.method, "auto, enum, quad or mc");
  };
  struct Sub {
    const char* name;
    const char* help;
  };
  const Sub subs[] = {{"pvalue", "prior-data conflict P-value"},
                      {"check", "weak informativity at a level and uniformly"},
                      {"scan", "region scan or reduction field to CSV"},
                      {"calibrate", "alternative prior achieving a target reduction"},
                      {"kappa", "t-prior variance threshold"},
                      {"reduce", "reduction in prior-data conflicts"},
                      {"regress", "composed verdict for a regression prior"}};
  std::map<std::string, CLI::App*> by_name;
  for (const auto& s : subs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    common(sub);
    by_name[s.name] = sub;
  }
  by_name["kappa"]->add_option("--lambda", f.lambda, "degrees of freedom");
  by_name["kappa"]->add_option("--lambda-grid", f.lambda_grid, "LO:HI:STEPS for a CSV table");
  by_name["kappa"]->add_option("--n", f.n, "sample size for the finite-n ratio");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    std::string cmd;
    for (const auto& [name, sub] : by_name)
      if (sub->parsed()) cmd = name;
    if (cmd == "kappa") return cmd_kappa(f, out);
    const RunConfig c = parse_config(merged_document(f, true));
    if (cmd == "pvalue") return cmd_pvalue(c, f, out);
    if (cmd == "check") return cmd_check(c, f, out);
    if (cmd == "scan") return cmd_scan(c, f, out);
    if (cmd == "calibrate") return cmd_calibrate(c, f, out);
    if (cmd == "reduce") return cmd_reduce(c, out);
    if (cmd == "regress") return cmd_regress(c, out);
    err << "error: unknown command\n";
    return 1;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::logic_error& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace priorinfo
