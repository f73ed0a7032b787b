#include "priorinfo/weakinfo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "priorinfo/parallel.hpp"

namespace priorinfo {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0,1)");
}

bool is_flat(const UnivariatePredictive& p) { return p.shape() == UnivariatePredictive::Shape::Flat; }

bool in_region(const Region& region, double x) {
  return std::any_of(region.begin(), region.end(), [&](const Interval& iv) { return iv.lo <= x && x <= iv.hi; });
}

Method rate_method(const SamplingModel& model, const PriorSpec& a, const PriorSpec& b) {
  auto quad = [&](const PriorSpec& p) {
    const auto* m = std::get_if<LocationNormal>(&model);
    return m && !m->asymptotic && std::holds_alternative<StudentTPrior>(p);
  };
  return quad(a) || quad(b) ? Method::Quadrature : Method::ClosedForm;
}

double binomial_stderr(double p, std::size_t n) { return std::sqrt(std::max(p * (1.0 - p), 0.0) / double(n)); }

// Alternative-prior P-values of draws from the base predictive, for the
// k-dimensional location model. Without a closed form, P2(t) is estimated by
// the share of alternative-predictive draws whose density is no larger.
std::vector<double> multivariate_alt_pvalues(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                                             const ConflictOptions& opts) {
  const MultivariatePredictive pred1 = multivariate_predictive(model, base);
  const MultivariatePredictive pred2 = multivariate_predictive(model, alt);
  const std::size_t n = opts.mc_samples;
  if (n == 0) throw DomainError("Monte Carlo needs at least one sample");
  Rng base_rng = Rng(opts.seed).substream(1);
  std::vector<Eigen::VectorXd> draws(n);
  for (auto& d : draws) d = pred1.sample(base_rng);
  std::vector<double> p2(n);
  if (pred2.has_closed_form_pvalue()) {
    parallel_for(n, [&](std::size_t i) { p2[i] = pred2.pvalue(draws[i]); });
    return p2;
  }
  Rng alt_rng = Rng(opts.seed).substream(2);
  std::vector<Eigen::VectorXd> ref(n);
  for (auto& d : ref) d = pred2.sample(alt_rng);
  std::vector<double> ref_log(n), draw_log(n);
  parallel_for(n, [&](std::size_t i) {
    ref_log[i] = pred2.log_density(ref[i]);
    draw_log[i] = pred2.log_density(draws[i]);
  });
  std::sort(ref_log.begin(), ref_log.end());
  for (std::size_t i = 0; i < n; ++i)
    p2[i] = double(std::upper_bound(ref_log.begin(), ref_log.end(), draw_log[i]) - ref_log.begin()) / double(n);
  return p2;
}

double share_at_or_below(const std::vector<double>& sorted, double x) {
  return double(std::upper_bound(sorted.begin(), sorted.end(), x) - sorted.begin()) / double(sorted.size());
}

// Tail-domination check along the alternative's monotone branch: at each
// point x the base mass of {m2 <= m2(x)} must not exceed its alternative mass.
WiVerdict univariate_uniform(const UnivariatePredictive& pred1, const UnivariatePredictive& pred2,
                             const WiOptions& opts, Method method) {
  WiVerdict v;
  v.evidence.route = "tail-grid";
  v.evidence.method = method;
  if (is_flat(pred2) || is_flat(pred1)) {
    // A flat alternative never flags conflict; a flat base has quantile 1.
    v.classification = WiClass::UniformlyWi;
    v.gamma0 = 1.0;
    v.gamma = 1.0;
    return v;
  }
  const Interval b = pred2.branch();
  const double spread = std::max(pred1.scale(), pred2.scale()) * opts.grid_span;
  double lo = b.lo, hi = b.hi;
  if (std::isinf(lo)) lo = (std::isinf(hi) ? pred2.turning() : hi) - spread;
  if (std::isinf(hi)) hi = lo + spread;

  const int n = std::max(opts.t0_grid, 8);
  const auto count = static_cast<std::size_t>(n);
  std::vector<double> xs(count), level(count), mass(count);
  for (int j = 0; j < n; ++j) xs[std::size_t(j)] = lo + (hi - lo) * double(j + 1) / double(n + 1);
  auto eval = [&](double x, double& p2, double& m1) {
    const Region r = pred2.level_region(x);
    p2 = pred2.mass(r);
    m1 = pred1.mass(r);
  };
  parallel_for(std::size_t(n), [&](std::size_t j) { eval(xs[j], level[j], mass[j]); });
  // Walk points in order of increasing level.
  if (!pred2.pvalue_increases_on_branch()) {
    std::reverse(xs.begin(), xs.end());
    std::reverse(level.begin(), level.end());
    std::reverse(mass.begin(), mass.end());
  }
  v.evidence.points = count;
  // Relative comparison: deep-tail violations are tiny in absolute terms.
  auto violates = [&](double m, double p) { return m - p > opts.margin_tol * p; };
  double worst = -std::numeric_limits<double>::infinity();
  int first_bad = -1;
  for (int j = 0; j < n; ++j) {
    const double margin = mass[std::size_t(j)] - level[std::size_t(j)];
    worst = std::max(worst, margin);
    if (first_bad < 0 && violates(mass[std::size_t(j)], level[std::size_t(j)])) first_bad = j;
    if (margin > 0.0 && margin <= 10.0 * opts.margin_tol * level[std::size_t(j)]) v.evidence.grid_warning = true;
  }
  v.evidence.worst_margin = worst;
  if (first_bad < 0) {
    v.classification = WiClass::UniformlyWi;
    v.gamma0 = 1.0;
    v.gamma = 1.0;
    return v;
  }
  if (first_bad == 0) {
    // Violation already at the outermost grid point: the boundary is below the grid.
    v.evidence.grid_warning = true;
    v.classification = WiClass::NotUniformlyWi;
    v.gamma0 = 0.0;
    v.gamma = 0.0;
    v.conflict_rate = mass[0];
    v.quantile = level[0];
    return v;
  }
  double x_ok = xs[std::size_t(first_bad - 1)], x_bad = xs[std::size_t(first_bad)];
  double p_ok = level[std::size_t(first_bad - 1)], m_ok = mass[std::size_t(first_bad - 1)];
  double p_bad = level[std::size_t(first_bad)];
  for (int it = 0; it < 200 && std::abs(p_bad - p_ok) > opts.gamma0_tol; ++it) {
    const double mid = 0.5 * (x_ok + x_bad);
    double p, m;
    eval(mid, p, m);
    if (violates(m, p)) {
      x_bad = mid;
      p_bad = p;
    } else {
      x_ok = mid;
      p_ok = p;
      m_ok = m;
    }
  }
  v.classification = p_ok > 0.0 ? WiClass::UniformlyWiAtLevel : WiClass::NotUniformlyWi;
  v.gamma0 = p_ok;
  v.gamma = p_ok;
  v.quantile = p_ok;
  v.conflict_rate = m_ok;
  return v;
}

WiVerdict multivariate_uniform(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                               const WiOptions& opts) {
  std::vector<double> p2 = multivariate_alt_pvalues(model, base, alt, opts.conflict);
  std::sort(p2.begin(), p2.end());
  const std::size_t n = p2.size();
  WiVerdict v;
  v.evidence.route = "monte-carlo";
  v.evidence.method = Method::MonteCarlo;
  v.evidence.points = n;
  v.evidence.seed = opts.conflict.seed;
  double worst = -std::numeric_limits<double>::infinity();
  double worst_in_se = -std::numeric_limits<double>::infinity();
  double gamma0 = 1.0;
  bool failed = false;
  double last_ok = 0.0;
  for (int i = 1; i <= 999; ++i) {
    const double g = i / 1000.0;
    const double rate = share_at_or_below(p2, g);
    const double se = binomial_stderr(g, n);
    worst = std::max(worst, rate - g);
    worst_in_se = std::max(worst_in_se, (rate - g) / se);
    if (!failed && rate > g) {
      // The verdict hinges on this margin.
      v.evidence.indeterminate = rate - g < 3.0 * se;
      double a = last_ok, b = g;
      while (b - a > opts.gamma0_tol) {
        const double mid = 0.5 * (a + b);
        (share_at_or_below(p2, mid) > mid ? b : a) = mid;
      }
      gamma0 = a;
      failed = true;
    }
    if (!failed) last_ok = g;
  }
  if (!failed) v.evidence.indeterminate = worst_in_se > -3.0;
  v.evidence.worst_margin = worst;
  v.evidence.mc_stderr = binomial_stderr(0.5, n);
  v.gamma0 = gamma0;
  v.gamma = gamma0;
  v.classification = !failed ? WiClass::UniformlyWi
                             : (gamma0 > 0.0 ? WiClass::UniformlyWiAtLevel : WiClass::NotUniformlyWi);
  return v;
}

WiVerdict discrete_verdict(const PmfLadder& base, const PmfLadder& alt, double gamma) {
  WiVerdict v;
  v.gamma = gamma;
  v.quantile = base.quantile(gamma);
  v.conflict_rate = discrete_conflict_rate(base, alt, v.quantile);
  if (v.quantile > 0.0) v.reduction = 1.0 - v.conflict_rate / v.quantile;
  v.classification = leq_tied(v.conflict_rate, v.quantile) ? WiClass::WiAtLevel : WiClass::NotWiAtLevel;
  v.evidence.route = "enumeration";
  v.evidence.method = Method::Enumeration;
  v.evidence.points = std::size_t(base.pmf().size());
  v.evidence.worst_margin = v.conflict_rate - v.quantile;
  return v;
}

WiVerdict discrete_uniform_verdict(const PmfLadder& base, const PmfLadder& alt) {
  const UniformResult u = discrete_uniform(base, alt);
  WiVerdict v;
  v.evidence.route = "level-ladder";
  v.evidence.method = Method::Enumeration;
  v.evidence.points = u.points;
  v.evidence.worst_margin = u.worst_margin;
  v.gamma0 = u.gamma0;
  v.gamma = u.gamma0;
  v.classification = u.uniform ? WiClass::UniformlyWi
                               : (u.gamma0 > 0.0 ? WiClass::UniformlyWiAtLevel : WiClass::NotUniformlyWi);
  return v;
}

PmfLadder discrete_ladder(const SamplingModel& model, const PriorSpec& prior, const ConflictOptions& opts) {
  return PmfLadder(discrete_predictive_pmf(model, prior, opts));
}

ConditionalLattice conditional_lattice(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                                       AncillaryKind kind, std::array<long, 2> value) {
  const auto* m = std::get_if<ShiftedMultinomial>(&model);
  if (!m) throw UnsupportedPair("conditional checks are implemented for the shifted multinomial only");
  validate(model, base);
  validate(model, alt);
  if (value[0] < 0 || value[1] < 0 || value[0] + value[1] != m->n)
    throw RangeError("ancillary value must be two nonnegative counts summing to n");
  return ConditionalLattice(kind, value);
}

}  // namespace

std::string wi_class_name(WiClass c) {
  switch (c) {
    case WiClass::WiAtLevel: return "weakly-informative-at-level";
    case WiClass::NotWiAtLevel: return "not-wi-at-level";
    case WiClass::UniformlyWi: return "uniformly-wi";
    case WiClass::UniformlyWiAtLevel: return "uniformly-wi-at-level";
    case WiClass::NotUniformlyWi: return "not-uniformly-wi";
  }
  return "unknown";
}

double discrete_conflict_rate(const PmfLadder& base, const PmfLadder& alt, double x) {
  return mass_at_or_below(base.pmf(), alt.pvalues(), x);
}

UniformResult discrete_uniform(const PmfLadder& base, const PmfLadder& alt) {
  if (base.size() != alt.size()) throw DomainError("discrete_uniform: ladders differ in size");
  const TailMassTable table(base.pmf(), alt.pvalues());
  UniformResult r;
  r.worst_margin = -std::numeric_limits<double>::infinity();
  double last_ok = 0.0;
  for (double level : base.levels()) {
    const double m = table(level);
    r.worst_margin = std::max(r.worst_margin, m - level);
    ++r.points;
    if (r.uniform && !leq_tied(m, level)) {
      r.uniform = false;
      r.gamma0 = last_ok;
    }
    if (r.uniform) last_ok = level;
  }
  if (r.uniform) r.gamma0 = 1.0;
  return r;
}

double pvalue_quantile(const SamplingModel& model, const PriorSpec& base, double gamma, const WiOptions& opts) {
  check_gamma(gamma);
  validate(model, base);
  switch (predictive_kind(model)) {
    case PredictiveKind::Discrete: return discrete_ladder(model, base, opts.conflict).quantile(gamma);
    case PredictiveKind::Univariate: return is_flat(univariate_predictive(model, base)) ? 1.0 : gamma;
    case PredictiveKind::Multivariate: return gamma;
  }
  return gamma;
}

ConflictRate conflict_rate(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt, double gamma,
                           const WiOptions& opts) {
  check_gamma(gamma);
  validate(model, base);
  validate(model, alt);
  const Method req = opts.conflict.method;
  ConflictRate r;
  auto monte_carlo = [&](const std::function<bool(const SufficientStat&)>& flags) {
    const std::size_t n = opts.conflict.mc_samples;
    if (n == 0) throw DomainError("Monte Carlo needs at least one sample");
    Rng rng = Rng(opts.conflict.seed).substream(1);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (flags(sample_statistic(model, base, rng))) ++hits;
    r.value = double(hits) / double(n);
    r.method = Method::MonteCarlo;
    r.samples = n;
    r.mc_stderr = binomial_stderr(r.value, n);
  };

  switch (predictive_kind(model)) {
    case PredictiveKind::Discrete: {
      const PmfLadder l1 = discrete_ladder(model, base, opts.conflict);
      const PmfLadder l2 = discrete_ladder(model, alt, opts.conflict);
      r.quantile = l1.quantile(gamma);
      if (req == Method::MonteCarlo) {
        monte_carlo([&](const SufficientStat& t) { return leq_tied(l2.pvalue(lattice_index(model, t)), r.quantile); });
      } else if (req == Method::Auto || req == Method::Enumeration) {
        r.value = discrete_conflict_rate(l1, l2, r.quantile);
        r.method = Method::Enumeration;
      } else {
        throw DomainError("method '" + method_name(req) + "' is not available for model '" + model_name(model) + "'");
      }
      return r;
    }
    case PredictiveKind::Univariate: {
      const UnivariatePredictive p1 = univariate_predictive(model, base);
      const UnivariatePredictive p2 = univariate_predictive(model, alt);
      r.quantile = is_flat(p1) ? 1.0 : gamma;
      if (req == Method::Enumeration)
        throw DomainError("method 'enumeration' is not available for model '" + model_name(model) + "'");
      // At quantile 1 every outcome is flagged; a flat alternative flags nothing below 1.
      const Region region = r.quantile >= 1.0 ? Region{{p2.lower(), p2.upper()}} : p2.conflict_region(r.quantile);
      if (req == Method::MonteCarlo) {
        monte_carlo([&](const SufficientStat& t) { return in_region(region, t.reals()[0]); });
      } else {
        r.value = p1.mass(region);
        r.method = rate_method(model, base, alt);
      }
      return r;
    }
    case PredictiveKind::Multivariate: {
      if (req != Method::Auto && req != Method::MonteCarlo)
        throw DomainError("method '" + method_name(req) + "' is not available for model '" + model_name(model) + "'");
      r.quantile = gamma;
      std::vector<double> p2 = multivariate_alt_pvalues(model, base, alt, opts.conflict);
      std::sort(p2.begin(), p2.end());
      r.value = share_at_or_below(p2, gamma);
      r.method = Method::MonteCarlo;
      r.samples = p2.size();
      r.mc_stderr = binomial_stderr(r.value, p2.size());
      return r;
    }
  }
  return r;
}

std::optional<double> reduction(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                                double gamma, const WiOptions& opts) {
  const ConflictRate r = conflict_rate(model, base, alt, gamma, opts);
  if (r.quantile <= 0.0) return std::nullopt;
  return 1.0 - r.value / r.quantile;
}

WiVerdict check_at_level(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt, double gamma,
                         const WiOptions& opts) {
  const ConflictRate r = conflict_rate(model, base, alt, gamma, opts);
  WiVerdict v;
  v.gamma = gamma;
  v.conflict_rate = r.value;
  v.quantile = r.quantile;
  if (r.quantile > 0.0) v.reduction = 1.0 - r.value / r.quantile;
  v.evidence.method = r.method;
  v.evidence.points = r.samples;
  v.evidence.mc_stderr = r.mc_stderr;
  v.evidence.worst_margin = r.value - r.quantile;
  if (r.method == Method::MonteCarlo) {
    v.evidence.route = "monte-carlo";
    v.evidence.seed = opts.conflict.seed;
    v.classification = r.value <= r.quantile ? WiClass::WiAtLevel : WiClass::NotWiAtLevel;
    v.evidence.indeterminate = std::abs(r.value - r.quantile) < 3.0 * r.mc_stderr.value_or(0.0);
  } else {
    v.evidence.route = r.method == Method::Enumeration ? "enumeration" : "conflict-region";
    const bool ok = r.method == Method::Enumeration ? leq_tied(r.value, r.quantile)
                                                    : r.value <= r.quantile * (1.0 + opts.margin_tol);
    v.classification = ok ? WiClass::WiAtLevel : WiClass::NotWiAtLevel;
  }
  return v;
}

WiVerdict is_uniformly_wi(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                          const WiOptions& opts) {
  validate(model, base);
  validate(model, alt);
  switch (predictive_kind(model)) {
    case PredictiveKind::Discrete:
      return discrete_uniform_verdict(discrete_ladder(model, base, opts.conflict),
                                      discrete_ladder(model, alt, opts.conflict));
    case PredictiveKind::Univariate:
      return univariate_uniform(univariate_predictive(model, base), univariate_predictive(model, alt), opts,
                                rate_method(model, base, alt));
    case PredictiveKind::Multivariate:
      return multivariate_uniform(model, base, alt, opts);
  }
  throw DomainError("unreachable");
}

WiVerdict conditional_check(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                            AncillaryKind kind, std::array<long, 2> value, double gamma) {
  check_gamma(gamma);
  const ConditionalLattice lat = conditional_lattice(model, base, alt, kind, value);
  const PmfLadder l1(conditional_predictive_pmf(lat, std::get<BetaPrior>(base)));
  const PmfLadder l2(conditional_predictive_pmf(lat, std::get<BetaPrior>(alt)));
  WiVerdict v = discrete_verdict(l1, l2, gamma);
  v.evidence.route = "conditional-enumeration";
  return v;
}

WiVerdict conditional_uniform(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                              AncillaryKind kind, std::array<long, 2> value) {
  const ConditionalLattice lat = conditional_lattice(model, base, alt, kind, value);
  const PmfLadder l1(conditional_predictive_pmf(lat, std::get<BetaPrior>(base)));
  const PmfLadder l2(conditional_predictive_pmf(lat, std::get<BetaPrior>(alt)));
  WiVerdict v = discrete_uniform_verdict(l1, l2);
  v.evidence.route = "conditional-level-ladder";
  return v;
}

double AncillaryVerdict::worst_reduction() const {
  const double lowest = -std::numeric_limits<double>::infinity();
  return std::min(u1.reduction.value_or(lowest), u2.reduction.value_or(lowest));
}

AncillaryVerdict check_given_ancillaries(const SamplingModel& model, const PriorSpec& base, const PriorSpec& alt,
                                         std::array<long, 2> u1, std::array<long, 2> u2, double gamma) {
  return {conditional_check(model, base, alt, AncillaryKind::U1, u1, gamma),
          conditional_check(model, base, alt, AncillaryKind::U2, u2, gamma)};
}

}  // namespace priorinfo
