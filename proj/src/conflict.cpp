#include "priorinfo/conflict.hpp"

#include <algorithm>
#include <cmath>

#include "overloaded.hpp"

namespace priorinfo {

using detail::overloaded;

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double log_sigmoid(double eta) { return eta > 0 ? -std::log1p(std::exp(-eta)) : eta - std::log1p(std::exp(eta)); }

double scalar_of(const Eigen::MatrixXd& m) { return m(0, 0); }

[[noreturn]] void bad_method(Method m, const std::string& model) {
  throw DomainError("method '" + method_name(m) + "' is not available for model '" + model + "'");
}

// Integral over u ~ Gamma_rate(l/2, l/2) of the normal tail at q with
// variance 1/n + s2/u, i.e. the upper tail of the finite-n t predictive.
double t_mixture_tail(double q, double inv_n, double s2, double lambda) {
  const double h = 0.5 * lambda;
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double k = gamma_rate_pdf(h, h, u);
    if (k == 0.0 || !std::isfinite(k)) return 0.0;
    return normal_sf(q / std::sqrt(inv_n + s2 / u)) * k;
  };
  return integrate_adaptive(f, 0.0, std::numeric_limits<double>::infinity(), 1e-12);
}

double t_mixture_log_density(double z, double inv_n, double s2, double lambda) {
  const double h = 0.5 * lambda;
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double k = gamma_rate_pdf(h, h, u);
    if (k == 0.0 || !std::isfinite(k)) return 0.0;
    const double v = inv_n + s2 / u;
    return std::exp(-0.5 * z * z / v - kLogSqrt2Pi) / std::sqrt(v) * k;
  };
  return std::log(integrate_adaptive(f, 0.0, std::numeric_limits<double>::infinity(), 1e-12));
}

double student_t_log_pdf(double z, double lambda) {
  return std::lgamma(0.5 * (lambda + 1.0)) - std::lgamma(0.5 * lambda) - 0.5 * std::log(lambda * M_PI) -
         0.5 * (lambda + 1.0) * std::log1p(z * z / lambda);
}

UnivariatePredictive location_predictive(const LocationNormal& m, const PriorSpec& prior) {
  const double inv_n = m.asymptotic ? 0.0 : 1.0 / double(m.n);
  UnivariatePredictive::Spec spec;
  spec.symmetric = true;
  if (auto* p = std::get_if<NormalPrior>(&prior)) {
    const double mu = p->mean[0];
    const double s = std::sqrt(scalar_of(p->cov) + inv_n);
    spec.turning = mu;
    spec.scale = s;
    spec.cdf = [=](double x) { return normal_cdf((x - mu) / s); };
    spec.sf = [=](double x) { return normal_sf((x - mu) / s); };
    spec.log_density = [=](double x) {
      const double z = (x - mu) / s;
      return -0.5 * z * z - kLogSqrt2Pi - std::log(s);
    };
    return UnivariatePredictive(spec);
  }
  const auto& p = std::get<StudentTPrior>(prior);
  const double mu = p.location[0], s2 = scalar_of(p.scale), lambda = p.dof;
  spec.turning = mu;
  spec.scale = std::sqrt(s2 + inv_n);
  if (m.asymptotic) {
    const double s = std::sqrt(s2);
    spec.cdf = [=](double x) { return student_t_cdf(lambda, (x - mu) / s); };
    spec.sf = [=](double x) { return student_t_sf(lambda, (x - mu) / s); };
    spec.log_density = [=](double x) { return student_t_log_pdf((x - mu) / s, lambda) - std::log(s); };
    return UnivariatePredictive(spec);
  }
  spec.cdf = [=](double x) {
    return x < mu ? t_mixture_tail(mu - x, inv_n, s2, lambda) : 1.0 - t_mixture_tail(x - mu, inv_n, s2, lambda);
  };
  spec.sf = [=](double x) {
    return x > mu ? t_mixture_tail(x - mu, inv_n, s2, lambda) : 1.0 - t_mixture_tail(mu - x, inv_n, s2, lambda);
  };
  spec.log_density = [=](double x) { return t_mixture_log_density(x - mu, inv_n, s2, lambda); };
  return UnivariatePredictive(spec);
}

UnivariatePredictive scale_predictive(const ScaleNormal& m, const GammaRatePrior& p) {
  const double a = p.shape, b = p.rate;
  UnivariatePredictive::Spec spec;
  spec.lo = 0.0;
  spec.hi = std::numeric_limits<double>::infinity();
  if (m.asymptotic) {
    // T -> sigma^2 = 1/precision: inverse gamma, times the volume factor 2 sqrt(t).
    spec.shape = UnivariatePredictive::Shape::Unimodal;
    spec.turning = b / (a + 0.5);
    spec.scale = spec.turning;
    spec.cdf = [=](double t) { return reg_inc_gamma_upper(a, b / t); };
    spec.sf = [=](double t) { return reg_inc_gamma(a, b / t); };
    const double c = a * std::log(b) - std::lgamma(a) + std::log(2.0);
    spec.log_density = [=](double t) { return c - (a + 0.5) * std::log(t) - b / t; };
    return UnivariatePredictive(spec);
  }
  const double n = double(m.n), h = 0.5 * n;
  // a T / b follows F(n, 2a).
  spec.cdf = [=](double t) { return f_cdf(n, 2.0 * a, a * t / b); };
  spec.sf = [=](double t) { return f_sf(n, 2.0 * a, a * t / b); };
  const double c = h * std::log(h) + a * std::log(b) + std::lgamma(h + a) - std::lgamma(h) - std::lgamma(a);
  spec.log_density = [=](double t) {
    return c + (h - 1.0) * std::log(t) - (h + a) * std::log(b + h * t) + 0.5 * std::log(4.0 * t / n);
  };
  if (m.n == 1) {
    spec.shape = UnivariatePredictive::Shape::Decreasing;
    spec.turning = 0.0;
    spec.scale = b / a;
  } else {
    spec.shape = UnivariatePredictive::Shape::Unimodal;
    spec.turning = (n - 1.0) * b / (n * (a + 0.5));
    spec.scale = spec.turning;
  }
  return UnivariatePredictive(spec);
}

UnivariatePredictive beta_density_predictive(const BetaPrior& p) {
  const double a = p.alpha, b = p.beta;
  using Shape = UnivariatePredictive::Shape;
  UnivariatePredictive::Spec spec;
  spec.lo = 0.0;
  spec.hi = 1.0;
  spec.scale = 0.25;
  spec.cdf = [=](double x) { return beta_cdf(a, b, x); };
  spec.sf = [=](double x) { return beta_sf(a, b, x); };
  const double c = -ln_beta(a, b);
  spec.log_density = [=](double x) {
    double v = c;
    if (a != 1.0) v += (a - 1.0) * std::log(x);
    if (b != 1.0) v += (b - 1.0) * std::log1p(-x);
    return v;
  };
  if (a == 1.0 && b == 1.0) {
    spec.shape = Shape::Flat;
  } else if (a > 1.0 && b > 1.0) {
    spec.shape = Shape::Unimodal;
    spec.turning = (a - 1.0) / (a + b - 2.0);
    spec.symmetric = a == b;
  } else if (a < 1.0 && b < 1.0) {
    spec.shape = Shape::Antimodal;
    spec.turning = (1.0 - a) / (2.0 - a - b);
    spec.symmetric = a == b;
  } else if (a <= 1.0 && b >= 1.0) {
    spec.shape = Shape::Decreasing;
  } else {
    spec.shape = Shape::Increasing;
  }
  return UnivariatePredictive(spec);
}

// Cholesky factor of a PD matrix.
Eigen::MatrixXd chol(const Eigen::MatrixXd& v) {
  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success) throw DomainError("matrix is not positive definite");
  return llt.matrixL();
}

double quad_form(const Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::VectorXd& d) {
  const Eigen::VectorXd w = llt.matrixL().solve(d);
  return w.squaredNorm();
}

double log_det(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

Eigen::VectorXd standard_normal_vector(Rng& rng, int k) {
  Eigen::VectorXd z(k);
  for (int i = 0; i < k; ++i) z[i] = rng.normal();
  return z;
}

ConflictReport discrete_report(const Eigen::VectorXd& pmf, std::int64_t index) {
  PmfLadder ladder(pmf);
  ConflictReport r;
  r.pvalue = ladder.pvalue(index);
  r.density_at_t0 = pmf[index];
  r.method = Method::Enumeration;
  return r;
}

Method univariate_method(const SamplingModel& model, const PriorSpec& prior) {
  if (auto* m = std::get_if<LocationNormal>(&model))
    if (!m->asymptotic && std::holds_alternative<StudentTPrior>(prior)) return Method::Quadrature;
  return Method::ClosedForm;
}

// Monte Carlo P-value: fraction of predictive draws that land in the tail
// {t : m*(t) <= m*(t0)}.
ConflictReport monte_carlo_pvalue(const SamplingModel& model, const PriorSpec& prior,
                                  const std::function<bool(const SufficientStat&)>& in_tail,
                                  double density_t0, const ConflictOptions& opts) {
  Rng rng(opts.seed);
  std::size_t hits = 0;
  const std::size_t n = opts.mc_samples;
  if (n == 0) throw DomainError("Monte Carlo needs at least one sample");
  for (std::size_t i = 0; i < n; ++i)
    if (in_tail(sample_statistic(model, prior, rng))) ++hits;
  ConflictReport r;
  r.pvalue = double(hits) / double(n);
  r.density_at_t0 = density_t0;
  r.method = Method::MonteCarlo;
  r.mc_samples = n;
  r.seed = opts.seed;
  r.mc_stderr = std::sqrt(r.pvalue * (1.0 - r.pvalue) / double(n));
  return r;
}

}  // namespace

std::string method_name(Method m) {
  switch (m) {
    case Method::Auto: return "auto";
    case Method::ClosedForm: return "closed-form";
    case Method::Enumeration: return "enumeration";
    case Method::Quadrature: return "quadrature";
    case Method::MonteCarlo: return "monte-carlo";
  }
  return "unknown";
}

Method parse_method(const std::string& name) {
  if (name == "auto") return Method::Auto;
  if (name == "closed" || name == "closed-form") return Method::ClosedForm;
  if (name == "enum" || name == "enumeration") return Method::Enumeration;
  if (name == "quad" || name == "quadrature") return Method::Quadrature;
  if (name == "mc" || name == "monte-carlo") return Method::MonteCarlo;
  throw DomainError("unknown method '" + name + "' (expected auto, enum, quad or mc)");
}

PredictiveKind predictive_kind(const SamplingModel& model) {
  return std::visit(overloaded{[](const LocationNormal& m) {
                                 return m.dim == 1 ? PredictiveKind::Univariate : PredictiveKind::Multivariate;
                               },
                               [](const ScaleNormal&) { return PredictiveKind::Univariate; },
                               [](const Binomial& m) {
                                 return m.asymptotic ? PredictiveKind::Univariate : PredictiveKind::Discrete;
                               },
                               [](const Logistic&) { return PredictiveKind::Discrete; },
                               [](const ShiftedMultinomial&) { return PredictiveKind::Discrete; }},
                    model);
}

// -- lattices ---------------------------------------------------------------------

MultinomialLattice::MultinomialLattice(long n) : n_(n) {
  if (n < 0) throw DomainError("multinomial lattice: n must be nonnegative");
  const std::size_t side = std::size_t(n + 1);
  lookup_.assign(side * side * side, -1);
  for (long a = 0; a <= n; ++a)
    for (long b = 0; a + b <= n; ++b)
      for (long c = 0; a + b + c <= n; ++c) {
        lookup_[(std::size_t(a) * side + std::size_t(b)) * side + std::size_t(c)] = std::int64_t(points_.size());
        points_.push_back({a, b, c, n - a - b - c});
      }
}

std::int64_t MultinomialLattice::index(const std::vector<long>& f) const {
  if (f.size() != 4 || f[0] < 0 || f[1] < 0 || f[2] < 0 || f[3] < 0 || f[0] + f[1] + f[2] + f[3] != n_)
    throw RangeError("multinomial counts must be 4 nonnegative values summing to n");
  const std::size_t side = std::size_t(n_ + 1);
  return lookup_[(std::size_t(f[0]) * side + std::size_t(f[1])) * side + std::size_t(f[2])];
}

ConditionalLattice::ConditionalLattice(AncillaryKind kind, std::array<long, 2> value)
    : kind_(kind), value_(value) {
  if (value[0] < 0 || value[1] < 0) throw RangeError("ancillary values must be nonnegative");
}

std::array<long, 2> ConditionalLattice::free_coordinates(std::int64_t index) const {
  if (index < 0 || index >= size()) throw RangeError("conditional lattice index out of range");
  return {long(index / (value_[1] + 1)), long(index % (value_[1] + 1))};
}

std::vector<long> ConditionalLattice::counts(std::int64_t index) const {
  const auto [a, b] = free_coordinates(index);
  if (kind_ == AncillaryKind::U1) return {a, value_[0] - a, b, value_[1] - b};
  return {a, b, value_[1] - b, value_[0] - a};
}

std::int64_t ConditionalLattice::index(const std::vector<long>& f) const {
  if (ancillary_value(f, kind_) != value_)
    throw RangeError("counts are inconsistent with the conditioning ancillary value");
  const long a = f[0];
  const long b = kind_ == AncillaryKind::U1 ? f[2] : f[1];
  return std::int64_t(a) * (value_[1] + 1) + b;
}

std::int64_t lattice_size(const SamplingModel& model) {
  return std::visit(
      overloaded{[](const Binomial& m) -> std::int64_t { return m.n + 1; },
                 [](const Logistic& m) -> std::int64_t { return MixedRadix(m.group_sizes).size(); },
                 [](const ShiftedMultinomial& m) -> std::int64_t {
                   const std::int64_t n = m.n;
                   return (n + 1) * (n + 2) * (n + 3) / 6;
                 },
                 [&](const auto&) -> std::int64_t {
                   throw DomainError("model '" + model_name(model) + "' has no finite lattice");
                 }},
      model);
}

std::int64_t lattice_index(const SamplingModel& model, const SufficientStat& t) {
  validate_stat(model, t);
  return std::visit(overloaded{[&](const Binomial&) -> std::int64_t { return t.integer_counts()[0]; },
                               [&](const Logistic& m) -> std::int64_t {
                                 return MixedRadix(m.group_sizes).index(t.integer_counts());
                               },
                               [&](const ShiftedMultinomial& m) -> std::int64_t {
                                 return MultinomialLattice(m.n).index(t.integer_counts());
                               },
                               [&](const auto&) -> std::int64_t {
                                 throw DomainError("model '" + model_name(model) + "' has no finite lattice");
                               }},
                    model);
}

SufficientStat lattice_point(const SamplingModel& model, std::int64_t index) {
  return std::visit(overloaded{[&](const Binomial& m) {
                                 if (index < 0 || index > m.n) throw RangeError("binomial index out of range");
                                 return SufficientStat::counts({long(index)});
                               },
                               [&](const Logistic& m) {
                                 return SufficientStat::counts(MixedRadix(m.group_sizes).digits(index));
                               },
                               [&](const ShiftedMultinomial& m) {
                                 MultinomialLattice lat(m.n);
                                 if (index < 0 || index >= lat.size()) throw RangeError("lattice index out of range");
                                 const auto& f = lat.point(index);
                                 return SufficientStat::counts({f[0], f[1], f[2], f[3]});
                               },
                               [&](const auto&) -> SufficientStat {
                                 throw DomainError("model '" + model_name(model) + "' has no finite lattice");
                               }},
                    model);
}

// -- discrete predictives ---------------------------------------------------------------

Eigen::VectorXd binomial_predictive_pmf(long n, const BetaPrior& prior) {
  beta_prior(prior.alpha, prior.beta);
  const double a = prior.alpha, b = prior.beta;
  const double lb = ln_beta(a, b);
  Eigen::VectorXd pmf(n + 1);
  for (long t = 0; t <= n; ++t)
    pmf[t] = std::exp(ln_choose(n, t) + ln_beta(double(t) + a, double(n - t) + b) - lb);
  return pmf;
}

void logistic_component_nodes(const ScalarPrior& component, const LogisticRule& rule,
                              std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.clear();
  weights.clear();
  if (auto* p = std::get_if<NormalPrior>(&component)) {
    const double mu = p->mean[0], sd = std::sqrt(scalar_of(p->cov));
    const double h = std::min(rule.normal_max_step, sd / rule.normal_steps_per_sd);
    const long half = long(std::ceil(rule.normal_span * sd / h));
    double total = 0.0;
    for (long j = -half; j <= half; ++j) {
      const double z = double(j) * h / sd;
      nodes.push_back(mu + double(j) * h);
      weights.push_back(std::exp(-0.5 * z * z));
      total += weights.back();
    }
    for (double& w : weights) w /= total;
    return;
  }
  const auto& p = std::get<StudentTPrior>(component);
  const double mu = p.location[0], s = std::sqrt(scalar_of(p.scale));
  const int n = rule.t_nodes + (rule.t_nodes % 2);
  if (n < 2) throw DomainError("logistic rule needs at least two t nodes");
  nodes.resize(std::size_t(n));
  weights.assign(std::size_t(n), 1.0 / double(n));
  // Midpoints (j + 1/2)/n; the upper half mirrors the lower half exactly.
  for (int j = 0; j < n / 2; ++j) {
    const double q = student_t_quantile(p.dof, (double(j) + 0.5) / double(n));
    nodes[std::size_t(j)] = mu + s * q;
    nodes[std::size_t(n - 1 - j)] = mu - s * q;
  }
}

Eigen::VectorXd logistic_predictive_pmf(const Logistic& model, const ProductPrior& prior,
                                        const LogisticRule& rule) {
  validate(model, prior);
  const int q = model.groups();
  const int dims = model.slopes() + 1;
  std::vector<std::vector<double>> nodes(static_cast<std::size_t>(dims)), weights(static_cast<std::size_t>(dims));
  for (int d = 0; d < dims; ++d)
    logistic_component_nodes(prior.components[std::size_t(d)], rule, nodes[std::size_t(d)],
                             weights[std::size_t(d)]);

  MixedRadix lattice(model.group_sizes);
  std::vector<std::vector<double>> lchoose(static_cast<std::size_t>(q));
  for (int i = 0; i < q; ++i)
    for (int t = 0; t <= model.group_sizes[std::size_t(i)]; ++t)
      lchoose[std::size_t(i)].push_back(ln_choose(model.group_sizes[std::size_t(i)], t));

  Eigen::VectorXd pmf = Eigen::VectorXd::Zero(lattice.size());
  std::vector<double> cur, next;
  std::vector<std::vector<double>> group_pmf(static_cast<std::size_t>(q));
  std::vector<std::size_t> idx(static_cast<std::size_t>(dims), 0);
  Eigen::VectorXd eta(q);

  // Odometer over the tensor grid of coefficient nodes.
  for (;;) {
    double w = 1.0;
    for (int d = 0; d < dims; ++d) w *= weights[std::size_t(d)][idx[std::size_t(d)]];
    if (w > 0.0) {
      for (int i = 0; i < q; ++i) {
        double e = nodes[0][idx[0]];
        for (int d = 1; d < dims; ++d) e += nodes[std::size_t(d)][idx[std::size_t(d)]] * model.predictors(i, d - 1);
        eta[i] = e;
      }
      for (int i = 0; i < q; ++i) {
        const int ni = model.group_sizes[std::size_t(i)];
        const double lp = log_sigmoid(eta[i]), lq = log_sigmoid(-eta[i]);
        auto& g = group_pmf[std::size_t(i)];
        g.resize(std::size_t(ni + 1));
        for (int t = 0; t <= ni; ++t)
          g[std::size_t(t)] = std::exp(lchoose[std::size_t(i)][std::size_t(t)] + t * lp + (ni - t) * lq);
      }
      // Kronecker product of the group pmfs, first group slowest.
      cur.assign(1, w);
      for (int i = 0; i < q; ++i) {
        const auto& g = group_pmf[std::size_t(i)];
        next.resize(cur.size() * g.size());
        std::size_t k = 0;
        for (double c : cur)
          for (double gv : g) next[k++] = c * gv;
        cur.swap(next);
      }
      for (std::size_t k = 0; k < cur.size(); ++k) pmf[Eigen::Index(k)] += cur[k];
    }
    int d = dims - 1;
    while (d >= 0) {
      if (++idx[std::size_t(d)] < nodes[std::size_t(d)].size()) break;
      idx[std::size_t(d)] = 0;
      --d;
    }
    if (d < 0) break;
  }
  return pmf;
}

Eigen::VectorXd multinomial_predictive_pmf(long n, const BetaPrior& prior) {
  beta_prior(prior.alpha, prior.beta);
  MultinomialLattice lattice(n);
  // The integrand is a polynomial of degree n in B, so this rule is exact.
  const QuadratureRule rule = beta_weight_rule(prior.alpha, prior.beta, int(n / 2) + 2);
  Eigen::VectorXd pmf = Eigen::VectorXd::Zero(lattice.size());
  const double lfact_n = std::lgamma(double(n) + 1.0);
  for (Eigen::Index r = 0; r < rule.size(); ++r) {
    const double B = rule.nodes[r];
    const double lp[4] = {std::log((1.0 - B) / 3.0), std::log(B / 3.0), std::log((3.0 - 2.0 * B) / 6.0),
                          std::log((1.0 + 2.0 * B) / 6.0)};
    for (std::int64_t i = 0; i < lattice.size(); ++i) {
      const auto& f = lattice.point(i);
      double l = lfact_n;
      for (int c = 0; c < 4; ++c) l += double(f[std::size_t(c)]) * lp[c] - std::lgamma(double(f[std::size_t(c)]) + 1.0);
      pmf[i] += rule.weights[r] * std::exp(l);
    }
  }
  return pmf;
}

Eigen::VectorXd conditional_predictive_pmf(const ConditionalLattice& lattice, const BetaPrior& prior) {
  beta_prior(prior.alpha, prior.beta);
  const long m1 = lattice.value()[0], m2 = lattice.value()[1];
  const QuadratureRule rule = beta_weight_rule(prior.alpha, prior.beta, int((m1 + m2) / 2) + 2);
  Eigen::VectorXd pmf = Eigen::VectorXd::Zero(lattice.size());
  for (Eigen::Index r = 0; r < rule.size(); ++r) {
    const double B = rule.nodes[r];
    // Success probabilities of the two free coordinates.
    const double pa = lattice.kind() == AncillaryKind::U1 ? 1.0 - B : 2.0 * (1.0 - B) / 3.0;
    const double pb = lattice.kind() == AncillaryKind::U1 ? (3.0 - 2.0 * B) / 4.0 : 2.0 * B / 3.0;
    for (long a = 0; a <= m1; ++a) {
      const double la = ln_choose(m1, a) + double(a) * std::log(pa) + double(m1 - a) * std::log1p(-pa);
      for (long b = 0; b <= m2; ++b) {
        const double lb = ln_choose(m2, b) + double(b) * std::log(pb) + double(m2 - b) * std::log1p(-pb);
        pmf[Eigen::Index(a * (m2 + 1) + b)] += rule.weights[r] * std::exp(la + lb);
      }
    }
  }
  return pmf;
}

Eigen::VectorXd discrete_predictive_pmf(const SamplingModel& model, const PriorSpec& prior,
                                        const ConflictOptions& opts) {
  validate(model, prior);
  return std::visit(overloaded{[&](const Binomial& m) {
                                 if (m.asymptotic) throw DomainError("asymptotic binomial has no lattice");
                                 return binomial_predictive_pmf(m.n, std::get<BetaPrior>(prior));
                               },
                               [&](const Logistic& m) {
                                 return logistic_predictive_pmf(m, std::get<ProductPrior>(prior), opts.logistic);
                               },
                               [&](const ShiftedMultinomial& m) {
                                 return multinomial_predictive_pmf(m.n, std::get<BetaPrior>(prior));
                               },
                               [&](const auto&) -> Eigen::VectorXd {
                                 throw DomainError("model '" + model_name(model) + "' is not discrete");
                               }},
                    model);
}

// -- continuous predictives ---------------------------------------------------------------

UnivariatePredictive univariate_predictive(const SamplingModel& model, const PriorSpec& prior) {
  validate(model, prior);
  return std::visit(overloaded{[&](const LocationNormal& m) {
                                 if (m.dim != 1) throw DomainError("univariate predictive needs dimension 1");
                                 return location_predictive(m, prior);
                               },
                               [&](const ScaleNormal& m) {
                                 return scale_predictive(m, std::get<GammaRatePrior>(prior));
                               },
                               [&](const Binomial& m) {
                                 if (!m.asymptotic) throw DomainError("finite-n binomial is discrete");
                                 return beta_density_predictive(std::get<BetaPrior>(prior));
                               },
                               [&](const auto&) -> UnivariatePredictive {
                                 throw DomainError("model '" + model_name(model) + "' is not univariate continuous");
                               }},
                    model);
}

MultivariatePredictive multivariate_predictive(const SamplingModel& model, const PriorSpec& prior) {
  validate(model, prior);
  const auto* m = std::get_if<LocationNormal>(&model);
  if (!m) throw DomainError("multivariate predictive needs a location-normal model");
  const int k = m->dim;
  const double inv_n = m->asymptotic ? 0.0 : 1.0 / double(m->n);
  MultivariatePredictive::Spec spec;
  spec.dim = k;
  if (auto* p = std::get_if<NormalPrior>(&prior)) {
    const Eigen::MatrixXd v = p->cov + inv_n * Eigen::MatrixXd::Identity(k, k);
    const Eigen::LLT<Eigen::MatrixXd> llt(v);
    const Eigen::MatrixXd L = chol(v);
    const Eigen::VectorXd mu = p->mean;
    const double c = -0.5 * log_det(llt) - k * kLogSqrt2Pi;
    spec.sample = [=](Rng& rng) { return Eigen::VectorXd(mu + L * standard_normal_vector(rng, k)); };
    spec.log_density = [=](const Eigen::VectorXd& t) { return c - 0.5 * quad_form(llt, t - mu); };
    spec.pvalue = [=](const Eigen::VectorXd& t) { return chisq_sf(k, quad_form(llt, t - mu)); };
    return MultivariatePredictive(spec);
  }
  const auto& p = std::get<StudentTPrior>(prior);
  const Eigen::VectorXd mu = p.location;
  const double lambda = p.dof;
  const Eigen::MatrixXd L = chol(p.scale);
  const Eigen::LLT<Eigen::MatrixXd> llt(p.scale);
  spec.sample = [=](Rng& rng) {
    const double u = rng.gamma(0.5 * lambda, 0.5 * lambda);
    Eigen::VectorXd t = mu + L * standard_normal_vector(rng, k) / std::sqrt(u);
    if (inv_n > 0.0) t += std::sqrt(inv_n) * standard_normal_vector(rng, k);
    return t;
  };
  if (inv_n == 0.0) {
    const double c = std::lgamma(0.5 * (lambda + k)) - std::lgamma(0.5 * lambda) - 0.5 * k * std::log(lambda * M_PI) -
                     0.5 * log_det(llt);
    spec.log_density = [=](const Eigen::VectorXd& t) {
      return c - 0.5 * (lambda + k) * std::log1p(quad_form(llt, t - mu) / lambda);
    };
    spec.pvalue = [=](const Eigen::VectorXd& t) { return f_sf(k, lambda, quad_form(llt, t - mu) / k); };
    return MultivariatePredictive(spec);
  }
  // Finite n: rotate to the eigenbasis of the scale matrix, then integrate the
  // product of independent normal densities against the gamma mixing law.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(p.scale);
  const Eigen::MatrixXd V = es.eigenvectors();
  const Eigen::VectorXd d = es.eigenvalues();
  const QuadratureRule rule = gamma_weight_rule(0.5 * lambda, 0.5 * lambda, 200, 0.5 * k);
  spec.log_density = [=](const Eigen::VectorXd& t) {
    const Eigen::VectorXd y = V.transpose() * (t - mu);
    const double dens = rule.integrate([&](double u) {
      double l = -k * kLogSqrt2Pi;
      for (int j = 0; j < k; ++j) {
        const double denom = u * inv_n + d[j];
        l += -0.5 * std::log(denom) - 0.5 * y[j] * y[j] * u / denom;
      }
      return std::exp(l);
    });
    return std::log(dens);
  };
  return MultivariatePredictive(spec);
}

SufficientStat sample_statistic(const SamplingModel& model, const PriorSpec& prior, Rng& rng) {
  return std::visit(
      overloaded{
          [&](const LocationNormal& m) {
            Eigen::VectorXd theta;
            if (auto* p = std::get_if<NormalPrior>(&prior)) {
              theta = p->mean + chol(p->cov) * standard_normal_vector(rng, m.dim);
            } else {
              const auto& q = std::get<StudentTPrior>(prior);
              const double u = rng.gamma(0.5 * q.dof, 0.5 * q.dof);
              theta = q.location + chol(q.scale) * standard_normal_vector(rng, m.dim) / std::sqrt(u);
            }
            if (!m.asymptotic) theta += standard_normal_vector(rng, m.dim) / std::sqrt(double(m.n));
            return SufficientStat::real(theta);
          },
          [&](const ScaleNormal& m) {
            const auto& p = std::get<GammaRatePrior>(prior);
            const double precision = rng.gamma(p.shape, p.rate);
            if (m.asymptotic) return SufficientStat::real(1.0 / precision);
            const double chi2 = rng.gamma(0.5 * double(m.n), 0.5);
            return SufficientStat::real(chi2 / (double(m.n) * precision));
          },
          [&](const Binomial& m) {
            const auto& p = std::get<BetaPrior>(prior);
            const double theta = rng.beta(p.alpha, p.beta);
            if (m.asymptotic) return SufficientStat::real(theta);
            return SufficientStat::counts({rng.binomial(m.n, theta)});
          },
          [&](const Logistic& m) {
            const auto& p = std::get<ProductPrior>(prior);
            std::vector<double> beta;
            for (const auto& c : p.components) {
              if (auto* np = std::get_if<NormalPrior>(&c))
                beta.push_back(np->mean[0] + std::sqrt(scalar_of(np->cov)) * rng.normal());
              else {
                const auto& tp = std::get<StudentTPrior>(c);
                const double u = rng.gamma(0.5 * tp.dof, 0.5 * tp.dof);
                beta.push_back(tp.location[0] + std::sqrt(scalar_of(tp.scale)) * rng.normal() / std::sqrt(u));
              }
            }
            std::vector<long> counts;
            for (int i = 0; i < m.groups(); ++i) {
              double eta = beta[0];
              for (int j = 0; j < m.slopes(); ++j) eta += beta[std::size_t(j) + 1] * m.predictors(i, j);
              counts.push_back(rng.binomial(m.group_sizes[std::size_t(i)], std::exp(log_sigmoid(eta))));
            }
            return SufficientStat::counts(counts);
          },
          [&](const ShiftedMultinomial& m) {
            const auto& p = std::get<BetaPrior>(prior);
            const double B = rng.beta(p.alpha, p.beta);
            const double cell[4] = {(1.0 - B) / 3.0, B / 3.0, (3.0 - 2.0 * B) / 6.0, (1.0 + 2.0 * B) / 6.0};
            std::vector<long> f(4, 0);
            long remaining = m.n;
            double mass_left = 1.0;
            for (int c = 0; c < 3; ++c) {
              const double pc = std::min(1.0, std::max(0.0, cell[c] / mass_left));
              f[std::size_t(c)] = rng.binomial(remaining, pc);
              remaining -= f[std::size_t(c)];
              mass_left -= cell[c];
            }
            f[3] = remaining;
            return SufficientStat::counts(f);
          }},
      model);
}

// -- public densities and P-values -----------------------------------------------------------

double predictive_density(const SamplingModel& model, const PriorSpec& prior, const SufficientStat& t,
                          const ConflictOptions& opts) {
  return adjusted_density(model, prior, t, opts) / volume_factor(model, t);
}

double adjusted_density(const SamplingModel& model, const PriorSpec& prior, const SufficientStat& t,
                        const ConflictOptions& opts) {
  validate(model, prior);
  validate_stat(model, t);
  switch (predictive_kind(model)) {
    case PredictiveKind::Discrete: {
      if (auto* m = std::get_if<Binomial>(&model)) {
        const auto& p = std::get<BetaPrior>(prior);
        const long n = m->n, k = t.integer_counts()[0];
        return std::exp(ln_choose(n, k) + ln_beta(double(k) + p.alpha, double(n - k) + p.beta) -
                        ln_beta(p.alpha, p.beta));
      }
      return discrete_predictive_pmf(model, prior, opts)[lattice_index(model, t)];
    }
    case PredictiveKind::Univariate:
      return std::exp(univariate_predictive(model, prior).log_density(t.reals()[0]));
    case PredictiveKind::Multivariate:
      return std::exp(multivariate_predictive(model, prior).log_density(t.reals()));
  }
  return 0.0;
}

ConflictReport conflict_pvalue(const SamplingModel& model, const PriorSpec& prior, const SufficientStat& t0,
                               const ConflictOptions& opts) {
  validate(model, prior);
  validate_stat(model, t0);
  const Method req = opts.method;
  switch (predictive_kind(model)) {
    case PredictiveKind::Discrete: {
      const Eigen::VectorXd pmf = discrete_predictive_pmf(model, prior, opts);
      const std::int64_t i0 = lattice_index(model, t0);
      if (req == Method::Auto || req == Method::Enumeration) return discrete_report(pmf, i0);
      if (req != Method::MonteCarlo) bad_method(req, model_name(model));
      auto tail = [&](const SufficientStat& t) { return leq_tied(pmf[lattice_index(model, t)], pmf[i0]); };
      return monte_carlo_pvalue(model, prior, tail, pmf[i0], opts);
    }
    case PredictiveKind::Univariate: {
      const UnivariatePredictive pred = univariate_predictive(model, prior);
      const double x0 = t0.reals()[0];
      if (req == Method::MonteCarlo) {
        // The level set is a union of intervals, so membership avoids a density call per draw.
        const Region region = pred.level_region(x0);
        auto tail = [&](const SufficientStat& t) {
          const double x = t.reals()[0];
          return std::any_of(region.begin(), region.end(),
                             [&](const Interval& iv) { return iv.lo <= x && x <= iv.hi; });
        };
        return monte_carlo_pvalue(model, prior, tail, std::exp(pred.log_density(x0)), opts);
      }
      if (req == Method::Enumeration) bad_method(req, model_name(model));
      ConflictReport r;
      r.pvalue = pred.pvalue(x0);
      r.density_at_t0 = std::exp(pred.log_density(x0));
      r.method = univariate_method(model, prior);
      return r;
    }
    case PredictiveKind::Multivariate: {
      const MultivariatePredictive pred = multivariate_predictive(model, prior);
      const Eigen::VectorXd& x0 = t0.reals();
      if (pred.has_closed_form_pvalue() && req != Method::MonteCarlo) {
        if (req == Method::Enumeration) bad_method(req, model_name(model));
        ConflictReport r;
        r.pvalue = pred.pvalue(x0);
        r.density_at_t0 = std::exp(pred.log_density(x0));
        r.method = Method::ClosedForm;
        return r;
      }
      if (req != Method::Auto && req != Method::MonteCarlo) bad_method(req, model_name(model));
      const double l0 = pred.log_density(x0);
      auto tail = [&](const SufficientStat& t) { return pred.log_density(t.reals()) <= l0; };
      return monte_carlo_pvalue(model, prior, tail, std::exp(l0), opts);
    }
  }
  throw DomainError("unreachable");
}

ConflictReport conditional_conflict_pvalue(const SamplingModel& model, const PriorSpec& prior,
                                           const SufficientStat& t0, AncillaryKind which,
                                           const ConflictOptions& opts) {
  if (!std::holds_alternative<ShiftedMultinomial>(model))
    throw UnsupportedPair("conditional checks are implemented for the shifted multinomial only");
  validate(model, prior);
  validate_stat(model, t0);
  if (opts.method != Method::Auto && opts.method != Method::Enumeration) bad_method(opts.method, model_name(model));
  const auto& f = t0.integer_counts();
  ConditionalLattice lattice(which, ancillary_value(f, which));
  const Eigen::VectorXd pmf = conditional_predictive_pmf(lattice, std::get<BetaPrior>(prior));
  const std::int64_t i0 = lattice.index(f);
  ConflictReport r = discrete_report(pmf, i0);

  // Each free coordinate checked against its own conditional marginal.
  const long m1 = lattice.value()[0], m2 = lattice.value()[1];
  Eigen::VectorXd first = Eigen::VectorXd::Zero(m1 + 1), second = Eigen::VectorXd::Zero(m2 + 1);
  for (long a = 0; a <= m1; ++a)
    for (long b = 0; b <= m2; ++b) {
      first[a] += pmf[a * (m2 + 1) + b];
      second[b] += pmf[a * (m2 + 1) + b];
    }
  const auto coords = lattice.free_coordinates(i0);
  r.component_pvalues = {PmfLadder(first).pvalue(coords[0]), PmfLadder(second).pvalue(coords[1])};
  return r;
}

AncillaryReport multiple_ancillary_check(const SamplingModel& model, const PriorSpec& prior,
                                         const SufficientStat& t0, const ConflictOptions& opts) {
  return {conditional_conflict_pvalue(model, prior, t0, AncillaryKind::U1, opts),
          conditional_conflict_pvalue(model, prior, t0, AncillaryKind::U2, opts)};
}

}  // namespace priorinfo
