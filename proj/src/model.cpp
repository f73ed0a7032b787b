#include "priorinfo/model.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "overloaded.hpp"

namespace priorinfo {

namespace {

using detail::overloaded;

void check(bool ok, const std::string& msg) {
  if (!ok) throw DomainError(msg);
}

void check_positive(double v, const std::string& what) {
  check(v > 0.0 && std::isfinite(v), what + " must be positive and finite");
}

void check_matrix(const Eigen::VectorXd& loc, const Eigen::MatrixXd& m, const std::string& what) {
  check(loc.size() >= 1, what + ": dimension must be at least 1");
  check(m.rows() == loc.size() && m.cols() == loc.size(), what + ": matrix is not conformable");
  check(loc.allFinite() && m.allFinite(), what + ": entries must be finite");
  check(is_positive_definite(m), what + ": matrix must be symmetric positive definite");
}

void check_scalar_component(const ScalarPrior& c) {
  std::visit(overloaded{[](const NormalPrior& p) {
                          check_matrix(p.mean, p.cov, "normal prior");
                          check(p.dim() == 1, "product prior components must be one-dimensional");
                        },
                        [](const StudentTPrior& p) {
                          check_matrix(p.location, p.scale, "student-t prior");
                          check_positive(p.dof, "student-t degrees of freedom");
                          check(p.dim() == 1, "product prior components must be one-dimensional");
                        }},
             c);
}

}  // namespace

bool is_positive_definite(const Eigen::MatrixXd& m, double rel_tol) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  const double scale = m.cwiseAbs().maxCoeff();
  if (!((m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale)) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return hi > 0.0 && lo > rel_tol * hi;
}

NormalPrior normal_prior(double mean, double variance) {
  return normal_prior(Eigen::VectorXd::Constant(1, mean), Eigen::MatrixXd::Constant(1, 1, variance));
}

NormalPrior normal_prior(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov) {
  check_matrix(mean, cov, "normal prior");
  return NormalPrior{mean, cov};
}

StudentTPrior student_t_prior(double location, double scale_sq, double dof) {
  return student_t_prior(Eigen::VectorXd::Constant(1, location),
                         Eigen::MatrixXd::Constant(1, 1, scale_sq), dof);
}

StudentTPrior student_t_prior(const Eigen::VectorXd& location, const Eigen::MatrixXd& scale,
                              double dof) {
  check_matrix(location, scale, "student-t prior");
  check_positive(dof, "student-t degrees of freedom");
  return StudentTPrior{location, scale, dof};
}

GammaRatePrior gamma_rate_prior(double shape, double rate) {
  check_positive(shape, "gamma-rate shape");
  check_positive(rate, "gamma-rate rate");
  return GammaRatePrior{shape, rate};
}

BetaPrior beta_prior(double alpha, double beta) {
  check_positive(alpha, "beta alpha");
  check_positive(beta, "beta beta");
  return BetaPrior{alpha, beta};
}

ProductPrior product_prior(std::vector<ScalarPrior> components) {
  check(!components.empty(), "product prior needs at least one component");
  for (const auto& c : components) check_scalar_component(c);
  return ProductPrior{std::move(components)};
}

void validate_prior(const PriorSpec& prior) {
  std::visit(overloaded{[](const NormalPrior& p) { check_matrix(p.mean, p.cov, "normal prior"); },
                        [](const StudentTPrior& p) {
                          check_matrix(p.location, p.scale, "student-t prior");
                          check_positive(p.dof, "student-t degrees of freedom");
                        },
                        [](const GammaRatePrior& p) { gamma_rate_prior(p.shape, p.rate); },
                        [](const BetaPrior& p) { beta_prior(p.alpha, p.beta); },
                        [](const ProductPrior& p) { product_prior(p.components); }},
             prior);
}

void validate_model(const SamplingModel& model) {
  std::visit(overloaded{[](const LocationNormal& m) {
                          check(m.dim >= 1, "location-normal dimension must be >= 1");
                          check(m.n >= 1, "sample size n must be >= 1");
                        },
                        [](const ScaleNormal& m) { check(m.n >= 1, "sample size n must be >= 1"); },
                        [](const Binomial& m) { check(m.n >= 1, "sample size n must be >= 1"); },
                        [](const ShiftedMultinomial& m) {
                          check(m.n >= 1, "sample size n must be >= 1");
                        },
                        [](const Logistic& m) {
                          check(m.groups() >= 1 && m.slopes() >= 1,
                                "logistic design needs at least one group and one predictor");
                          check(int(m.group_sizes.size()) == m.groups(),
                                "logistic design: one group size per row required");
                          for (int s : m.group_sizes) check(s >= 1, "logistic group sizes must be >= 1");
                          check(m.predictors.allFinite(), "logistic predictors must be finite");
                          for (Eigen::Index i = 0; i < m.predictors.size(); ++i)
                            check(m.predictors.data()[i] != 0.0,
                                  "logistic design: centered predictors must be nonzero");
                        }},
             model);
}

std::string model_name(const SamplingModel& model) {
  return std::visit(overloaded{[](const LocationNormal&) { return std::string("location-normal"); },
                               [](const ScaleNormal&) { return std::string("scale-normal"); },
                               [](const Binomial&) { return std::string("binomial"); },
                               [](const Logistic&) { return std::string("logistic"); },
                               [](const ShiftedMultinomial&) {
                                 return std::string("shifted-multinomial");
                               }},
                    model);
}

std::string prior_name(const PriorSpec& prior) {
  return std::visit(overloaded{[](const NormalPrior&) { return std::string("normal"); },
                               [](const StudentTPrior&) { return std::string("student-t"); },
                               [](const GammaRatePrior&) { return std::string("gamma-rate"); },
                               [](const BetaPrior&) { return std::string("beta"); },
                               [](const ProductPrior&) { return std::string("product"); }},
                    prior);
}

void validate(const SamplingModel& model, const PriorSpec& prior) {
  validate_model(model);
  validate_prior(prior);
  const auto unsupported = [&] {
    throw UnsupportedPair("unsupported combination: model '" + model_name(model) + "' with prior '" +
                          prior_name(prior) + "'");
  };
  std::visit(overloaded{[&](const LocationNormal& m) {
                          int d = 0;
                          if (auto* p = std::get_if<NormalPrior>(&prior))
                            d = p->dim();
                          else if (auto* q = std::get_if<StudentTPrior>(&prior))
                            d = q->dim();
                          else
                            unsupported();
                          if (d != m.dim)
                            throw DomainError("prior dimension " + std::to_string(d) +
                                              " does not match model dimension " +
                                              std::to_string(m.dim));
                        },
                        [&](const ScaleNormal&) {
                          if (!std::holds_alternative<GammaRatePrior>(prior)) unsupported();
                        },
                        [&](const Binomial&) {
                          if (!std::holds_alternative<BetaPrior>(prior)) unsupported();
                        },
                        [&](const ShiftedMultinomial&) {
                          if (!std::holds_alternative<BetaPrior>(prior)) unsupported();
                        },
                        [&](const Logistic& m) {
                          auto* p = std::get_if<ProductPrior>(&prior);
                          if (!p) unsupported();
                          if (int(p->components.size()) != m.slopes() + 1)
                            throw DomainError("logistic prior needs " + std::to_string(m.slopes() + 1) +
                                              " components (intercept and slopes), got " +
                                              std::to_string(p->components.size()));
                        }},
             model);
}

// -- ancillaries ----------------------------------------------------------------

std::string ancillary_name(AncillaryKind kind) { return kind == AncillaryKind::U1 ? "U1" : "U2"; }

AncillaryKind parse_ancillary(const std::string& name) {
  if (name == "U1" || name == "u1") return AncillaryKind::U1;
  if (name == "U2" || name == "u2") return AncillaryKind::U2;
  throw DomainError("unknown ancillary '" + name + "' (expected U1 or U2)");
}

std::array<long, 2> ancillary_value(const std::vector<long>& f, AncillaryKind kind) {
  if (f.size() != 4) throw RangeError("multinomial counts must have 4 cells");
  if (kind == AncillaryKind::U1) return {f[0] + f[1], f[2] + f[3]};
  return {f[0] + f[3], f[1] + f[2]};
}

// -- sufficient statistics --------------------------------------------------------

SufficientStat SufficientStat::real(double t) { return real(Eigen::VectorXd::Constant(1, t)); }

SufficientStat SufficientStat::real(const Eigen::VectorXd& t) {
  SufficientStat s;
  s.value = t;
  return s;
}

SufficientStat SufficientStat::counts(std::vector<long> c) {
  SufficientStat s;
  s.value = std::move(c);
  return s;
}

const Eigen::VectorXd& SufficientStat::reals() const {
  if (auto* v = std::get_if<Eigen::VectorXd>(&value)) return *v;
  throw RangeError("sufficient statistic holds counts, a real vector was expected");
}

const std::vector<long>& SufficientStat::integer_counts() const {
  if (auto* v = std::get_if<std::vector<long>>(&value)) return *v;
  throw RangeError("sufficient statistic holds reals, integer counts were expected");
}

void validate_stat(const SamplingModel& model, const SufficientStat& t) {
  std::visit(
      overloaded{
          [&](const LocationNormal& m) {
            const auto& v = t.reals();
            if (v.size() != m.dim || !v.allFinite())
              throw RangeError("location statistic must be a finite vector of dimension " +
                               std::to_string(m.dim));
          },
          [&](const ScaleNormal&) {
            const auto& v = t.reals();
            if (v.size() != 1 || !(v[0] > 0.0) || !std::isfinite(v[0]))
              throw RangeError("scale statistic must be a single positive value");
          },
          [&](const Binomial& m) {
            if (m.asymptotic) {
              const auto& v = t.reals();
              if (v.size() != 1 || !(v[0] >= 0.0 && v[0] <= 1.0))
                throw RangeError("asymptotic binomial statistic is a proportion in [0,1]");
              return;
            }
            const auto& c = t.integer_counts();
            if (c.size() != 1 || c[0] < 0 || c[0] > m.n)
              throw RangeError("binomial count must lie in [0, " + std::to_string(m.n) + "]");
          },
          [&](const Logistic& m) {
            const auto& c = t.integer_counts();
            if (int(c.size()) != m.groups()) throw RangeError("logistic statistic needs one count per group");
            for (int i = 0; i < m.groups(); ++i)
              if (c[std::size_t(i)] < 0 || c[std::size_t(i)] > m.group_sizes[std::size_t(i)])
                throw RangeError("logistic count out of range in group " + std::to_string(i));
          },
          [&](const ShiftedMultinomial& m) {
            const auto& c = t.integer_counts();
            if (c.size() != 4) throw RangeError("multinomial statistic needs 4 counts");
            long total = 0;
            for (long f : c) {
              if (f < 0) throw RangeError("multinomial counts must be nonnegative");
              total += f;
            }
            if (total != m.n) throw RangeError("multinomial counts must sum to n");
            if (t.ancillary && ancillary_value(c, t.ancillary->kind) != t.ancillary->value)
              throw RangeError("ancillary value is inconsistent with the counts");
          }},
      model);
}

double volume_factor(const SamplingModel& model, const SufficientStat& t) {
  if (auto* m = std::get_if<ScaleNormal>(&model)) {
    const auto& v = t.reals();
    if (v.size() != 1 || !(v[0] > 0.0)) throw DomainError("volume_factor: scale statistic must be positive");
    // Asymptotically T concentrates near sigma^2 and the same factor applies
    // with n cancelling into the normalization; only the t-dependence matters.
    return m->asymptotic ? 2.0 * std::sqrt(v[0]) : std::sqrt(4.0 * v[0] / double(m->n));
  }
  return 1.0;
}

Logistic logistic_from_doses(const std::vector<double>& doses, const std::vector<int>& group_sizes,
                             double target_sd) {
  check(doses.size() >= 2, "need at least two doses");
  check(doses.size() == group_sizes.size(), "one group size per dose required");
  const std::size_t q = doses.size();
  Eigen::VectorXd x(static_cast<Eigen::Index>(q));
  for (std::size_t i = 0; i < q; ++i) {
    check_positive(doses[i], "dose");
    x[Eigen::Index(i)] = std::log(doses[i]);
  }
  x.array() -= x.mean();
  const double sd = std::sqrt(x.squaredNorm() / double(q - 1));
  check(sd > 0.0, "doses must not all be equal");
  Logistic m;
  m.predictors = x * (target_sd / sd);
  m.group_sizes = group_sizes;
  validate_model(m);
  return m;
}

}  // namespace priorinfo
