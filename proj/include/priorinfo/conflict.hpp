#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "priorinfo/continuous.hpp"
#include "priorinfo/lattice.hpp"
#include "priorinfo/model.hpp"

namespace priorinfo {

enum class Method { Auto, ClosedForm, Enumeration, Quadrature, MonteCarlo };

std::string method_name(Method m);
/// Accepts auto, closed-form, enum, quad, mc (and the long spellings).
Method parse_method(const std::string& name);

/// Tensor rule used for the logistic prior predictive. Normal components use a
/// trapezoid rule on equally spaced nodes symmetric about the prior location;
/// Student-t components use the midpoint rule in probability space, mapped
/// through the t quantile function.
struct LogisticRule {
  double normal_span = 9.0;       // half-width in prior standard deviations
  double normal_max_step = 0.5;   // upper bound on the node spacing
  double normal_steps_per_sd = 4.0;
  int t_nodes = 256;              // per dimension, even
};

struct ConflictOptions {
  Method method = Method::Auto;
  std::size_t mc_samples = 100000;
  std::uint64_t seed = 20100101;
  LogisticRule logistic;
};

struct ConflictReport {
  double pvalue = 1.0;
  double density_at_t0 = 0.0;
  Method method = Method::ClosedForm;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;
  std::optional<double> mc_stderr;
  /// Conditional checks only: P-values of each conditional component taken
  /// on its own (a component with a one-point range has P-value 1).
  std::vector<double> component_pvalues;
};

// ---------------------------------------------------------------------------
// Densities and P-values
// ---------------------------------------------------------------------------

/// m_T(t): density (continuous) or probability (discrete) of the prior predictive.
double predictive_density(const SamplingModel& model, const PriorSpec& prior, const SufficientStat& t,
                          const ConflictOptions& opts = {});

/// m*_T(t) = m_T(t) * volume_factor(model, t).
double adjusted_density(const SamplingModel& model, const PriorSpec& prior, const SufficientStat& t,
                        const ConflictOptions& opts = {});

/// P-value M_T(m*_T(T) <= m*_T(t0)).
ConflictReport conflict_pvalue(const SamplingModel& model, const PriorSpec& prior,
                               const SufficientStat& t0, const ConflictOptions& opts = {});

/// P-value under the conditional predictive given an ancillary (shifted
/// multinomial only).
ConflictReport conditional_conflict_pvalue(const SamplingModel& model, const PriorSpec& prior,
                                           const SufficientStat& t0, AncillaryKind which,
                                           const ConflictOptions& opts = {});

/// Independent conditional checks against both maximal ancillaries.
struct AncillaryReport {
  ConflictReport u1;
  ConflictReport u2;
  /// Evidence of conflict under either ancillary counts.
  bool conflict_at(double level) const { return leq_tied(u1.pvalue, level) || leq_tied(u2.pvalue, level); }
};

AncillaryReport multiple_ancillary_check(const SamplingModel& model, const PriorSpec& prior,
                                         const SufficientStat& t0, const ConflictOptions& opts = {});

// ---------------------------------------------------------------------------
// Building blocks shared with weakinfo and discretescan
// ---------------------------------------------------------------------------

enum class PredictiveKind { Discrete, Univariate, Multivariate };
PredictiveKind predictive_kind(const SamplingModel& model);

/// Lattice of a discrete model; index_of maps a statistic to its position.
std::int64_t lattice_size(const SamplingModel& model);
std::int64_t lattice_index(const SamplingModel& model, const SufficientStat& t);
SufficientStat lattice_point(const SamplingModel& model, std::int64_t index);

/// Full prior predictive pmf of a discrete model over its lattice.
Eigen::VectorXd discrete_predictive_pmf(const SamplingModel& model, const PriorSpec& prior,
                                        const ConflictOptions& opts = {});

Eigen::VectorXd binomial_predictive_pmf(long n, const BetaPrior& prior);
Eigen::VectorXd logistic_predictive_pmf(const Logistic& model, const ProductPrior& prior,
                                        const LogisticRule& rule = {});

/// Nodes and weights the logistic rule uses for one coefficient.
void logistic_component_nodes(const ScalarPrior& component, const LogisticRule& rule,
                              std::vector<double>& nodes, std::vector<double>& weights);

/// All (f1, f2, f3, f4) with sum n, in lexicographic order.
class MultinomialLattice {
public:
  explicit MultinomialLattice(long n);
  long n() const { return n_; }
  std::int64_t size() const { return std::int64_t(points_.size()); }
  const std::array<long, 4>& point(std::int64_t i) const { return points_[std::size_t(i)]; }
  std::int64_t index(const std::vector<long>& f) const;

private:
  long n_;
  std::vector<std::array<long, 4>> points_;
  std::vector<std::int64_t> lookup_;  // (n+1)^3 table over (f1, f2, f3)
};

Eigen::VectorXd multinomial_predictive_pmf(long n, const BetaPrior& prior);

/// Outcomes sharing a fixed ancillary value. For U1 = (m1, m2) the free
/// coordinates are (f1, f3); for U2 = (m1, m2) they are (f1, f2).
class ConditionalLattice {
public:
  ConditionalLattice(AncillaryKind kind, std::array<long, 2> value);
  AncillaryKind kind() const { return kind_; }
  const std::array<long, 2>& value() const { return value_; }
  std::int64_t size() const { return (value_[0] + 1) * (value_[1] + 1); }
  std::array<long, 2> free_coordinates(std::int64_t index) const;
  std::vector<long> counts(std::int64_t index) const;
  std::int64_t index(const std::vector<long>& counts) const;

private:
  AncillaryKind kind_;
  std::array<long, 2> value_;
};

/// Conditional prior predictive given the ancillary, over the conditional lattice.
Eigen::VectorXd conditional_predictive_pmf(const ConditionalLattice& lattice, const BetaPrior& prior);

/// Continuous one-dimensional predictive (LocationNormal k = 1, ScaleNormal,
/// asymptotic Binomial).
UnivariatePredictive univariate_predictive(const SamplingModel& model, const PriorSpec& prior);

/// k-dimensional LocationNormal predictive.
MultivariatePredictive multivariate_predictive(const SamplingModel& model, const PriorSpec& prior);

/// One draw of T from the prior predictive (theta from the prior, then T).
SufficientStat sample_statistic(const SamplingModel& model, const PriorSpec& prior, Rng& rng);

}  // namespace priorinfo
