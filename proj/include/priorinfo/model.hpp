#pragma once

#include <array>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "priorinfo/distmath.hpp"

namespace priorinfo {

/// The (model, prior) combination has no implementation.
class UnsupportedPair : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A sufficient-statistic value outside the model's support.
class RangeError : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

// ---------------------------------------------------------------------------
// Sampling models. `asymptotic` selects the n -> infinity limit explicitly; it
// is never inferred from a large n.
// ---------------------------------------------------------------------------

/// k-dimensional normal location model; T is the sample mean, N(mu, I/n).
struct LocationNormal {
  int dim = 1;
  long n = 1;
  bool asymptotic = false;
};

/// Zero-mean normal with unknown variance; T = sum x_i^2 / n.
struct ScaleNormal {
  long n = 1;
  bool asymptotic = false;
};

/// T = number of successes out of n.
struct Binomial {
  long n = 1;
  bool asymptotic = false;
};

/// Grouped logistic regression. Row i of `predictors` holds the centered
/// covariates of group i; T_i counts the successes among group_sizes[i].
struct Logistic {
  Eigen::MatrixXd predictors;
  std::vector<int> group_sizes;

  int groups() const { return int(predictors.rows()); }
  int slopes() const { return int(predictors.cols()); }
};

/// Four-cell multinomial with cell probabilities (1-t)/6, (1+t)/6, (2-t)/6,
/// (2+t)/6 for t in [-1, 1].
struct ShiftedMultinomial {
  long n = 1;
};

using SamplingModel = std::variant<LocationNormal, ScaleNormal, Binomial, Logistic, ShiftedMultinomial>;

// ---------------------------------------------------------------------------
// Priors
// ---------------------------------------------------------------------------

struct NormalPrior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;

  int dim() const { return int(mean.size()); }
};

/// Multivariate t with location, scale matrix and dof degrees of freedom.
struct StudentTPrior {
  Eigen::VectorXd location;
  Eigen::MatrixXd scale;
  double dof = 1.0;

  int dim() const { return int(location.size()); }
};

/// Gamma prior on the precision 1/sigma^2 (shape, rate).
struct GammaRatePrior {
  double shape = 1.0;
  double rate = 1.0;
};

/// Beta prior. Used on [0, 1] with Binomial; with ShiftedMultinomial the
/// parameter is theta = 2B - 1 on [-1, 1].
struct BetaPrior {
  double alpha = 1.0;
  double beta = 1.0;
};

using ScalarPrior = std::variant<NormalPrior, StudentTPrior>;

/// Independent one-dimensional priors, one per coefficient.
struct ProductPrior {
  std::vector<ScalarPrior> components;
};

using PriorSpec = std::variant<NormalPrior, StudentTPrior, GammaRatePrior, BetaPrior, ProductPrior>;

// Validating constructors; each throws DomainError on bad parameters.
NormalPrior normal_prior(double mean, double variance);
NormalPrior normal_prior(const Eigen::VectorXd& mean, const Eigen::MatrixXd& cov);
StudentTPrior student_t_prior(double location, double scale_sq, double dof);
StudentTPrior student_t_prior(const Eigen::VectorXd& location, const Eigen::MatrixXd& scale,
                              double dof);
GammaRatePrior gamma_rate_prior(double shape, double rate);
BetaPrior beta_prior(double alpha, double beta);
ProductPrior product_prior(std::vector<ScalarPrior> components);

/// Symmetric with min eigenvalue > rel_tol * max eigenvalue.
bool is_positive_definite(const Eigen::MatrixXd& m, double rel_tol = 1e-12);

void validate_model(const SamplingModel& model);
void validate_prior(const PriorSpec& prior);

/// Throws UnsupportedPair unless the combination is implemented; also
/// validates both parts and their dimensions.
void validate(const SamplingModel& model, const PriorSpec& prior);

std::string model_name(const SamplingModel& model);
std::string prior_name(const PriorSpec& prior);

// ---------------------------------------------------------------------------
// Sufficient statistics
// ---------------------------------------------------------------------------

enum class AncillaryKind { U1, U2 };

std::string ancillary_name(AncillaryKind kind);
AncillaryKind parse_ancillary(const std::string& name);

/// For counts (f1, f2, f3, f4): U1 = (f1+f2, f3+f4), U2 = (f1+f4, f2+f3).
std::array<long, 2> ancillary_value(const std::vector<long>& counts, AncillaryKind kind);

struct Ancillary {
  AncillaryKind kind = AncillaryKind::U1;
  std::array<long, 2> value{0, 0};
};

struct SufficientStat {
  std::variant<Eigen::VectorXd, std::vector<long>> value;
  std::optional<Ancillary> ancillary;

  static SufficientStat real(double t);
  static SufficientStat real(const Eigen::VectorXd& t);
  static SufficientStat counts(std::vector<long> c);

  bool is_counts() const { return std::holds_alternative<std::vector<long>>(value); }
  const Eigen::VectorXd& reals() const;
  const std::vector<long>& integer_counts() const;
};

/// Throws RangeError if t is not in the model's sufficient-statistic space.
void validate_stat(const SamplingModel& model, const SufficientStat& t);

/// Factor turning m_T into the invariant density m*_T.
double volume_factor(const SamplingModel& model, const SufficientStat& t);

/// Logistic design from raw doses: log dose, centered, scaled to the given
/// sample standard deviation (n - 1 denominator).
Logistic logistic_from_doses(const std::vector<double>& doses, const std::vector<int>& group_sizes,
                             double target_sd = 0.5);

}  // namespace priorinfo
