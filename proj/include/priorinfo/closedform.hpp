#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "priorinfo/distmath.hpp"

namespace priorinfo {

/// Sample size, or the large-sample limit when `asymptotic` is set.
struct Regime {
  long n = 1;
  bool asymptotic = false;

  static Regime finite(long n);
  static Regime limit();
  double inv_n() const { return asymptotic ? 0.0 : 1.0 / double(n); }
};

// ---------------------------------------------------------------------------
// Normal priors on a normal location
// ---------------------------------------------------------------------------

/// Base-predictive probability that an N(0, s2) prior flags conflict at level
/// gamma when the base prior is N(0, s1), one dimension:
/// 1 - G1(((1/n + s2)/(1/n + s1)) * G1^{-1}(1 - gamma)).
double normal_conflict_rate(Regime regime, double sigma1_sq, double sigma2_sq, double gamma);

struct McEstimate {
  double value = 0.0;
  double stderr = 0.0;
  std::size_t samples = 0;
};

/// k-dimensional version by simulation: the share of T ~ N(0, I/n + S1) with
/// T'(I/n + S2)^{-1} T >= chi2_k quantile at 1 - gamma.
McEstimate normal_conflict_rate_mc(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2, double gamma,
                                   Regime regime, Rng& rng, std::size_t samples = 100000);

/// Same, reusing one set of standard-normal draws across several levels.
std::vector<McEstimate> normal_conflict_rate_mc(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2,
                                                const std::vector<double>& gammas, Regime regime, Rng& rng,
                                                std::size_t samples = 100000);

/// True when S2 - S1 is positive semidefinite (eigenvalue tolerance -1e-10
/// relative to the norm of the difference).
bool covariance_dominates(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2);

// ---------------------------------------------------------------------------
// Student-t priors against a normal base
// ---------------------------------------------------------------------------

/// Smallest scale-to-variance ratio for which a t(lambda) prior is uniformly
/// weakly informative against a normal base in the large-sample limit:
/// (2/lambda) Gamma^2((lambda+1)/2) / Gamma^2(lambda/2).
double t_variance_threshold(double lambda);

/// max over a gamma grid of G1^{-1}(1-gamma) / H_{1,lambda}^{-1}(1-gamma),
/// where H is the F(1, lambda) distribution; converges to the threshold.
double t_quantile_ratio_sup(double lambda, int points = 999);

/// Finite-n version of the threshold: the scale s with
/// (1/n + s1)^{-1/2} = E[(1/n + s/U)^{-1/2}], U ~ Gamma_rate(lambda/2, lambda/2).
double finite_n_t_threshold(long n, double sigma1_sq, double lambda);

/// k-dimensional threshold (2/lambda) Gamma^{2/k}((k+lambda)/2) / Gamma^{2/k}(lambda/2);
/// equals 1 for k = 2 and tends to 1 as lambda grows (lambda = infinity gives 1).
double multivariate_t_threshold(int k, double lambda);

/// Sufficient condition for a k-dimensional t(lambda) prior with scale S2 to
/// be asymptotically uniformly weakly informative: S2 - tau^2 S1 is PSD.
bool t_scale_dominates(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2, double lambda);

// ---------------------------------------------------------------------------
// Gamma priors on a normal precision
// ---------------------------------------------------------------------------

enum class GammaPriorVerdict { WiAsymptotic, NotCovered, ModeLineViolation };
std::string gamma_prior_verdict_name(GammaPriorVerdict v);

/// Large-sample verdict for Gamma_rate(a2, b2) against Gamma_rate(a1, b1): the
/// alternative must share the limiting mode, b2/(a2 + 1/2) = b1/(a1 + 1/2),
/// and then is weakly informative whenever a2 <= a1.
GammaPriorVerdict gamma_prior_check(double alpha1, double beta1, double alpha2, double beta2);

/// Rate that places Gamma_rate(alpha2, .) on the same limiting mode as the base.
double gamma_mode_line_rate(double alpha1, double beta1, double alpha2);

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

struct CalibrationResult {
  double parameter = 0.0;          // calibrated alternative variance or scale
  double ratio = 0.0;              // parameter / base variance
  double target_reduction = 0.0;
  double achieved_reduction = 0.0;  // the reduction recomputed at `parameter`
  double gamma = 0.0;
  Regime regime;
};

/// N(0, s2) alternative giving reduction p against an N(0, s1) base.
CalibrationResult calibrate_normal(Regime regime, double sigma1_sq, double gamma, double p);

/// t(lambda) alternative giving reduction p against an N(0, s1) base. Closed
/// form in the limit; a root search on the reduction for finite n.
CalibrationResult calibrate_t(double lambda, Regime regime, double sigma1_sq, double gamma, double p);

// ---------------------------------------------------------------------------
// Hierarchical regression priors
// ---------------------------------------------------------------------------

/// pi(beta, sigma^2) = pi(beta | sigma^2) pi(sigma^2): a gamma prior on the
/// precision 1/sigma^2 and a normal (lambda = infinity) or t(lambda) prior on
/// beta with scale matrix sigma^2 * Sigma.
struct RegressionPrior {
  double alpha = 1.0;
  double rate = 1.0;
  Eigen::MatrixXd sigma;
  double lambda = std::numeric_limits<double>::infinity();
};

struct RegressionVerdict {
  GammaPriorVerdict variance = GammaPriorVerdict::WiAsymptotic;
  bool coefficients_wi = false;  // false means the sufficient condition does not apply
  double threshold = 1.0;        // multiplier applied to the base scale matrix
};

/// Checks the variance component and the coefficient component separately.
RegressionVerdict regression_compose(const RegressionPrior& base, const RegressionPrior& alt);

}  // namespace priorinfo
