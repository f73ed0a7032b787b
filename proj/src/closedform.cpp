#include "priorinfo/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "priorinfo/model.hpp"
#include "priorinfo/weakinfo.hpp"

namespace priorinfo {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0,1)");
}

void check_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string(what) + " must be positive and finite");
}

void check_lambda(double lambda) {
  if (!(lambda > 0.0)) throw DomainError("degrees of freedom must be positive");
}

void check_regime(const Regime& r) {
  if (!r.asymptotic && r.n < 1) throw DomainError("sample size must be at least 1");
}

void check_pair(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows() || a.rows() == 0)
    throw DomainError("scale matrices must be square and of equal dimension");
}

bool psd_with_tolerance(const Eigen::MatrixXd& d) {
  const Eigen::MatrixXd sym = 0.5 * (d + d.transpose());
  const double norm = sym.norm();
  if (norm == 0.0) return true;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() >= -1e-10 * norm;
}

}  // namespace

Regime Regime::finite(long n) {
  Regime r;
  r.n = n;
  check_regime(r);
  return r;
}

Regime Regime::limit() {
  Regime r;
  r.asymptotic = true;
  return r;
}

double normal_conflict_rate(Regime regime, double sigma1_sq, double sigma2_sq, double gamma) {
  check_regime(regime);
  check_positive(sigma1_sq, "base variance");
  check_positive(sigma2_sq, "alternative variance");
  check_gamma(gamma);
  const double h = regime.inv_n();
  const double ratio = (h + sigma2_sq) / (h + sigma1_sq);
  return chisq_sf(1.0, ratio * chisq_quantile(1.0, 1.0 - gamma));
}

std::vector<McEstimate> normal_conflict_rate_mc(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2,
                                                const std::vector<double>& gammas, Regime regime, Rng& rng,
                                                std::size_t samples) {
  check_pair(sigma1, sigma2);
  check_regime(regime);
  if (samples == 0) throw DomainError("Monte Carlo needs at least one sample");
  for (double g : gammas) check_gamma(g);
  const Eigen::Index k = sigma1.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(k, k);
  const Eigen::LLT<Eigen::MatrixXd> base(sigma1 + regime.inv_n() * id);
  const Eigen::LLT<Eigen::MatrixXd> alt(sigma2 + regime.inv_n() * id);
  if (base.info() != Eigen::Success || alt.info() != Eigen::Success)
    throw DomainError("scale matrices must be positive definite");
  const Eigen::MatrixXd L1 = base.matrixL();

  std::vector<double> q(samples);
  Eigen::VectorXd z(k);
  for (std::size_t i = 0; i < samples; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) z[j] = rng.normal();
    const Eigen::VectorXd t = L1 * z;
    q[i] = alt.matrixL().solve(t).squaredNorm();
  }
  std::sort(q.begin(), q.end());
  std::vector<McEstimate> out;
  for (double g : gammas) {
    const double cut = chisq_quantile(double(k), 1.0 - g);
    const auto below = std::lower_bound(q.begin(), q.end(), cut) - q.begin();
    McEstimate e;
    e.samples = samples;
    e.value = double(samples - std::size_t(below)) / double(samples);
    e.stderr = std::sqrt(e.value * (1.0 - e.value) / double(samples));
    out.push_back(e);
  }
  return out;
}

McEstimate normal_conflict_rate_mc(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2, double gamma,
                                   Regime regime, Rng& rng, std::size_t samples) {
  return normal_conflict_rate_mc(sigma1, sigma2, std::vector<double>{gamma}, regime, rng, samples).front();
}

bool covariance_dominates(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2) {
  check_pair(sigma1, sigma2);
  return psd_with_tolerance(sigma2 - sigma1);
}

double t_variance_threshold(double lambda) {
  check_lambda(lambda);
  if (std::isinf(lambda)) return 1.0;
  return (2.0 / lambda) * std::exp(2.0 * (std::lgamma(0.5 * (lambda + 1.0)) - std::lgamma(0.5 * lambda)));
}

double t_quantile_ratio_sup(double lambda, int points) {
  check_lambda(lambda);
  if (points < 2) throw DomainError("need at least two grid points");
  // Log-spaced toward both ends of (0, 1).
  const int half = points / 2;
  const double lo = std::log(1e-4), mid = std::log(0.5);
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    double g;
    if (i < half) {
      g = std::exp(lo + (mid - lo) * double(i) / double(half));
    } else {
      const int j = points - 1 - i;
      g = 1.0 - std::exp(lo + (mid - lo) * double(j) / double(points - 1 - half));
    }
    best = std::max(best, chisq_quantile(1.0, 1.0 - g) / f_quantile(1.0, lambda, 1.0 - g));
  }
  return best;
}

double finite_n_t_threshold(long n, double sigma1_sq, double lambda) {
  if (n < 1) throw DomainError("sample size must be at least 1");
  check_positive(sigma1_sq, "base variance");
  check_lambda(lambda);
  const double h = 1.0 / double(n);
  // Weights against u^{1/2} k(u): (1/n + s/u)^{-1/2} = u^{1/2} (u/n + s)^{-1/2}.
  const QuadratureRule rule = gamma_weight_rule(0.5 * lambda, 0.5 * lambda, 200, 0.5);
  const double target = 1.0 / std::sqrt(h + sigma1_sq);
  auto f = [&](double s) { return rule.integrate([&](double u) { return 1.0 / std::sqrt(u * h + s); }) - target; };
  return find_root(f, 1e-8 * sigma1_sq, 2.0 * t_variance_threshold(lambda) * sigma1_sq, 0.0,
                   "finite-n t threshold");
}

double multivariate_t_threshold(int k, double lambda) {
  if (k < 1) throw DomainError("dimension must be at least 1");
  check_lambda(lambda);
  if (std::isinf(lambda)) return 1.0;
  const double kk = double(k);
  return (2.0 / lambda) * std::exp((2.0 / kk) * (std::lgamma(0.5 * (kk + lambda)) - std::lgamma(0.5 * lambda)));
}

bool t_scale_dominates(const Eigen::MatrixXd& sigma1, const Eigen::MatrixXd& sigma2, double lambda) {
  check_pair(sigma1, sigma2);
  return psd_with_tolerance(sigma2 - multivariate_t_threshold(int(sigma1.rows()), lambda) * sigma1);
}

std::string gamma_prior_verdict_name(GammaPriorVerdict v) {
  switch (v) {
    case GammaPriorVerdict::WiAsymptotic: return "wi-asymptotic";
    case GammaPriorVerdict::NotCovered: return "not-covered";
    case GammaPriorVerdict::ModeLineViolation: return "mode-line-violation";
  }
  return "unknown";
}

double gamma_mode_line_rate(double alpha1, double beta1, double alpha2) {
  check_positive(alpha1, "alpha1");
  check_positive(beta1, "beta1");
  check_positive(alpha2, "alpha2");
  return beta1 * (alpha2 + 0.5) / (alpha1 + 0.5);
}

GammaPriorVerdict gamma_prior_check(double alpha1, double beta1, double alpha2, double beta2) {
  check_positive(alpha1, "alpha1");
  check_positive(beta1, "beta1");
  check_positive(alpha2, "alpha2");
  check_positive(beta2, "beta2");
  const double mode1 = beta1 / (alpha1 + 0.5);
  // Below the line's lower end no positive shape reaches the base mode.
  if (beta2 < 0.5 * mode1) return GammaPriorVerdict::NotCovered;
  if (std::abs(beta2 / (alpha2 + 0.5) - mode1) > 1e-10 * mode1) return GammaPriorVerdict::ModeLineViolation;
  return alpha2 <= alpha1 ? GammaPriorVerdict::WiAsymptotic : GammaPriorVerdict::NotCovered;
}

CalibrationResult calibrate_normal(Regime regime, double sigma1_sq, double gamma, double p) {
  check_regime(regime);
  check_positive(sigma1_sq, "base variance");
  check_gamma(gamma);
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("target reduction must lie in [0,1)");
  const double h = regime.inv_n();
  const double q = chisq_quantile(1.0, 1.0 - gamma + p * gamma) / chisq_quantile(1.0, 1.0 - gamma);
  CalibrationResult r;
  r.parameter = (h + sigma1_sq) * q - h;
  r.ratio = r.parameter / sigma1_sq;
  r.target_reduction = p;
  r.gamma = gamma;
  r.regime = regime;
  r.achieved_reduction = 1.0 - normal_conflict_rate(regime, sigma1_sq, r.parameter, gamma) / gamma;
  return r;
}

CalibrationResult calibrate_t(double lambda, Regime regime, double sigma1_sq, double gamma, double p) {
  check_lambda(lambda);
  check_regime(regime);
  check_positive(sigma1_sq, "base variance");
  check_gamma(gamma);
  if (!(p >= 0.0 && p < 1.0)) throw DomainError("target reduction must lie in [0,1)");
  CalibrationResult r;
  r.target_reduction = p;
  r.gamma = gamma;
  r.regime = regime;

  const SamplingModel model = LocationNormal{1, regime.asymptotic ? 1 : regime.n, regime.asymptotic};
  const PriorSpec base = normal_prior(0.0, sigma1_sq);
  auto achieved = [&](double s) {
    const ConflictRate c = conflict_rate(model, base, student_t_prior(0.0, s, lambda), gamma);
    return 1.0 - c.value / c.quantile;
  };
  if (regime.asymptotic) {
    r.parameter = sigma1_sq * chisq_quantile(1.0, 1.0 - gamma + gamma * p) / f_quantile(1.0, lambda, 1.0 - gamma);
  } else {
    // Reduction grows with the scale; search in log scale.
    auto f = [&](double log_s) { return achieved(std::exp(log_s)) - p; };
    double lo = std::log(sigma1_sq) - 1.0, hi = std::log(sigma1_sq) + 1.0;
    for (int i = 0; i < 60 && f(lo) > 0.0; ++i) lo -= 1.0;
    for (int i = 0; i < 60 && f(hi) < 0.0; ++i) hi += 1.0;
    r.parameter = std::exp(find_root(f, lo, hi, 1e-12, "t calibration"));
  }
  r.ratio = r.parameter / sigma1_sq;
  r.achieved_reduction = achieved(r.parameter);
  return r;
}

RegressionVerdict regression_compose(const RegressionPrior& base, const RegressionPrior& alt) {
  if (!std::isinf(base.lambda)) throw DomainError("the base coefficient prior must be normal (lambda = infinity)");
  check_pair(base.sigma, alt.sigma);
  if (!is_positive_definite(base.sigma) || !is_positive_definite(alt.sigma))
    throw DomainError("scale matrices must be positive definite");
  RegressionVerdict v;
  v.variance = gamma_prior_check(base.alpha, base.rate, alt.alpha, alt.rate);
  v.threshold = multivariate_t_threshold(int(base.sigma.rows()), alt.lambda);
  v.coefficients_wi = t_scale_dominates(base.sigma, alt.sigma, alt.lambda);
  return v;
}

}  // namespace priorinfo
